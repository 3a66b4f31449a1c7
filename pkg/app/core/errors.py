"""
Exception hierarchy.

Every failure the engine reports is a ValueError subclass whose message
starts with a fixed phrase, so callers can match either on type or on text.
"""


class KoppelmanError(ValueError):
    """Base class for all engine errors."""

    message = "koppelman engine error"
    exit_code = 2

    def __init__(
        self,
        detail: str | None = None,
    ):
        self.detail = detail
        text = self.message if not detail else f"{self.message}: {detail}"
        super().__init__(text)


class ParseError(KoppelmanError):
    message = "invalid expression"


class DenominatorVanishesError(KoppelmanError):
    message = "denominator vanishes identically"


class PoleEvaluationError(KoppelmanError):
    message = "evaluation at pole"
    exit_code = 1


class NotOmegaDivisibleError(KoppelmanError):
    message = "degree-N part not Ω-divisible"


class UnsupportedRankError(KoppelmanError):
    message = "unsupported rank"


class PointOnVarietyError(KoppelmanError):
    message = "point on X"


class RepeatedFactorError(KoppelmanError):
    message = "repeated factor"


class FiberVariableDegenerateError(KoppelmanError):
    message = "fiber variable degenerate"


class NearDiscriminantError(KoppelmanError):
    message = "near-discriminant node"
    exit_code = 1


class ContinuationBreakError(KoppelmanError):
    message = "continuation break"
    exit_code = 1


class FiberDerivativeVanishesError(KoppelmanError):
    message = "fiber derivative vanishes"


class TwistBelowThresholdError(KoppelmanError):
    message = "twist below threshold (s ≥ κ₀ − N)"


class TwistRangeError(KoppelmanError):
    message = "twist outside the weight's validity range"


class CurveNotSmoothError(KoppelmanError):
    message = "curve not smooth"


class MinorDegenerateError(KoppelmanError):
    message = "minor degenerate on X"


class TargetNearDiscriminantError(KoppelmanError):
    message = "target too close to excluded discriminant region"


class ExtensionFitError(KoppelmanError):
    message = "extension fit failed"
    exit_code = 1


class CalibrationError(KoppelmanError):
    message = "calibration failed"
    exit_code = 1
