from app.utils.reports.writers import (
    ConvergenceFit,
    emit_convergence,
    output_path,
    to_jsonable,
    write_csv,
    write_json,
)

__all__ = [
    "ConvergenceFit",
    "emit_convergence",
    "output_path",
    "to_jsonable",
    "write_csv",
    "write_json",
]
