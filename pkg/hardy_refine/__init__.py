"""hardy-refine: numerical verification of refined Hardy inequalities.

Scalar, discrete and finite-dimensional operator forms of the refined Hardy
inequality and of the superquadratic Jensen inequalities it is built on,
each evaluated with audited error budgets.
"""

__version__ = "0.1.0"

from hardy_refine.funcdsl import ScalarFn, from_text, parse
from hardy_refine.hardy import HardyReport, Verdict, classical_check, refined_check
from hardy_refine.quadrature import QuadConfig, QuadResult

__all__ = [
    "__version__",
    "HardyReport",
    "QuadConfig",
    "QuadResult",
    "ScalarFn",
    "Verdict",
    "classical_check",
    "from_text",
    "parse",
    "refined_check",
]
