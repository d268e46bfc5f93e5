"""Hot numeric kernels with two interchangeable lanes.

`_compiled` is a Cython extension covering the inner loops (stepping,
fine-reference integration, series recurrences, dual-number stepping);
`_pure` is a pure-Python twin built on the generic scalar/jet layer. The
compiled lane is preferred when the extension built; set RKADAPT_PURE_PYTHON=1
to force the fallback. Both lanes expose the same functions and are pinned
together by parity tests.
"""

import os

if os.environ.get("RKADAPT_PURE_PYTHON"):
    from . import _pure as _impl
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

LANE = _impl.LANE

step_tableau = _impl.step_tableau
integrate_tableau = _impl.integrate_tableau
integrate_final = _impl.integrate_final
solution_jet_coeffs = _impl.solution_jet_coeffs
step_jet_coeffs = _impl.step_jet_coeffs
step_dual = _impl.step_dual
step_jet_dual = _impl.step_jet_dual

OK = -1  # status value meaning "no divergence"

__all__ = [
    "LANE",
    "OK",
    "step_tableau",
    "integrate_tableau",
    "integrate_final",
    "solution_jet_coeffs",
    "step_jet_coeffs",
    "step_dual",
    "step_jet_dual",
]
