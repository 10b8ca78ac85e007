"""Selection of the compute backend for the hot kernels.

The compiled extension (tvcap._core, Cython) is preferred when it was built;
otherwise the NumPy fallback is used. Set TVCAP_BACKEND=numpy or
TVCAP_BACKEND=compiled to force a choice ("compiled" raises if the extension
is missing). Both backends implement the same two entry points:

    rk4_charge(a_half, b_half, q0, dt, q_limit) -> (q, div_idx)
    fdtd_run(eps_r, tv_start, tv_end, eps_tv, sheet_idx, sheet_g, src_idx,
             einc_src, hinc_src, dt, dx, probe_idx, n_steps)
             -> (probes, p_tv, p_static, j_tv, j_static)

benchmarks/bench_backends.py times one against the other.
"""

from __future__ import annotations

import os

from . import _fallback

_requested = os.environ.get("TVCAP_BACKEND", "auto")

if _requested == "numpy":
    _impl = _fallback
elif _requested in ("auto", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "TVCAP_BACKEND=compiled but tvcap._core is not built; "
                "reinstall with a C compiler and Cython available") from None
        _impl = _fallback
else:
    raise ValueError(f"unknown TVCAP_BACKEND value {_requested!r}")

rk4_charge = _impl.rk4_charge
fdtd_run = _impl.fdtd_run


def backend_name() -> str:
    """Either "compiled" or "numpy"."""
    return _impl.BACKEND_NAME
