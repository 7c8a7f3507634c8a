"""Monte Carlo trial kernels.

The compiled extension ``_core`` is used when it was built; otherwise the
NumPy implementation in ``_fallback`` is selected. Setting the environment
variable ``SELRELAY_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

if os.environ.get("SELRELAY_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

effective_snr = _impl.effective_snr
conditional_ber = _impl.conditional_ber
genie_errors = _impl.genie_errors
df_errors = _impl.df_errors

__all__ = ["BACKEND", "effective_snr", "conditional_ber", "genie_errors", "df_errors"]
