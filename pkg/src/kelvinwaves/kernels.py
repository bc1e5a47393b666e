"""Select the compiled kernel module when available, else the pure-Python one.

Set ``KELVINWAVES_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

if os.environ.get("KELVINWAVES_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as backend
else:
    try:
        from . import _kernels as backend
    except ImportError:  # extension not built
        from . import _kernels_py as backend

BACKEND = backend.BACKEND
FD_STEP = 1e-3


def make_consts(cfg, omega, ellipsoid, drift=True, fd_step=FD_STEP):
    """Pack the frequency-dependent matrices into the flat array the kernels expect."""
    from .geometry import omega_metric
    from .symbols import b_form_matrices

    met = omega_metric(cfg, omega)
    _, xi = b_form_matrices(cfg, omega)
    return np.concatenate(
        [met.metric.ravel(), xi.ravel(), met.sigma.ravel(), ellipsoid.semi_axes, [1.0 if drift else 0.0, fd_step]]
    ).astype(np.float64)


def metric_rows(cfg, omegas):
    """One (g, Xi, Sigma) row per frequency, for ``count_roots``."""
    return np.array([make_consts(cfg, w, _UNIT)[:27] for w in omegas])


class _Unit:
    semi_axes = (1.0, 1.0, 1.0)


_UNIT = _Unit()
