"""Hot per-pair loops.

Two implementations of the same tally, bit-for-bit identical:

* ``numba``: ``@njit(parallel=True)`` loop over pairs.
* ``numpy``: chunked, vectorized arrays.

The default backend is numba when importable.  Set ``EPRSIM_BACKEND=numpy`` to
force the pure-numpy path (or ``EPRSIM_BACKEND=numba`` to insist on numba).
"""
from __future__ import annotations

import os

import numpy as np

from . import rng
from .model import HALF_PI, TWO_PI

CHUNK = 1 << 18

_U64_GOLDEN = np.uint64(rng.GOLDEN)
_U64_MIX1 = np.uint64(rng.MIX1)
_U64_MIX2 = np.uint64(rng.MIX2)

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _default_backend() -> str:
    name = os.environ.get("EPRSIM_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"EPRSIM_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("EPRSIM_BACKEND=numba but numba is not installed")
    return name


BACKEND = _default_backend()


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not installed")
    return backend


# --- numpy path -------------------------------------------------------------


def _outcomes_np(psi: np.ndarray, angle: float, threshold: float) -> np.ndarray:
    c = np.cos(psi - angle) ** 2
    out = np.zeros(psi.shape, dtype=np.int8)
    minus = c <= 0.5 - threshold
    out[minus] = -1
    out[c >= 0.5 + threshold] = 1
    return out


def count_setting_numpy(
    key_pol: int,
    key_d1: int,
    key_d2: int,
    n: int,
    alpha: float,
    beta: float,
    thr1: float,
    thr2: float,
    width: float,
) -> tuple[int, int, int, int, int]:
    totals = np.zeros(5, dtype=np.int64)
    for lo in range(0, n, CHUNK):
        hi = min(n, lo + CHUNK)
        psi2 = (TWO_PI * rng.uniform_array(key_pol, lo, hi)) % TWO_PI
        psi1 = (psi2 + HALF_PI) % TWO_PI
        if width > 0.0:
            psi1 = (psi1 + (rng.uniform_array(key_d1, lo, hi) - 0.5) * width) % TWO_PI
            psi2 = (psi2 + (rng.uniform_array(key_d2, lo, hi) - 0.5) * width) % TWO_PI
        o1 = _outcomes_np(psi1, alpha, thr1)
        o2 = _outcomes_np(psi2, beta, thr2)
        det = (o1 != 0) & (o2 != 0)
        totals[0] += np.count_nonzero(det & (o1 == 1) & (o2 == 1))
        totals[1] += np.count_nonzero(det & (o1 == 1) & (o2 == -1))
        totals[2] += np.count_nonzero(det & (o1 == -1) & (o2 == 1))
        totals[3] += np.count_nonzero(det & (o1 == -1) & (o2 == -1))
        totals[4] += (hi - lo) - np.count_nonzero(det)
    return tuple(int(t) for t in totals)


# --- numba path -------------------------------------------------------------

if HAVE_NUMBA:
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"

    @njit(cache=True, inline="always")
    def _uniform_nb(key, ctr):
        z = key + ctr * _U64_GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _U64_MIX1
        z = (z ^ (z >> np.uint64(27))) * _U64_MIX2
        z = z ^ (z >> np.uint64(31))
        return np.float64(z >> np.uint64(11)) * rng.INV_2_53

    @njit(cache=True, inline="always")
    def _outcome_nb(psi, angle, threshold):
        c = np.cos(psi - angle) ** 2
        if c >= 0.5 + threshold:
            return 1
        if c <= 0.5 - threshold:
            return -1
        return 0

    @njit(cache=True, parallel=True)
    def _count_setting_nb(key_pol, key_d1, key_d2, n, alpha, beta, thr1, thr2, width):
        n_pp = 0
        n_pm = 0
        n_mp = 0
        n_mm = 0
        n_disc = 0
        for i in prange(n):
            ctr = np.uint64(i) + np.uint64(1)
            psi2 = (TWO_PI * _uniform_nb(key_pol, ctr)) % TWO_PI
            psi1 = (psi2 + HALF_PI) % TWO_PI
            if width > 0.0:
                psi1 = (psi1 + (_uniform_nb(key_d1, ctr) - 0.5) * width) % TWO_PI
                psi2 = (psi2 + (_uniform_nb(key_d2, ctr) - 0.5) * width) % TWO_PI
            o1 = _outcome_nb(psi1, alpha, thr1)
            o2 = _outcome_nb(psi2, beta, thr2)
            if o1 == 0 or o2 == 0:
                n_disc += 1
            elif o1 == 1:
                if o2 == 1:
                    n_pp += 1
                else:
                    n_pm += 1
            elif o2 == 1:
                n_mp += 1
            else:
                n_mm += 1
        return n_pp, n_pm, n_mp, n_mm, n_disc


def count_setting_numba(key_pol, key_d1, key_d2, n, alpha, beta, thr1, thr2, width):
    res = _count_setting_nb(
        np.uint64(key_pol),
        np.uint64(key_d1),
        np.uint64(key_d2),
        np.int64(n),
        float(alpha),
        float(beta),
        float(thr1),
        float(thr2),
        float(width),
    )
    return tuple(int(v) for v in res)


def count_setting(*args, backend: str | None = None) -> tuple[int, int, int, int, int]:
    """Tally ``(n_pp, n_pm, n_mp, n_mm, n_discarded)`` for one analyzer setting.

    Positional arguments: ``key_pol, key_d1, key_d2, n, alpha, beta, thr1,
    thr2, width`` where ``width`` is the full decoherence jitter width
    ``d * pi`` and both angles are already canonical.
    """
    if resolve_backend(backend) == "numba":
        return count_setting_numba(*args)
    return count_setting_numpy(*args)


def set_threads(n: int | None) -> None:
    """Number of numba worker threads; no-op on the numpy path."""
    if HAVE_NUMBA and n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
