"""Numeric kernels with a numba fast path and a pure-numpy fallback.

Two operations dominate the simulator's runtime: scoring batches of offers
against a constraint table (GA fitness, iso-curve construction) and
exhaustively enumerating raw utility over the whole issue grid (max_raw
normalization, Pareto front). Both are implemented twice:

* a ``@njit``-compiled loop (used when numba imports cleanly), and
* a vectorized numpy fallback.

The active backend is chosen once per process from the ``NEGOSIM_BACKEND``
environment variable: ``auto`` (default; numba if available), ``numba``, or
``numpy``. ``get_backend`` exposes both implementations explicitly so the
benchmark script and the equivalence tests can compare them side by side.

Constraint tables are dense ``(L, N)`` integer matrices ``lo``/``hi`` plus a
``(L,)`` float vector of values; issues a constraint does not mention carry
the full domain bounds, which makes "unconstrained" and "satisfied" the same
test. Both backends accumulate constraint values in table order, so their
grid results are bitwise identical (the batch scorer may differ by ~1 ulp
because the numpy path sums via a matmul).
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

_ENV_VAR = "NEGOSIM_BACKEND"

# Flat grids enumerate offers in C order, i.e. lexicographically by issue
# vector; chunking keeps the fallback's (chunk, L, N) mask broadcast bounded.
_EVAL_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# pure-numpy backend
# ---------------------------------------------------------------------------

def _np_eval_batch(offers, lo, hi, values):
    """Raw utility of each offer row: sum of values of satisfied constraints."""
    offers = np.ascontiguousarray(offers, dtype=np.int64)
    out = np.empty(offers.shape[0], dtype=np.float64)
    for start in range(0, offers.shape[0], _EVAL_CHUNK):
        block = offers[start:start + _EVAL_CHUNK]
        sat = ((block[:, None, :] >= lo[None, :, :])
               & (block[:, None, :] <= hi[None, :, :])).all(axis=2)
        out[start:start + _EVAL_CHUNK] = sat @ values
    return out


def _np_raw_grid(lo, hi, values, n_issues, lower, upper):
    """Raw utility over the full grid, flattened in C (lexicographic) order.

    Each constraint touches a hyper-rectangle, so the grid is built by
    slice-adding the constraint's value into its box — no per-offer loop.
    """
    size = upper - lower + 1
    grid = np.zeros((size,) * n_issues, dtype=np.float64)
    for l in range(values.shape[0]):
        box = tuple(
            slice(lo[l, i] - lower, hi[l, i] - lower + 1)
            for i in range(n_issues)
        )
        grid[box] += values[l]
    return grid.ravel()


_NUMPY_BACKEND = SimpleNamespace(
    name="numpy", eval_batch=_np_eval_batch, raw_grid=_np_raw_grid
)


# ---------------------------------------------------------------------------
# numba backend (optional)
# ---------------------------------------------------------------------------

def _build_numba_backend():
    from numba import njit

    @njit(cache=True)
    def eval_batch(offers, lo, hi, values):
        n, n_issues = offers.shape
        n_cons = values.shape[0]
        out = np.zeros(n, dtype=np.float64)
        for r in range(n):
            total = 0.0
            for l in range(n_cons):
                ok = True
                for i in range(n_issues):
                    v = offers[r, i]
                    if v < lo[l, i] or v > hi[l, i]:
                        ok = False
                        break
                if ok:
                    total += values[l]
            out[r] = total
        return out

    @njit(cache=True)
    def raw_grid(lo, hi, values, n_issues, lower, upper):
        size = upper - lower + 1
        total_cells = size ** n_issues
        n_cons = values.shape[0]
        out = np.empty(total_cells, dtype=np.float64)
        digits = np.empty(n_issues, dtype=np.int64)
        for flat in range(total_cells):
            rem = flat
            for i in range(n_issues - 1, -1, -1):
                digits[i] = lower + rem % size
                rem //= size
            total = 0.0
            for l in range(n_cons):
                ok = True
                for i in range(n_issues):
                    v = digits[i]
                    if v < lo[l, i] or v > hi[l, i]:
                        ok = False
                        break
                if ok:
                    total += values[l]
            out[flat] = total
        return out

    def eval_batch_wrapper(offers, lo, hi, values):
        return eval_batch(np.ascontiguousarray(offers, dtype=np.int64),
                          lo, hi, values)

    return SimpleNamespace(name="numba", eval_batch=eval_batch_wrapper,
                           raw_grid=raw_grid)


_numba_backend = None
_numba_error = None


def _get_numba_backend():
    global _numba_backend, _numba_error
    if _numba_backend is None and _numba_error is None:
        try:
            _numba_backend = _build_numba_backend()
        except ImportError as exc:  # numba not installed
            _numba_error = exc
    if _numba_backend is None:
        raise RuntimeError(f"numba backend unavailable: {_numba_error}")
    return _numba_backend


def get_backend(name: str | None = None):
    """Return a backend namespace (``eval_batch``, ``raw_grid``, ``name``).

    ``name``: "numpy", "numba", or None/"auto" (env var, then numba when
    importable, else numpy).
    """
    if name is None:
        name = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if name == "numpy":
        return _NUMPY_BACKEND
    if name == "numba":
        return _get_numba_backend()
    if name == "auto":
        try:
            return _get_numba_backend()
        except RuntimeError:
            return _NUMPY_BACKEND
    raise ValueError(
        f"unknown kernel backend {name!r}; expected auto, numba, or numpy"
    )


_active = None


def active_backend():
    """The process-wide default backend (resolved once, from the env var)."""
    global _active
    if _active is None:
        _active = get_backend()
    return _active


def eval_batch(offers, lo, hi, values):
    return active_backend().eval_batch(offers, lo, hi, values)


def raw_grid(lo, hi, values, n_issues, lower, upper):
    return active_backend().raw_grid(lo, hi, values, n_issues, lower, upper)
