"""Multidimensional polynomial phase estimation on complex lattice signals.

The estimator peels coefficients in descending degree order: for each
multi-index m it applies conjugate-product differencing along each axis m_d
times, takes a weighted circular average of the result, reads the
coefficient off the averaged phase, and removes the term from the working
signal. With the shared falling-factorial basis the differenced phase of a
degree-m term is exactly constant, so the noiseless procedure is exact for
coefficients inside one wrap cycle.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .wavefront import (
    DegreeSet,
    PolyPhaseModel,
    approx_channel,
    basis_at,
    basis_on_lattice,
    binomial,
)

__all__ = [
    "binomial",
    "diff",
    "diff_multi",
    "weights",
    "circular_average",
    "estimate",
    "reconstruct",
    "expand_to_lattice",
]


def diff(signal: np.ndarray, axis: int) -> np.ndarray:
    """One conjugate-product difference along ``axis``; the extent shrinks by 1.

    Output entry n is signal(n + e_axis) * conj(signal(n)), so a linear
    phase along the axis becomes constant.
    """
    signal = np.asarray(signal)
    if signal.shape[axis] < 2:
        raise ValueError(f"axis {axis} is exhausted (extent {signal.shape[axis]})")
    upper = np.take(signal, np.arange(1, signal.shape[axis]), axis=axis)
    lower = np.take(signal, np.arange(signal.shape[axis] - 1), axis=axis)
    return upper * np.conj(lower)


def diff_multi(signal: np.ndarray, m) -> np.ndarray:
    """Apply ``m_d`` conjugate-product differences along each axis d."""
    out = np.asarray(signal)
    for axis, reps in enumerate(m):
        for _ in range(int(reps)):
            out = diff(out, axis)
    return out


def _weights_1d(m: int, n: int) -> np.ndarray:
    idx = np.arange(n - m)
    num = binomial(idx + m, m) * binomial(n - idx - 1, m)
    den = binomial(n + m, 2 * m + 1)
    return num / den


def weights(m, shape) -> np.ndarray:
    """Averaging weight table for degree ``m`` on a lattice of shape ``shape``.

    The table lives on the differenced domain [N - m]; it is separable per
    axis, nonnegative, symmetric, and sums to one.
    """
    m = tuple(int(v) for v in m)
    shape = tuple(int(n) for n in shape)
    if any(k < 0 or k >= n for k, n in zip(m, shape)):
        raise ValueError("need 0 <= m_d < N_d on every axis")
    factors = [_weights_1d(k, n) for k, n in zip(m, shape)]
    return reduce(np.multiply.outer, factors)


def circular_average(signal: np.ndarray, m) -> complex:
    """Weighted circular average of a differenced signal, unit modulus.

    The plain sum of the unit-modulus projections fixes a pilot direction;
    the output is that direction corrected by the weighted mean of the
    residual phases wrapped around it. ``m`` is the degree that produced
    ``signal``, which sets the weight table.
    """
    flat = np.asarray(signal).ravel()
    if flat.size == 0:
        raise ValueError("empty signal")
    if np.any(flat == 0):
        raise ValueError("signal contains zeros; projection undefined")
    proj = flat / np.abs(flat)
    total = proj.sum()
    if total == 0:
        raise ValueError("projections cancel; pilot direction undefined")
    pilot = total / abs(total)
    residual = np.angle(flat * np.conj(total))
    shape = tuple(s + int(k) for s, k in zip(signal.shape, m))
    w = weights(m, shape).ravel()
    return complex(pilot * np.exp(1j * float(w @ residual)))


def _degree_rows(degrees) -> np.ndarray:
    if isinstance(degrees, DegreeSet):
        return degrees.degrees
    return np.asarray(degrees, dtype=int)


def estimate(y: np.ndarray, degrees) -> PolyPhaseModel:
    """Estimate polynomial phase coefficients of ``y`` by sequential peeling.

    ``degrees`` is a DegreeSet or an array of multi-indices; terms are
    processed in descending total degree (lexicographic tie-break). Each
    coefficient is recovered modulo one cycle of the differenced lattice.
    """
    y = np.asarray(y, dtype=complex)
    rows = _degree_rows(degrees)
    if rows.ndim != 2 or rows.shape[1] != y.ndim:
        raise ValueError("degree multi-indices must match the signal rank")
    if np.any(rows < 0) or np.any(rows >= np.asarray(y.shape)):
        raise ValueError("every degree must satisfy 0 <= m_d < N_d")
    if not np.all(np.isfinite(y)):
        raise ValueError("signal must be finite")
    order = sorted(range(rows.shape[0]),
                   key=lambda i: (int(rows[i].sum()), tuple(rows[i])), reverse=True)
    work = y.copy()
    coeffs = np.empty(rows.shape[0])
    for i in order:
        m = tuple(int(v) for v in rows[i])
        differenced = diff_multi(work, m)
        a = np.angle(circular_average(differenced, m)) / (2.0 * np.pi)
        coeffs[i] = a
        work *= np.exp(-2j * np.pi * a * basis_on_lattice(work.shape, m))
    return PolyPhaseModel(shape=y.shape, degrees=rows, coeffs=coeffs)


def reconstruct(model: PolyPhaseModel) -> np.ndarray:
    """Unit-modulus lattice signal of a fitted model over its full shape.

    Indices that were never observed (sublattice fits) are filled by the
    polynomial itself, which is an exact extrapolation for noiseless
    polynomial truth.
    """
    return approx_channel(model)


def expand_to_lattice(model: PolyPhaseModel, coords, full_shape,
                      degrees=None) -> PolyPhaseModel:
    """Re-express a sublattice fit in the coordinates of the full lattice.

    ``coords`` gives, per axis, the full-lattice index of each sublattice
    sample; ``degrees`` selects the target basis (the model's own degrees by
    default). The fitted polynomial is evaluated on a determining subgrid
    and re-solved against the full-lattice basis there, which is exact
    whenever the fitted values come from a polynomial in the target span.
    """
    full_shape = tuple(int(n) for n in full_shape)
    coords = tuple(np.asarray(c, dtype=int) for c in coords)
    if len(coords) != len(full_shape) or len(coords) != len(model.shape):
        raise ValueError("coords must cover every lattice axis")
    for c, n_sub, n_full in zip(coords, model.shape, full_shape):
        if c.shape != (n_sub,):
            raise ValueError("coords must match the sublattice shape")
        if np.any(c < 0) or np.any(c >= n_full):
            raise ValueError("coords out of range of the full lattice")
    rows = model.degrees if degrees is None else _degree_rows(degrees)
    m_max = np.maximum(rows.max(axis=0), model.degrees.max(axis=0))
    if np.any(m_max + 1 > np.asarray(model.shape)):
        raise ValueError("sublattice too small to determine the full-lattice basis")
    sub_idx = tuple(np.arange(int(k) + 1) for k in m_max)
    phase = model.phase_at(sub_idx)
    grid = tuple(c[idx] for c, idx in zip(coords, sub_idx))
    B = np.stack([basis_at(grid, m).ravel() for m in rows], axis=1)
    coeffs, *_ = np.linalg.lstsq(B, phase.ravel(), rcond=None)
    return PolyPhaseModel(shape=full_shape, degrees=rows, coeffs=coeffs)
