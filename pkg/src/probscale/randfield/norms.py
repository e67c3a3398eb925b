"""Sobolev and Besov ``B^s_{inf,inf}`` norms of finitely supported Fourier series."""
from __future__ import annotations

from typing import Mapping, Optional, Union

import numpy as np
import scipy.fft as sfft

from .field import bracket

Coeffs = Union[Mapping[tuple, complex], tuple[np.ndarray, np.ndarray]]

BESOV_MAX_WORK = 5e7


def as_arrays(coeffs: Coeffs) -> tuple[np.ndarray, np.ndarray]:
    """``(modes, values)`` from a ``{k: c}`` map or an array pair."""
    if isinstance(coeffs, Mapping):
        keys = list(coeffs)
        if not keys:
            return np.zeros((0, 1), dtype=np.int64), np.zeros(0, dtype=np.complex128)
        d = len(keys[0])
        return (np.array(keys, dtype=np.int64).reshape(-1, d),
                np.array([coeffs[k] for k in keys], dtype=np.complex128))
    modes, values = coeffs
    return np.asarray(modes, dtype=np.int64), np.asarray(values, dtype=np.complex128)


def h_s_norm(coeffs: Coeffs, s: float) -> float:
    modes, values = as_arrays(coeffs)
    if len(values) == 0:
        return 0.0
    w = bracket(modes) ** (2 * float(s))
    return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))


def _effective_band(modes: np.ndarray) -> int:
    n = 1
    kmax = int(np.abs(modes).max()) if len(modes) else 0
    while 2 * n <= kmax:
        n *= 2
    return n


def synthesize(modes: np.ndarray, values: np.ndarray, n_axis: int) -> np.ndarray:
    """``u(x) = sum_k c_k e^{ik.x}`` on the uniform grid with ``n_axis`` points per axis."""
    d = modes.shape[1]
    hat = np.zeros((n_axis,) * d, dtype=np.complex128)
    np.add.at(hat, tuple((modes % n_axis).T), values)
    return sfft.ifftn(hat) * float(n_axis) ** d


def dyadic_block(modes: np.ndarray) -> np.ndarray:
    """Block index ``j``: ``0`` for ``|k| < 2``, else ``2^j <= |k| < 2^(j+1)``."""
    k2 = (modes.astype(np.int64) ** 2).sum(axis=1)
    j = np.zeros(len(modes), dtype=np.int64)
    bound = 4
    level = 1
    while np.any(k2 >= bound):
        j[k2 >= bound] = level
        level += 1
        bound *= 4
    return j


def besov_work(modes: np.ndarray, grid_factor: int = 4) -> float:
    if len(modes) == 0:
        return 0.0
    n_axis = grid_factor * 2 * _effective_band(modes)
    blocks = len(np.unique(dyadic_block(modes)))
    return float(n_axis) ** modes.shape[1] * blocks


def besov_norm(coeffs: Coeffs, s: float, grid_factor: int = 4, n_axis: Optional[int] = None) -> float:
    """``sup_j 2^(js) max_x |P_j u(x)|`` with sharp dyadic projections.

    The grid has ``grid_factor * 2 * N`` points per axis, ``N`` being the
    smallest power of two with ``max |k_i| < 2N``, so no mode aliases.
    """
    if grid_factor < 4:
        raise ValueError("grid_factor must be >= 4")
    modes, values = as_arrays(coeffs)
    if len(values) == 0:
        return 0.0
    if n_axis is None:
        n_axis = grid_factor * 2 * _effective_band(modes)
    blocks = dyadic_block(modes)
    best = 0.0
    for j in np.unique(blocks):
        sel = blocks == j
        u = synthesize(modes[sel], values[sel], n_axis)
        best = max(best, 2.0 ** (float(j) * float(s)) * float(np.abs(u).max()))
    return best


def embedding_constant(modes: np.ndarray) -> float:
    """``C`` with ``||u||_{B^s} <= C ||u||_{H^{s'}}`` for ``s' >= max(0, s + d/2)``.

    Cauchy-Schwarz on block ``j`` gives ``max |P_j u| <= sqrt(#block) (sum |c|^2)^(1/2)``,
    and ``<k> >= 2^j`` there.
    """
    modes = np.asarray(modes, dtype=np.int64)
    if len(modes) == 0:
        return 0.0
    d = modes.shape[1]
    blocks = dyadic_block(modes)
    worst = 0.0
    for j in np.unique(blocks):
        count = int(np.sum(blocks == j))
        worst = max(worst, np.sqrt(count / 2.0 ** (float(j) * d)))
    return float(worst)
