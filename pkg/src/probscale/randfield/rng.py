"""Counter-based Gaussian draws keyed by ``(seed, lattice vector, component)``.

numpy's ``Philox`` is counter-based too, but it cannot be evaluated at an
arbitrary array of keys in one call; the SplitMix64 finaliser below can, so a
coefficient at ``k`` does not depend on which other modes are drawn.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _mix_int(h: int, v: int) -> int:
    return int(splitmix64(np.uint64((h ^ (v & _MASK)) & _MASK)))


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from a tuple of integers, e.g. ``(seed, N, sample)``."""
    h = 0x6A09E667F3BCC908
    for v in parts:
        h = _mix_int(h, int(v))
    return h


def _hash_modes(seed: int, modes: np.ndarray, component: int) -> np.ndarray:
    modes = np.asarray(modes, dtype=np.int64)
    h = np.full(len(modes), np.uint64(int(seed) & _MASK), dtype=np.uint64)
    h = splitmix64(h)
    for j in range(modes.shape[1]):
        h = splitmix64(h ^ modes[:, j].view(np.uint64))
    return splitmix64(h ^ np.uint64(component))


def uniforms(seed: int, modes: np.ndarray, component: int) -> np.ndarray:
    """Uniform draws in the open interval (0, 1), one per mode."""
    h = _hash_modes(seed, modes, component)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def standard_normals(seed: int, modes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two independent standard normals per mode (Box-Muller)."""
    u1 = uniforms(seed, modes, 0)
    u2 = uniforms(seed, modes, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)


def complex_gaussians(seed: int, modes: np.ndarray) -> np.ndarray:
    """Standard complex Gaussians with ``E|g|^2 = 1``."""
    g1, g2 = standard_normals(seed, modes)
    return (g1 + 1j * g2) / np.sqrt(2.0)
