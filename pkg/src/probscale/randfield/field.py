"""Gaussian (or deterministic) Fourier data supported on a dyadic band."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..counting import annulus, is_dyadic
from ..exponents import EquationKind
from .rng import complex_gaussians

MAX_BAND = 2_000_000


class DataMode(str, enum.Enum):
    GAUSSIAN = "gaussian"
    ONES = "ones"

    @classmethod
    def parse(cls, value: "str | DataMode") -> "DataMode":
        if isinstance(value, cls):
            return value
        aliases = {"gaussianrandom": "gaussian", "random": "gaussian",
                   "deterministicones": "ones", "deterministic": "ones"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


def bracket(modes: np.ndarray) -> np.ndarray:
    """Japanese bracket ``sqrt(1 + |k|^2)`` row-wise."""
    modes = np.asarray(modes)
    return np.sqrt(1.0 + (modes.astype(np.float64) ** 2).sum(axis=-1))


@dataclass(frozen=True)
class FieldSpec:
    eq: EquationKind
    d: int
    alpha: float
    N: int
    data_mode: DataMode = DataMode.GAUSSIAN
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eq", EquationKind.parse(self.eq))
        object.__setattr__(self, "data_mode", DataMode.parse(self.data_mode))
        if not 1 <= self.d <= 3:
            raise ValueError(f"sampling supports d in [1, 3], got {self.d}")
        if not is_dyadic(self.N) or self.N < 2:
            raise ValueError(f"band N must be a power of two >= 2, got {self.N}")

    @property
    def regularity(self) -> float:
        return float(self.alpha) + 1 - self.d / 2


@dataclass(frozen=True)
class SpectralField:
    """Coefficients ``coeffs[i]`` at lattice vectors ``modes[i]``; zero elsewhere."""

    d: int
    modes: np.ndarray
    coeffs: np.ndarray
    N: int

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(x) for x in k): complex(c) for k, c in zip(self.modes, self.coeffs)}

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.d, self.modes, self.coeffs * factor, self.N)

    @classmethod
    def from_dict(cls, coeffs: Mapping[tuple[int, ...], complex], N: int) -> "SpectralField":
        keys = sorted(coeffs)
        d = len(keys[0]) if keys else 1
        modes = np.array(keys, dtype=np.int64).reshape(-1, d)
        values = np.array([coeffs[k] for k in keys], dtype=np.complex128)
        return cls(d, modes, values, N)


def band_modes(d: int, N: int) -> np.ndarray:
    modes = annulus(d, N)
    if len(modes) > MAX_BAND:
        raise ValueError(f"band of {len(modes)} modes exceeds the sampling guard {MAX_BAND}")
    return modes


def sample_field(spec: FieldSpec) -> SpectralField:
    """Draw ``<k>^(-alpha-1) g_k`` on the band ``N <= |k| < 2N``."""
    modes = band_modes(spec.d, spec.N)
    amp = bracket(modes) ** (-float(spec.alpha) - 1.0)
    if spec.data_mode is DataMode.ONES:
        coeffs = amp.astype(np.complex128)
    else:
        coeffs = amp * complex_gaussians(spec.seed, modes)
    return SpectralField(spec.d, modes, coeffs, spec.N)
