"""Single-time norms on spectral fields.

Frequency-side norms use the lattice quadrature sum |.| * dxi, physical-side
norms use sum |.| * dx; the exponents 1 and infinity fall back to plain sums
and maxima.  numpy's pairwise summation keeps the quadratures deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .spectral import (
    SpectralField,
    dyadic_block_range,
    dyadic_bump,
    riesz_weights,
)


def holder_conjugate(r: float) -> float:
    """r' with 1/r + 1/r' = 1; the conventions 1' = inf and inf' = 1."""
    if not (1.0 <= r or r == math.inf):
        raise ValueError(f"exponent must lie in [1, inf], got {r}")
    if r == 1.0:
        return math.inf
    if r == math.inf:
        return 1.0
    return r / (r - 1.0)


def weighted_power_sum(magnitudes: np.ndarray, weight: float, p: float) -> float:
    """(sum |a|^p * weight)^(1/p), with p = inf meaning the maximum."""
    if p == math.inf:
        return float(np.max(magnitudes)) if magnitudes.size else 0.0
    if p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    with np.errstate(over="ignore"):
        total = float(np.sum(magnitudes ** p) * weight)
        return total ** (1.0 / p)


def lhat_norm(f: SpectralField, r: float) -> float:
    """Fourier-Lebesgue norm: the L^{r'} lattice norm of the coefficients."""
    rp = holder_conjugate(r)
    return weighted_power_sum(np.abs(f.coeffs), f.grid.dxi, rp)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Homogeneous Sobolev norm (sum |xi|^{2s} |coeff|^2 dxi)^{1/2}.

    The zero mode is excluded for s != 0, matching the Riesz convention.
    """
    w = riesz_weights(f.grid, s)
    return weighted_power_sum(np.abs(w * f.coeffs), f.grid.dxi, 2.0)


def besov_norm(f: SpectralField, s: float, q: float) -> float:
    """Homogeneous Besov norm: l^q over dyadic shells of 2^{ks} ||block_k||_{L^2}.

    Block L^2 norms are evaluated on the frequency side.  An overflowing
    weighted sum reports infinity rather than raising.
    """
    if not (q >= 1.0 or q == math.inf):
        raise ValueError(f"exponent must lie in [1, inf], got {q}")
    mags = np.abs(f.coeffs)
    dxi = f.grid.dxi
    terms = []
    for k in dyadic_block_range(f.grid):
        w = dyadic_bump(f.grid.frequencies / 2.0 ** k)
        block = weighted_power_sum(w * mags, dxi, 2.0)
        if block == 0.0:
            continue
        with np.errstate(over="ignore"):
            terms.append((2.0 ** (k * s)) * block)
    if not terms:
        return 0.0
    arr = np.asarray(terms)
    if not np.all(np.isfinite(arr)):
        return math.inf
    if q == math.inf:
        return float(np.max(arr))
    with np.errstate(over="ignore"):
        total = float(np.sum(arr ** q)) ** (1.0 / q)
    return total if math.isfinite(total) else math.inf


def weighted_norm(f: SpectralField, s: float) -> float:
    """Weighted L^2 norm || |x|^s f ||_{L^2} on the physical lattice.

    For s < 0 the sample at x = 0 is excluded (singular weight); for s >= 0
    it contributes weight |0|^s in the quadrature as usual.
    """
    vals = f.values()
    x = f.grid.points
    if s < 0:
        keep = x != 0.0
        vals, x = vals[keep], x[keep]
    with np.errstate(divide="ignore"):
        w = np.where(x == 0.0, 0.0 if s > 0 else 1.0, np.abs(x) ** s)
    return weighted_power_sum(np.abs(w * vals), f.grid.dx, 2.0)


def lebesgue_norm(f: SpectralField, p: float) -> float:
    """Physical L^p lattice norm, p = inf meaning the max of |f|."""
    if not (p >= 1.0 or p == math.inf):
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return weighted_power_sum(np.abs(f.values()), f.grid.dx, p)


_KINDS = ("lhat", "sobolev", "besov", "weighted", "lebesgue")


@dataclass(frozen=True)
class NormSpec:
    """A named single-time norm with its parameters.

    kind is one of lhat / sobolev / besov / weighted / lebesgue; r holds the
    Lebesgue-type exponent where applicable, s the smoothness or weight
    power, q the Besov summation exponent.
    """

    kind: str
    r: Optional[float] = None
    s: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}, expected one of {_KINDS}")

    @classmethod
    def lhat(cls, r: float) -> "NormSpec":
        return cls("lhat", r=r)

    @classmethod
    def sobolev(cls, s: float) -> "NormSpec":
        return cls("sobolev", s=s)

    @classmethod
    def besov(cls, s: float, q: float) -> "NormSpec":
        return cls("besov", s=s, q=q)

    @classmethod
    def weighted(cls, s: float) -> "NormSpec":
        return cls("weighted", s=s)

    @classmethod
    def lebesgue(cls, p: float) -> "NormSpec":
        return cls("lebesgue", r=p)

    def label(self) -> str:
        params = {k: v for k, v in (("r", self.r), ("s", self.s), ("q", self.q))
                  if v is not None}
        inner = ",".join(f"{k}={v:g}" for k, v in params.items())
        return f"{self.kind}({inner})"


def norm(f: SpectralField, spec: NormSpec) -> float:
    """Evaluate the norm described by spec on the field f."""
    if spec.kind == "lhat":
        if spec.r is None:
            raise ValueError("lhat norm needs the exponent r")
        return lhat_norm(f, spec.r)
    if spec.kind == "sobolev":
        if spec.s is None:
            raise ValueError("sobolev norm needs the smoothness s")
        return sobolev_norm(f, spec.s)
    if spec.kind == "besov":
        if spec.s is None or spec.q is None:
            raise ValueError("besov norm needs both s and q")
        return besov_norm(f, spec.s, spec.q)
    if spec.kind == "weighted":
        if spec.s is None:
            raise ValueError("weighted norm needs the weight power s")
        return weighted_norm(f, spec.s)
    if spec.r is None:
        raise ValueError("lebesgue norm needs the exponent p")
    return lebesgue_norm(f, spec.r)
