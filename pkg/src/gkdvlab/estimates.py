"""Ensemble ratio checks for the space-time inequalities behind the solver.

Every check has the same shape: draw randomized data, evaluate the left and
right side of one inequality, record the ratio.  A bounded, refinement-stable
max ratio is the numerical surrogate for the existence of a constant; the
reports never claim more than an empirical C at sampling resolution.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .norms import (
    besov_norm,
    holder_conjugate,
    lebesgue_norm,
    lhat_norm,
    sobolev_norm,
    weighted_norm,
    weighted_power_sum,
)
from .solver import (
    ALPHA_LOWER,
    ALPHA_UPPER,
    NonlinearityG,
    aux_smoothness,
    critical_exponent,
    retarded_integral,
)
from .spacetime import TimeTrace, classify_pair, free_evolution, mixed_norm, snorm, xnorm, ynorm
from .spectral import (
    Grid1D,
    SpectralField,
    apply_pointwise_matrix,
    pointwise_product,
    random_band_limited,
    riesz_weights,
)
from .traceio import atomic_write_text, jsonable as _jsonable

ESTIMATE_IDS = (
    "stein_tomas",
    "kenig_ruiz",
    "kato",
    "strichartz",
    "inhom_linf",
    "inhom_xy",
    "interpolation",
    "leibniz",
    "chain_rule",
    "nonlinear_i",
    "nonlinear_ii",
    "inclusion",
    "counterexample",
)

# ids whose data are single fields rather than time traces
_STATIC_IDS = frozenset({"inclusion", "counterexample"})
# ids whose constant may grow with the interval; refinement doubles it once
_WIDEN_IDS = frozenset({"inhom_linf", "inhom_xy"})


@dataclass(frozen=True)
class EstimateSpec:
    """One configured verification run."""

    estimate_id: str
    params: dict = field(default_factory=dict)
    half_length: float = 64.0
    size: int = 256
    interval: Tuple[float, float] = (0.0, 1.0)
    samples_per_unit: int = 128
    ensemble: int = 50
    seed: int = 0
    band: Optional[int] = None
    decays: Tuple[float, ...] = (0.6, 1.0, 1.6)
    amplitude: float = 1.0

    def __post_init__(self):
        if self.estimate_id not in ESTIMATE_IDS:
            known = ", ".join(ESTIMATE_IDS)
            raise ValueError(f"unknown estimate id {self.estimate_id!r}; known ids: {known}")
        if self.ensemble < 1:
            raise ValueError("ensemble must be at least 1")
        a, b = self.interval
        if not b > a:
            raise ValueError(f"empty time interval {self.interval}")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not self.decays:
            raise ValueError("need at least one spectral decay rate")
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "interval", (float(a), float(b)))
        object.__setattr__(self, "decays", tuple(float(d) for d in self.decays))

    def grid(self) -> Grid1D:
        return Grid1D(self.half_length, self.size)

    def resolved_band(self) -> int:
        return self.band if self.band is not None else self.size // 4

    def times(self) -> np.ndarray:
        a, b = self.interval
        m = max(2, int(round((b - a) * self.samples_per_unit)))
        return np.linspace(a, b, m + 1)


@dataclass
class EstimateReport:
    estimate_id: str
    params: dict
    seed: int
    half_length: float
    size: int
    sample_count: int
    ensemble: int
    ratios: List[float]
    max_ratio: float
    mean_ratio: float
    refinement: List[dict]
    samples: List[dict]
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        if not self.refinement:
            raise ValueError("refinement trace must be nonempty")
        if not (self.max_ratio >= self.mean_ratio >= 0.0):
            raise ValueError("ratio statistics out of order")

    def to_dict(self) -> dict:
        # wall_time deliberately left out so reports are byte-reproducible
        doc = {
            "id": self.estimate_id,
            "params": self.params,
            "seed": self.seed,
            "N": self.size,
            "L": self.half_length,
            "M": self.sample_count,
            "ensemble": self.ensemble,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "refinement": self.refinement,
        }
        if self.extras:
            doc["extras"] = self.extras
        return _jsonable(doc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write_csv(self, path) -> None:
        lines = ["sample,decay,ratio"]
        for row in self.samples:
            lines.append(f"{row['sample']},{row['decay']:g},{row['ratio']:.17g}")
        atomic_write_text(path, "\n".join(lines) + "\n")


def _as_extended(value, default: float) -> float:
    """Parse an exponent that may arrive as 'inf' from a config file."""
    if value is None:
        return default
    if isinstance(value, str):
        return float(value)
    return float(value)


def _scaled(f: SpectralField, amplitude: float) -> SpectralField:
    if amplitude == 1.0:
        return f
    return SpectralField(f.grid, amplitude * f.coeffs, f.is_real)


def _weighted_trace(trace: TimeTrace, s: float) -> TimeTrace:
    if s == 0.0:
        return trace
    w = riesz_weights(trace.grid, s)
    return TimeTrace(trace.grid, trace.times, trace.coeffs * w[None, :], trace.is_real)


def _sup_lhat(trace: TimeTrace, r: float) -> float:
    rp = holder_conjugate(r)
    mags = np.abs(trace.coeffs)
    best = 0.0
    for row in mags:
        best = max(best, weighted_power_sum(row, trace.grid.dxi, rp))
    return best


def _each_sample(spec: EstimateSpec):
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.ensemble)
    for i, child in enumerate(seeds):
        yield i, spec.decays[i % len(spec.decays)], child


def _ensemble(spec: EstimateSpec, one: Callable) -> Tuple[List[float], List[dict], dict]:
    grid = spec.grid()
    times = spec.times()
    band = spec.resolved_band()
    ratios, rows = [], []
    for i, decay, child in _each_sample(spec):
        num, den = one(grid, times, band, decay, child)
        if not den > 0:
            raise ArithmeticError(f"degenerate right-hand side for sample {i}")
        ratio = float(num / den)
        ratios.append(ratio)
        rows.append({"sample": i, "decay": decay, "ratio": ratio})
    return ratios, rows, {}


def _datum(grid, band, decay, seed, amplitude) -> SpectralField:
    return _scaled(random_band_limited(grid, decay=decay, band=band, seed=seed), amplitude)


# ---------------------------------------------------------------------------
# free-propagator bounds


def _check_stein_tomas(params: dict) -> dict:
    r = float(params.get("r", 6.0))
    if not r > 4.0:
        raise ValueError(f"the restriction-type space-time bound needs r > 4, got r = {r:g}")
    return {"r": r}


def _run_stein_tomas(spec, rp):
    r = rp["r"]

    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        tr = _weighted_trace(free_evolution(f, times), 1.0 / r)
        return mixed_norm(tr, r, r, "x_outer"), lhat_norm(f, r / 3.0)

    return _ensemble(spec, one)


def _check_kenig_ruiz(params: dict) -> dict:
    return {}


def _run_kenig_ruiz(spec, rp):
    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        tr = _weighted_trace(free_evolution(f, times), -0.25)
        # the time sup is a sample maximum, hence a certified lower bound
        return mixed_norm(tr, 4.0, math.inf, "x_outer"), lebesgue_norm(f, 2.0)

    return _ensemble(spec, one)


def _check_kato(params: dict) -> dict:
    q = _as_extended(params.get("q"), 2.0)
    if not (2.0 <= q):
        raise ValueError(f"the local-smoothing bound needs q in [2, inf], got q = {q:g}")
    return {"q": q}


def _run_kato(spec, rp):
    q = rp["q"]
    s = 0.0 if math.isinf(q) else 2.0 / q

    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        tr = _weighted_trace(free_evolution(f, times), s)
        return mixed_norm(tr, math.inf, q, "x_outer"), lhat_norm(f, q)

    return _ensemble(spec, one)


def _check_strichartz(params: dict) -> dict:
    s = float(params.get("s", 1.0 / 6.0))
    r = float(params.get("r", 2.0))
    cls = classify_pair(s, r)
    if not cls.acceptable:
        raise ValueError(
            f"(s, r) = ({s:g}, {r:g}) is outside the admissible smoothness and "
            "integrability window for the homogeneous space-time bound"
        )
    p, q = cls.exponents
    return {"s": s, "r": r, "p": float(p), "q": float(q), "boundary": cls.boundary}


def _run_strichartz(spec, rp):
    s, r, p, q = rp["s"], rp["r"], rp["p"], rp["q"]

    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        tr = _weighted_trace(free_evolution(f, times), s)
        return mixed_norm(tr, p, q, "x_outer"), lhat_norm(f, r)

    ratios, rows, _ = _ensemble(spec, one)
    return ratios, rows, {"exponents": {"p": p, "q": q}, "boundary_pair": rp["boundary"]}


# ---------------------------------------------------------------------------
# retarded (Duhamel) bounds


def _duhamel_exponents(s: float, inv_rho: float) -> Tuple[float, float]:
    invp = 0.4 * inv_rho - 0.2 * s
    invq = 0.4 * s + 0.2 * inv_rho
    return invp, invq


def _require_duhamel_window(tag: str, s: float, inv_rho: float) -> Tuple[float, float]:
    invp, invq = _duhamel_exponents(s, inv_rho)
    if not (0.0 <= invp < 0.25 and 0.0 <= invq < 0.5 - invp):
        raise ValueError(
            f"{tag}: derived exponents need 0 <= 1/p < 1/4 and 0 <= 1/q < 1/2 - 1/p, "
            f"got 1/p = {invp:g}, 1/q = {invq:g}"
        )
    p = math.inf if invp == 0.0 else 1.0 / invp
    q = math.inf if invq == 0.0 else 1.0 / invq
    return p, q


def _dual(p: float) -> float:
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_inhom_linf(params: dict) -> dict:
    r = float(params.get("r", 2.0))
    if not (4.0 / 3.0 < r < 4.0):
        raise ValueError(f"the retarded bounds need 4/3 < r < 4, got r = {r:g}")
    s2 = float(params.get("s2", 0.25))
    rprime = holder_conjugate(r)
    p2, q2 = _require_duhamel_window("forcing side", s2, 1.0 / rprime)
    return {"r": r, "s2": s2, "p2": p2, "q2": q2}


def _check_inhom_xy(params: dict) -> dict:
    rp = _check_inhom_linf(params)
    s1 = float(params.get("s1", 0.25))
    p1, q1 = _require_duhamel_window("output side", s1, 1.0 / rp["r"])
    rp.update({"s1": s1, "p1": p1, "q1": q1})
    return rp


def _forcing_trace(spec, grid, times, band, decay, child) -> TimeTrace:
    """Space-time forcing shaped as d_x of a modulated free wave.

    Band-limited with an empty zero mode by construction, so negative
    smoothing weights act on it without ambiguity.
    """
    kids = child.spawn(2)
    g = random_band_limited(grid, decay=decay, band=band, seed=kids[0])
    rng = np.random.default_rng(kids[1])
    omega = rng.uniform(1.0, 4.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    envelope = 1.0 + 0.5 * np.sin(omega * times + phase)
    wave = free_evolution(g, times)
    rows = (1j * grid.frequencies)[None, :] * (envelope[:, None] * wave.coeffs)
    return TimeTrace(grid, times, spec.amplitude * rows, is_real=True)


def _run_inhom_linf(spec, rp):
    r, s2 = rp["r"], rp["s2"]
    pd, qd = _dual(rp["p2"]), _dual(rp["q2"])

    def one(grid, times, band, decay, child):
        forcing = _forcing_trace(spec, grid, times, band, decay, child)
        ret = retarded_integral(forcing, times[0])
        num = _sup_lhat(ret, r)
        den = mixed_norm(_weighted_trace(forcing, -s2), pd, qd, "x_outer")
        return num, den

    return _ensemble(spec, one)


def _run_inhom_xy(spec, rp):
    r, s1, s2 = rp["r"], rp["s1"], rp["s2"]
    p1, q1 = rp["p1"], rp["q1"]
    pd, qd = _dual(rp["p2"]), _dual(rp["q2"])

    def one(grid, times, band, decay, child):
        forcing = _forcing_trace(spec, grid, times, band, decay, child)
        ret = retarded_integral(forcing, times[0])
        num = mixed_norm(_weighted_trace(ret, s1), p1, q1, "x_outer")
        den = mixed_norm(_weighted_trace(forcing, -s2), pd, qd, "x_outer")
        return num, den

    return _ensemble(spec, one)


# ---------------------------------------------------------------------------
# calculus inequalities on traces


def _require_open_exponent(tag: str, value: float) -> float:
    if not (1.0 < value < math.inf):
        raise ValueError(f"{tag} must lie strictly between 1 and infinity, got {value:g}")
    return float(value)


def _check_interpolation(params: dict) -> dict:
    theta = float(params.get("theta", 0.5))
    if not (0.0 < theta < 1.0):
        raise ValueError(f"interpolation weight must satisfy 0 < theta < 1, got {theta:g}")
    s1 = float(params.get("s1", 0.0))
    s2 = float(params.get("s2", 1.0))
    p1 = _require_open_exponent("p1", float(params.get("p1", 4.0)))
    q1 = _require_open_exponent("q1", float(params.get("q1", 4.0)))
    p2 = _require_open_exponent("p2", float(params.get("p2", 8.0)))
    q2 = _require_open_exponent("q2", float(params.get("q2", 8.0)))
    p = 1.0 / (theta / p1 + (1.0 - theta) / p2)
    q = 1.0 / (theta / q1 + (1.0 - theta) / q2)
    s = theta * s1 + (1.0 - theta) * s2
    return {"theta": theta, "s1": s1, "s2": s2, "p1": p1, "q1": q1,
            "p2": p2, "q2": q2, "p": p, "q": q, "s": s}


def _run_interpolation(spec, rp):
    theta = rp["theta"]

    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        u = free_evolution(f, times)
        num = mixed_norm(_weighted_trace(u, rp["s"]), rp["p"], rp["q"], "x_outer")
        den = (
            mixed_norm(_weighted_trace(u, rp["s1"]), rp["p1"], rp["q1"], "x_outer") ** theta
            * mixed_norm(_weighted_trace(u, rp["s2"]), rp["p2"], rp["q2"], "x_outer") ** (1.0 - theta)
        )
        return num, den

    return _ensemble(spec, one)


def _check_leibniz(params: dict) -> dict:
    s = float(params.get("s", 0.5))
    if s < 0.0:
        raise ValueError(f"the product rule needs s >= 0, got s = {s:g}")
    rp = {"s": s}
    for name, default in (("p", 2.0), ("q", 2.0), ("p1", 4.0), ("q1", 4.0),
                          ("p2", 4.0), ("q2", 4.0), ("p3", 4.0), ("q3", 4.0),
                          ("p4", 4.0), ("q4", 4.0)):
        rp[name] = _require_open_exponent(name, float(params.get(name, default)))
    for a, b in (("p1", "p2"), ("p3", "p4")):
        if abs(1.0 / rp[a] + 1.0 / rp[b] - 1.0 / rp["p"]) > 1e-12:
            raise ValueError(f"split 1/{a} + 1/{b} must equal 1/p")
    for a, b in (("q1", "q2"), ("q3", "q4")):
        if abs(1.0 / rp[a] + 1.0 / rp[b] - 1.0 / rp["q"]) > 1e-12:
            raise ValueError(f"split 1/{a} + 1/{b} must equal 1/q")
    return rp


def _product_trace(u: TimeTrace, v: TimeTrace, pad: int = 2) -> TimeTrace:
    rows = np.empty_like(u.coeffs)
    for m in range(u.coeffs.shape[0]):
        rows[m] = pointwise_product(u.field(m), v.field(m), pad=pad).coeffs
    return TimeTrace(u.grid, u.times, rows, u.is_real and v.is_real)


def _run_leibniz(spec, rp):
    s = rp["s"]

    def one(grid, times, band, decay, child):
        kids = child.spawn(2)
        f = _datum(grid, band, decay, kids[0], spec.amplitude)
        g = _datum(grid, band, decay, kids[1], spec.amplitude)
        u, v = free_evolution(f, times), free_evolution(g, times)
        prod = _product_trace(u, v)
        num = mixed_norm(_weighted_trace(prod, s), rp["p"], rp["q"], "x_outer")
        den = (
            mixed_norm(_weighted_trace(u, s), rp["p1"], rp["q1"], "x_outer")
            * mixed_norm(v, rp["p2"], rp["q2"], "x_outer")
            + mixed_norm(u, rp["p3"], rp["q3"], "x_outer")
            * mixed_norm(_weighted_trace(v, s), rp["p4"], rp["q4"], "x_outer")
        )
        return num, den

    return _ensemble(spec, one)


def _check_chain_rule(params: dict) -> dict:
    mu = float(params.get("mu", 5.0))
    if not mu > 1.0:
        raise ValueError(f"the chain rule needs mu > 1, got mu = {mu:g}")
    s = float(params.get("s", 0.5))
    if not (0.0 < s < mu):
        raise ValueError(f"the chain rule needs s in (0, mu), got s = {s:g}")
    p1 = _require_open_exponent("p1", float(params.get("p1", 16.0)))
    q1 = _require_open_exponent("q1", float(params.get("q1", 16.0)))
    p2 = _require_open_exponent("p2", float(params.get("p2", 4.0)))
    q2 = _require_open_exponent("q2", float(params.get("q2", 4.0)))
    invp = (mu - 1.0) / p1 + 1.0 / p2
    invq = (mu - 1.0) / q1 + 1.0 / q2
    if not (0.0 < invp < 1.0 and 0.0 < invq < 1.0):
        raise ValueError(
            "derived exponents leave the open (1, inf) range: "
            f"1/p = {invp:g}, 1/q = {invq:g}"
        )
    return {"mu": mu, "s": s, "p1": p1, "q1": q1, "p2": p2, "q2": q2,
            "p": 1.0 / invp, "q": 1.0 / invq}


def _run_chain_rule(spec, rp):
    mu, s = rp["mu"], rp["s"]
    G = NonlinearityG(alpha=mu, mu=1.0)
    lip = lip_norm_estimate(G, mu)

    def one(grid, times, band, decay, child):
        f = _datum(grid, band, decay, child, spec.amplitude)
        u = free_evolution(f, times)
        # degree-5 products need the wider dealias margin
        gu_rows = apply_pointwise_matrix(u.coeffs, grid, G.apply_values, pad=3, real=True)
        gu = TimeTrace(grid, times, gu_rows, is_real=True)
        num = mixed_norm(_weighted_trace(gu, s), rp["p"], rp["q"], "x_outer")
        den = (
            lip
            * mixed_norm(u, rp["p1"], rp["q1"], "x_outer") ** (mu - 1.0)
            * mixed_norm(_weighted_trace(u, s), rp["p2"], rp["q2"], "x_outer")
        )
        return num, den

    ratios, rows, _ = _ensemble(spec, one)
    return ratios, rows, {"lip_bound": lip}


# ---------------------------------------------------------------------------
# source-term bounds used by the contraction argument


def _check_nonlinear(params: dict) -> dict:
    alpha = float(params.get("alpha", 5.0))
    if not (ALPHA_LOWER < alpha < ALPHA_UPPER):
        raise ValueError(
            f"the source-term bounds need 21/5 < alpha < 23/3, got alpha = {alpha:g}"
        )
    s = float(params.get("s", aux_smoothness(alpha)))
    r = float(params.get("r", critical_exponent(alpha)))
    cls = classify_pair(s, r)
    if not (cls.acceptable and cls.conjugate_acceptable):
        raise ValueError(
            f"(s, r) = ({s:g}, {r:g}) must be usable on both sides of the duality "
            "(acceptable and conjugate-acceptable)"
        )
    return {"alpha": alpha, "s": s, "r": r, "boundary": cls.boundary}


def _sample_trace(spec, grid, times, band, decay, seed) -> TimeTrace:
    return free_evolution(_datum(grid, band, decay, seed, spec.amplitude), times)


def _apply_power(trace: TimeTrace, G: NonlinearityG) -> np.ndarray:
    return apply_pointwise_matrix(trace.coeffs, trace.grid, G.apply_values, pad=3, real=True)


def _run_nonlinear_i(spec, rp):
    alpha, s, r = rp["alpha"], rp["s"], rp["r"]
    rc = critical_exponent(alpha)
    G = NonlinearityG(alpha=alpha, mu=1.0)

    def one(grid, times, band, decay, child):
        u = _sample_trace(spec, grid, times, band, decay, child)
        gu = TimeTrace(grid, times, _apply_power(u, G), is_real=True)
        num = ynorm(gu, s, r)
        den = snorm(u, rc) ** (alpha - 1.0) * xnorm(u, s, r)
        return num, den

    ratios, rows, _ = _ensemble(spec, one)
    return ratios, rows, {"boundary_pair": rp["boundary"]}


def _run_nonlinear_ii(spec, rp):
    alpha, s, r = rp["alpha"], rp["s"], rp["r"]
    rc = critical_exponent(alpha)
    G = NonlinearityG(alpha=alpha, mu=1.0)

    def one(grid, times, band, decay, child):
        kids = child.spawn(2)
        u = _sample_trace(spec, grid, times, band, decay, kids[0])
        v = _sample_trace(spec, grid, times, band, decay, kids[1])
        diff = TimeTrace(grid, times, _apply_power(u, G) - _apply_power(v, G), is_real=True)
        num = ynorm(diff, s, r)
        uv = TimeTrace(grid, times, u.coeffs - v.coeffs, is_real=True)
        sx = snorm(u, rc) + snorm(v, rc)
        den = (
            (xnorm(u, s, r) + xnorm(v, s, r)) * sx ** (alpha - 2.0) * snorm(uv, rc)
            + sx ** (alpha - 1.0) * xnorm(uv, s, r)
        )
        return num, den

    ratios, rows, _ = _ensemble(spec, one)
    return ratios, rows, {"boundary_pair": rp["boundary"]}


# ---------------------------------------------------------------------------
# embedding checks and the sharpness families


_INCLUSION_CASES = ("hausdorff_young", "weighted", "besov")


def _check_inclusion(params: dict) -> dict:
    case = str(params.get("case", "hausdorff_young"))
    if case not in _INCLUSION_CASES:
        raise ValueError(f"inclusion case must be one of {_INCLUSION_CASES}, got {case!r}")
    r = _as_extended(params.get("r"), 4.0)
    if case == "weighted":
        if not (1.0 < r < math.inf):
            raise ValueError(f"the weighted embedding needs 1 < r < inf, got r = {r:g}")
    elif not (1.0 <= r <= math.inf):
        raise ValueError(f"need 1 <= r <= inf, got r = {r:g}")
    return {"case": case, "r": r}


def _run_inclusion(spec, rp):
    case, r = rp["case"], rp["r"]
    grid = spec.grid()
    band = spec.resolved_band()
    small = r <= 2.0
    ratios, rows = [], []
    for i, decay, child in _each_sample(spec):
        f = _datum(grid, band, decay, child, spec.amplitude)
        if case == "hausdorff_young":
            num, den = (lhat_norm(f, r), lebesgue_norm(f, r)) if small \
                else (lebesgue_norm(f, r), lhat_norm(f, r))
        elif case == "weighted":
            s = 1.0 / r - 0.5
            num, den = (lhat_norm(f, r), weighted_norm(f, s)) if small \
                else (weighted_norm(f, s), lhat_norm(f, r))
        else:
            s = 0.5 - 1.0 / r
            q = holder_conjugate(r)
            num, den = (besov_norm(f, s, q), lhat_norm(f, r)) if small \
                else (lhat_norm(f, r), besov_norm(f, s, q))
        ratio = float(num / den)
        ratios.append(ratio)
        rows.append({"sample": i, "decay": decay, "ratio": ratio})
    direction = "into_fourier_lebesgue" if small else "out_of_fourier_lebesgue"
    return ratios, rows, {"case": case, "direction": direction}


_FAMILY_ALIASES = {"fn": "sharp_band", "gn": "log_tail"}


def _check_counterexample(params: dict) -> dict:
    family = str(params.get("family", "sharp_band"))
    family = _FAMILY_ALIASES.get(family, family)
    if family not in ("sharp_band", "log_tail"):
        raise ValueError(
            f"family must be sharp_band (alias fn) or log_tail (alias gn), got {family!r}"
        )
    r = float(params.get("r", 4.0))
    if not r > 2.0:
        raise ValueError(f"the sharpness families separate the spaces only for r > 2, got r = {r:g}")
    rp: Dict[str, object] = {"family": family, "r": r}
    if family == "sharp_band":
        ns = tuple(int(n) for n in params.get("n", (4, 16, 64)))
        # 1/8 frequency spacing is an exact binary float, so the unit band
        # holds exactly 8 lattice points and the lattice norm is exact
        rp["half_length"] = float(params.get("half_length", 8.0 * math.pi))
        rp["size"] = int(params.get("size", 2048))
    else:
        ns = tuple(int(n) for n in params.get("n", (8, 64, 512)))
        if any(n < 3 for n in ns):
            raise ValueError("the slow-tail family is defined for n >= 3")
        inv_rprime = 1.0 - 1.0 / r
        p = float(params.get("p", 0.5 * (0.5 + inv_rprime)))
        if not (0.5 < p < inv_rprime):
            raise ValueError(
                f"the slow-tail family needs p in (1/2, 1 - 1/r) = (0.5, {inv_rprime:g}), "
                f"got p = {p:g}"
            )
        rp["p"] = p
        rp["half_length"] = float(params.get("half_length", 4096.0 * math.pi))
        rp["size"] = int(params.get("size", 8192))
    if any(n <= 0 for n in ns) or list(ns) != sorted(set(ns)):
        raise ValueError("band indices must be positive and strictly increasing")
    rp["ns"] = ns
    return rp


def _run_counterexample(spec, rp):
    family, r = rp["family"], rp["r"]
    grid = Grid1D(rp["half_length"], rp["size"])
    xi = grid.frequencies
    s = 0.5 - 1.0 / r
    ratios, rows, table = [], [], []
    for n in rp["ns"]:
        if family == "sharp_band":
            if n + 1 > grid.max_frequency:
                raise ValueError(f"band [{n}, {n + 1}) exceeds the resolved frequencies")
            coeffs = ((xi >= n) & (xi < n + 1)).astype(np.complex128)
            predicted_lhat = 1.0
            predicted_sob = math.sqrt(
                ((n + 1.0) ** (2 * s + 1) - float(n) ** (2 * s + 1)) / (2 * s + 1)
            )
        else:
            lo = 1.0 / n
            if lo < grid.dxi:
                raise ValueError(f"band edge 1/{n} falls below the frequency spacing")
            p = rp["p"]
            rprime = holder_conjugate(r)
            support = (xi >= lo) & (xi <= 0.5)
            coeffs = np.zeros(grid.size, dtype=np.complex128)
            coeffs[support] = xi[support] ** (-1.0 / rprime) * np.abs(np.log(xi[support])) ** (-p)
            a, b = math.log(2.0), math.log(float(n))
            predicted_sob = math.sqrt((a ** (1 - 2 * p) - b ** (1 - 2 * p)) / (2 * p - 1))
            # p < 1/r' guarantees p * r' < 1, the divergent regime
            prp = p * rprime
            predicted_lhat = ((b ** (1 - prp) - a ** (1 - prp)) / (1 - prp)) ** (1.0 / rprime)
        f = SpectralField(grid, spec.amplitude * coeffs, is_real=False)
        lh = lhat_norm(f, r) / spec.amplitude
        sob = sobolev_norm(f, s) / spec.amplitude
        ratio = sob / predicted_sob
        ratios.append(float(ratio))
        rows.append({"sample": n, "decay": 0.0, "ratio": float(ratio)})
        table.append({"n": n, "lhat": lh, "sobolev": sob,
                      "predicted_lhat": predicted_lhat, "predicted_sobolev": predicted_sob})
    extras = {"family": family, "smoothness": s, "table": table,
              "half_length": rp["half_length"], "size": rp["size"]}
    if family == "log_tail":
        extras["p"] = rp["p"]
    return ratios, rows, extras


# ---------------------------------------------------------------------------
# Lip-class membership certificate


def _power_derivative(alpha: float, j: int, z: np.ndarray) -> np.ndarray:
    coeff = 1.0
    for i in range(j):
        coeff *= alpha - i
    mag = coeff * np.abs(z) ** (alpha - j)
    # the map is odd, so even-order derivatives carry the sign of z
    return mag * np.sign(z) if j % 2 == 0 else mag


def _fd_derivative(func, j: int, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    if j == 0:
        return func(z)
    acc = np.zeros_like(z, dtype=float)
    for k in range(j + 1):
        acc += (-1.0) ** k * math.comb(j, k) * func(z + (0.5 * j - k) * h)
    return acc / h ** j


def lip_norm_estimate(G: NonlinearityG, mu: float, z_max: float = 10.0,
                      samples: int = 200) -> float:
    """Sampled upper envelope certifying membership in the Lip class of order mu.

    Writes mu = N + beta with beta in (0, 1], evaluates the growth quotients
    |G^(j)(z)| / |z|^(mu-j) for j = 0..N on a signed log-spaced grid, and
    the beta-Holder quotient of G^(N) over all sampled pairs; returns the
    maximum.  The grid deepens toward zero as samples grows, so a genuinely
    unbounded quotient shows up as growth under refinement rather than a
    crash.

    Derivatives are exact for the shipped odd-power map; anything else falls
    back to central differences with step 1e-5 * max(|z|, 1), which is
    unreliable beyond second order.
    """
    if not mu > 0:
        raise ValueError(f"membership order must be positive, got {mu:g}")
    if samples < 8:
        raise ValueError("need at least 8 sample points")
    n_whole = math.ceil(mu) - 1
    beta = mu - n_whole
    decades = 0.03 * samples
    mags = z_max * np.logspace(-decades, 0.0, samples // 2)
    z = np.concatenate([-mags[::-1], mags])
    analytic = (
        G.rule == "power"
        and abs(G.alpha - round(G.alpha)) < 1e-12
        and int(round(G.alpha)) % 2 == 1
    )
    h = 1e-5 * np.maximum(np.abs(z), 1.0)
    best = 0.0
    deriv = None
    for j in range(n_whole + 1):
        deriv = _power_derivative(G.alpha, j, z) if analytic \
            else np.asarray(_fd_derivative(G.apply_values, j, z, h), dtype=float)
        if not np.all(np.isfinite(deriv)):
            raise ValueError("nonlinearity produced non-finite derivative samples")
        best = max(best, float(np.max(np.abs(deriv) / np.abs(z) ** (mu - j))))
    gap = np.abs(z[:, None] - z[None, :])
    num = np.abs(deriv[:, None] - deriv[None, :])
    mask = gap > 0
    best = max(best, float(np.max(num[mask] / gap[mask] ** beta)))
    return best


# ---------------------------------------------------------------------------
# dispatch


_RUNNERS: Dict[str, Tuple[Callable, Callable]] = {
    "stein_tomas": (_check_stein_tomas, _run_stein_tomas),
    "kenig_ruiz": (_check_kenig_ruiz, _run_kenig_ruiz),
    "kato": (_check_kato, _run_kato),
    "strichartz": (_check_strichartz, _run_strichartz),
    "inhom_linf": (_check_inhom_linf, _run_inhom_linf),
    "inhom_xy": (_check_inhom_xy, _run_inhom_xy),
    "interpolation": (_check_interpolation, _run_interpolation),
    "leibniz": (_check_leibniz, _run_leibniz),
    "chain_rule": (_check_chain_rule, _run_chain_rule),
    "nonlinear_i": (_check_nonlinear, _run_nonlinear_i),
    "nonlinear_ii": (_check_nonlinear, _run_nonlinear_ii),
    "inclusion": (_check_inclusion, _run_inclusion),
    "counterexample": (_check_counterexample, _run_counterexample),
}


def _stats(ratios: List[float]) -> dict:
    return {"max_ratio": float(max(ratios)), "mean_ratio": float(np.mean(ratios))}


def verify(spec: EstimateSpec) -> EstimateReport:
    """Run one configured check plus its refinement trace.

    Deterministic given (spec, seed): all randomness flows through spawned
    child seeds, one per sample, so growing the ensemble keeps the original
    samples and grid refinement re-draws the identical band-limited data.
    """
    started = time.perf_counter()
    checker, runner = _RUNNERS[spec.estimate_id]
    resolved = checker(spec.params)
    ratios, rows, extras = runner(spec, resolved)
    if spec.estimate_id == "counterexample":
        entries = [{"size": int(resolved["size"]), "ensemble": len(ratios), **_stats(ratios)}]
    else:
        entries = [{"size": spec.size, "ensemble": spec.ensemble, **_stats(ratios)}]
    if spec.estimate_id == "counterexample":
        finer = dict(resolved)
        finer["half_length"] = 2.0 * resolved["half_length"]
        finer["size"] = 2 * resolved["size"]
        fine_ratios, _, _ = runner(spec, finer)
        entries.append({"size": finer["size"], "ensemble": len(fine_ratios),
                        **_stats(fine_ratios)})
    else:
        fine = replace(spec, size=2 * spec.size, band=spec.resolved_band())
        fine_ratios, _, _ = runner(fine, resolved)
        entries.append({"size": fine.size, "ensemble": fine.ensemble, **_stats(fine_ratios)})
        big = replace(spec, ensemble=2 * spec.ensemble)
        big_ratios, _, _ = runner(big, resolved)
        entries.append({"size": big.size, "ensemble": big.ensemble, **_stats(big_ratios)})
        if spec.estimate_id in _WIDEN_IDS:
            a, b = spec.interval
            wide = replace(spec, interval=(a, a + 2.0 * (b - a)))
            wide_ratios, _, _ = runner(wide, resolved)
            entries.append({"size": wide.size, "ensemble": wide.ensemble,
                            "interval": [a, a + 2.0 * (b - a)], **_stats(wide_ratios)})
    report = EstimateReport(
        estimate_id=spec.estimate_id,
        params=dict(resolved),
        seed=spec.seed,
        half_length=spec.half_length if spec.estimate_id != "counterexample"
        else float(resolved["half_length"]),
        size=spec.size if spec.estimate_id != "counterexample" else int(resolved["size"]),
        sample_count=1 if spec.estimate_id in _STATIC_IDS else len(spec.times()),
        ensemble=spec.ensemble if spec.estimate_id != "counterexample" else len(ratios),
        ratios=ratios,
        max_ratio=_stats(ratios)["max_ratio"],
        mean_ratio=_stats(ratios)["mean_ratio"],
        refinement=entries,
        samples=rows,
        extras=extras,
    )
    report.wall_time = time.perf_counter() - started
    return report
