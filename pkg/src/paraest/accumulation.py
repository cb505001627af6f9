"""L^p-in-time accumulation of estimator terms: control coefficients,
incremental updates, weighted minima and the assembled total estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import ConstantsConfig, StepEstimate
from .timestepping import SchemeKind

INF = math.inf
DEFAULT_PSET = (1.0, 2.0, 4.0, 8.0, 16.0, INF)

# admissible p-domain per term: terms tested against the energy norm carry
# the sqrt(c_{p/2}) weight and allow p >= 2 only
DOMAIN_L1 = "p>=1"
DOMAIN_L2 = "p>=2"

TERM_DOMAINS = {
    SchemeKind.BACKWARD_EULER: {"space": DOMAIN_L1, "time": DOMAIN_L1,
                                "data_time": DOMAIN_L1, "data_space": DOMAIN_L2},
    SchemeKind.CRANK_NICOLSON: {"space": DOMAIN_L1, "time": DOMAIN_L2,
                                "data_time": DOMAIN_L1, "data_space": DOMAIN_L2},
}

STRATEGIES = ("min", "l1", "l2", "linf")


def parse_pset(text: str) -> tuple[float, ...]:
    vals = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        vals.append(INF if tok in ("inf", "infinity") else float(tok))
    pset = tuple(sorted(set(vals)))
    if any(p < 1 for p in pset):
        raise ValueError("all exponents must be >= 1")
    return pset


def accumulation_coefficient(p: float, r: float, alpha: float) -> float:
    """c_{p,r} = ||e^{alpha (s-r)}||_{L^q(0,r)} with 1/p + 1/q = 1."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if p < 1:
        raise ValueError("p must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if p == 1:
        return 1.0
    q = 1.0 if p == INF else p / (p - 1.0)
    if alpha == 0.0:
        return r ** (1.0 / q)
    x = q * alpha * r
    # -expm1(-x) = 1 - e^{-x}, accurate for small x
    return (-math.expm1(-x) / (q * alpha)) ** (1.0 / q)


def lp_update(value: float, p: float, F_n: float, tau: float) -> float:
    """One-shot update of ||F||_{L^p(0,t)}; prefer LpAccumulator for streams."""
    if F_n < 0 or tau <= 0:
        raise ValueError("need F_n >= 0 and tau > 0")
    if p == INF:
        return max(value, F_n)
    return (value ** p + tau * F_n ** p) ** (1.0 / p)


class LpAccumulator:
    """Running ||F||_{L^p(0,t)} for every p in the set; the p-th power is
    kept internally so the update is exact."""

    def __init__(self, pset: tuple[float, ...] = DEFAULT_PSET):
        self.pset = pset
        self._powers = {p: 0.0 for p in pset if p != INF}
        self._max = 0.0

    def update(self, F_n: float, tau: float) -> None:
        if F_n < 0 or tau <= 0:
            raise ValueError("need F_n >= 0 and tau > 0")
        for p in self._powers:
            self._powers[p] += tau * F_n ** p
        if F_n > self._max:
            self._max = F_n

    def value(self, p: float) -> float:
        if p == INF:
            return self._max
        return self._powers[p] ** (1.0 / p)


def domain_weight(p: float, domain: str, r: float, alpha: float) -> float:
    """Accumulation weight: c_{p,r} on [1,inf], sqrt(c_{p/2,r}) on [2,inf]."""
    if domain == DOMAIN_L1:
        return accumulation_coefficient(p, r, alpha)
    half = INF if p == INF else p / 2.0
    return math.sqrt(accumulation_coefficient(half, r, alpha))


def admissible(p: float, domain: str) -> bool:
    return p >= 2.0 if domain == DOMAIN_L2 else True


def least_admissible(domain: str) -> float:
    return 2.0 if domain == DOMAIN_L2 else 1.0


def weighted_min_accumulation(acc: LpAccumulator, domain: str, r: float,
                              alpha: float, use_weights: bool = True
                              ) -> tuple[float, float]:
    """Minimum over the p-set of weight * ||F||_{L^p}; ties go to larger p."""
    best_val, best_p = INF, INF
    for p in acc.pset:
        if not admissible(p, domain):
            continue
        w = domain_weight(p, domain, r, alpha) if use_weights else 1.0
        val = w * acc.value(p)
        if val <= best_val:
            best_val, best_p = val, p
    return best_val, best_p


@dataclass
class AccumulatorState:
    """Running accumulations of the four stream terms plus the L-infinity
    tracked elliptic / time-reconstruction terms."""

    scheme: SchemeKind
    pset: tuple[float, ...] = DEFAULT_PSET
    init_error: float = 0.0
    t: float = 0.0
    terms: dict = field(default_factory=dict)
    elliptic_max: float = 0.0
    time_recon_max: float = 0.0

    def __post_init__(self):
        if not self.terms:
            self.terms = {name: LpAccumulator(self.pset)
                          for name in StepEstimate.ACCUMULATED}

    def update(self, est: StepEstimate, tau: float) -> None:
        for name in StepEstimate.ACCUMULATED:
            self.terms[name].update(getattr(est, name), tau)
        self.elliptic_max = max(self.elliptic_max, est.elliptic)
        self.time_recon_max = max(self.time_recon_max, est.time_recon)
        self.t += tau


@dataclass
class EstimateReport:
    """Weighted accumulations and totals for each evaluation strategy."""

    t: float
    totals: dict
    term_min: dict
    term_argmin: dict
    term_values: dict      # per term: {p: weighted accumulation}
    elliptic_max: float
    time_recon_max: float
    init_error: float


def total_estimate(state: AccumulatorState, constants: ConstantsConfig) -> EstimateReport:
    """Assemble the final-estimate totals at the state's current time."""
    r, alpha = state.t, constants.alpha
    domains = TERM_DOMAINS[state.scheme]
    base = state.init_error + state.elliptic_max
    if state.scheme is SchemeKind.CRANK_NICOLSON:
        base += state.time_recon_max

    term_min, term_argmin, term_values = {}, {}, {}
    for name, acc in state.terms.items():
        term_min[name], term_argmin[name] = weighted_min_accumulation(
            acc, domains[name], r, alpha)
        term_values[name] = {
            p: domain_weight(p, domains[name], r, alpha) * acc.value(p)
            for p in acc.pset if admissible(p, domains[name])}

    def fixed_p(name: str, strategy: str) -> float:
        dom = domains[name]
        if strategy == "l1":
            return least_admissible(dom)
        if strategy == "l2":
            return 2.0
        return INF

    totals = {"min": base + math.sqrt(2.0) * sum(term_min.values())}
    for strategy in ("l1", "l2", "linf"):
        acc_sum = 0.0
        for name, acc in state.terms.items():
            p = fixed_p(name, strategy)
            acc_sum += domain_weight(p, domains[name], r, alpha) * acc.value(p)
        totals[strategy] = base + math.sqrt(2.0) * acc_sum
    return EstimateReport(t=r, totals=totals, term_min=term_min,
                          term_argmin=term_argmin, term_values=term_values,
                          elliptic_max=state.elliptic_max,
                          time_recon_max=state.time_recon_max,
                          init_error=state.init_error)


def synthetic_accumulation_study(kind: str, tau: float = 0.1, T: float = 15.0,
                                 alpha: float = 1.0, seed: int = 0,
                                 pset: tuple[float, ...] = DEFAULT_PSET) -> dict:
    """Step-constant streams of the three comparison experiments: F^n = 1,
    F^n uniform in [0,10], and the latter with F^1 = 30."""
    n_steps = int(round(T / tau))
    if kind == "ones":
        F = np.ones(n_steps)
    elif kind in ("random", "large_initial"):
        rng = np.random.default_rng(seed)
        F = rng.uniform(0.0, 10.0, size=n_steps)
        if kind == "large_initial":
            F[0] = 30.0
    else:
        raise ValueError(f"unknown study kind {kind!r}")

    acc = LpAccumulator(pset)
    t = np.arange(1, n_steps + 1) * tau
    raw = {p: np.empty(n_steps) for p in pset}
    weighted = {p: np.empty(n_steps) for p in pset}
    for i, F_n in enumerate(F):
        acc.update(float(F_n), tau)
        for p in pset:
            raw[p][i] = acc.value(p)
            weighted[p][i] = accumulation_coefficient(p, float(t[i]), alpha) * raw[p][i]
    return {"t": t, "F": F, "raw": raw, "weighted": weighted}
