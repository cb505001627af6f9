"""Experiment orchestration and deterministic CSV/JSON report emission."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .accumulation import DEFAULT_PSET, STRATEGIES, synthetic_accumulation_study
from .estimators import ConstantsConfig
from .timestepping import SchemeKind
from .verification import BENCHMARKS, RunRecord, convergence_rate, fit_loglog_slope, run_level

TIMESERIES_COLUMNS = [
    "level", "t", "error_linf_l2", "est_min", "est_l1", "est_l2", "est_linf",
    "eff_min", "eff_l1", "eff_l2", "eff_linf", "S_acc", "T_acc", "E_max",
    "R_max", "DT_acc", "DS_acc", "argmin_p_S", "argmin_p_T", "argmin_p_DT",
    "argmin_p_DS",
]

_TERM_KEYS = {"S": "space", "T": "time", "DT": "data_time", "DS": "data_space"}


@dataclass
class ExperimentConfig:
    benchmark: str = "sinusoidal"
    scheme: str = "be"
    tau_rule: str = "hsq"
    level_lo: int = 2
    level_hi: int = 5
    pset: tuple = DEFAULT_PSET
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    alpha_preset: str = "derived"       # "paper51" pins alpha = 1
    seed: int = 0
    out_dir: str = "out"
    samples_per_step: int = 3
    study: str = "pde"
    ds_pairing: str = "verbatim"
    final_time: float | None = None
    slope_window: tuple = (5.0, 15.0)

    def __post_init__(self):
        if self.level_lo < 1 or self.level_hi < self.level_lo:
            raise ValueError("need 1 <= level_lo <= level_hi")
        if self.samples_per_step < 3:
            raise ValueError("samples_per_step must be >= 3")
        if self.scheme not in ("be", "cn"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.alpha_preset == "paper51":
            self.constants.alpha_override = 1.0
        elif self.alpha_preset != "derived":
            raise ValueError(f"unknown alpha preset {self.alpha_preset!r}")

    @property
    def scheme_kind(self) -> SchemeKind:
        return SchemeKind(self.scheme)

    def resolved(self) -> dict:
        return {
            "benchmark": self.benchmark, "scheme": self.scheme,
            "tau_rule": self.tau_rule, "levels": [self.level_lo, self.level_hi],
            "pset": ["inf" if p == math.inf else p for p in self.pset],
            "constants": self.constants.to_dict(),
            "alpha_preset": self.alpha_preset, "seed": self.seed,
            "samples_per_step": self.samples_per_step, "study": self.study,
            "ds_pairing": self.ds_pairing, "final_time": self.final_time,
            "slope_window": list(self.slope_window),
        }

    @property
    def hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _fmt(x) -> str:
    """Shortest-round-trip formatting so reruns are byte identical."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isnan(v):
        return "nan"
    if v == math.inf:
        return "inf"
    return repr(v)


def _fmt_p(p: float) -> str:
    return "inf" if p == math.inf else str(int(p))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def _timeseries_rows(rec: RunRecord, cfg_hash: str) -> list[list[str]]:
    eff = {s: rec.eff(s) for s in STRATEGIES}
    rows = []
    for k in range(len(rec.times)):
        row = [str(rec.level), _fmt(rec.times[k]), _fmt(rec.err[k])]
        row += [_fmt(rec.est[s][k]) for s in STRATEGIES]
        row += [_fmt(eff[s][k]) for s in STRATEGIES]
        row += [_fmt(rec.term_min["space"][k]), _fmt(rec.term_min["time"][k]),
                _fmt(rec.elliptic_max[k]), _fmt(rec.time_recon_max[k]),
                _fmt(rec.term_min["data_time"][k]), _fmt(rec.term_min["data_space"][k])]
        row += [_fmt_p(rec.term_argmin[_TERM_KEYS[s]][k]) for s in ("S", "T", "DT", "DS")]
        row.append(cfg_hash)
        rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig) -> dict:
    """Run all levels of one configuration and emit CSVs plus a summary JSON."""
    t0 = time.perf_counter()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_hash = config.hash
    problem = BENCHMARKS[config.benchmark]()
    scheme = config.scheme_kind

    records: dict[int, RunRecord] = {}
    for level in range(config.level_lo, config.level_hi + 1):
        try:
            records[level] = run_level(problem, scheme, level, config.tau_rule,
                                       constants=config.constants, pset=config.pset,
                                       samples_per_step=config.samples_per_step,
                                       ds_pairing=config.ds_pairing,
                                       T=config.final_time)
        except Exception as exc:
            raise RuntimeError(f"level {level} failed: {exc}") from exc

    header = TIMESERIES_COLUMNS + ["config_hash"]
    comp_header = ["level", "t", "S_acc", "T_acc", "E_max", "R_max", "DT_acc",
                   "DS_acc", "config_hash"]
    cmp_header = ["level", "t", "est_min", "est_l1", "est_l2", "est_linf",
                  "eff_min", "eff_l1", "eff_l2", "eff_linf", "config_hash"]
    paths = {}
    for level, rec in records.items():
        rows = _timeseries_rows(rec, cfg_hash)
        p = out / f"timeseries_i{level}.csv"
        _write_csv(p, header, rows)
        paths[f"timeseries_i{level}"] = str(p)
        comp_rows = [[r[0], r[1]] + r[11:17] + [cfg_hash] for r in rows]
        p = out / f"components_i{level}.csv"
        _write_csv(p, comp_header, comp_rows)
        paths[f"components_i{level}"] = str(p)
        cmp_rows = [[r[0], r[1]] + r[3:11] + [cfg_hash] for r in rows]
        p = out / f"comparison_i{level}.csv"
        _write_csv(p, cmp_header, cmp_rows)
        paths[f"comparison_i{level}"] = str(p)

    summary = _summarize(config, records)
    summary["wall_time_s"] = time.perf_counter() - t0
    sp = out / "summary.json"
    sp.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths["summary"] = str(sp)
    summary["paths"] = paths
    return summary


def _summarize(config: ExperimentConfig, records: dict[int, RunRecord]) -> dict:
    levels = sorted(records)
    per_level = {}
    for lv, rec in records.items():
        per_level[str(lv)] = {
            "M": rec.M, "h": rec.h, "tau": rec.tau, "n_steps": rec.n_steps,
            "final_error": rec.final_error,
            "final_est": {s: float(rec.est[s][-1]) for s in STRATEGIES},
            "final_eff": {s: float(rec.eff(s)[-1]) for s in STRATEGIES},
            "residual_max": rec.residual_max,
        }

    rates: dict[str, dict] = {"error": {}, "est_min": {}}
    comp_rates: dict[str, dict] = {}
    for prev, cur in zip(levels, levels[1:]):
        a, b = records[prev], records[cur]
        key = f"{prev}->{cur}"
        if a.final_error > 0 and b.final_error > 0:
            rates["error"][key] = convergence_rate(b.final_error, a.final_error, b.h, a.h)
        if a.est["min"][-1] > 0 and b.est["min"][-1] > 0:
            rates["est_min"][key] = convergence_rate(
                float(b.est["min"][-1]), float(a.est["min"][-1]), b.h, a.h)
        for name in ("space", "time", "data_time", "data_space"):
            fa, fb = float(a.term_min[name][-1]), float(b.term_min[name][-1])
            if fa > 0 and fb > 0:
                comp_rates.setdefault(name, {})[key] = convergence_rate(fb, fa, b.h, a.h)
        for name, series in (("elliptic", "elliptic_max"), ("time_recon", "time_recon_max")):
            fa, fb = float(getattr(a, series)[-1]), float(getattr(b, series)[-1])
            if fa > 0 and fb > 0:
                comp_rates.setdefault(name, {})[key] = convergence_rate(fb, fa, b.h, a.h)

    finest = records[levels[-1]]
    slopes = {}
    for s in STRATEGIES:
        try:
            slopes[s] = fit_loglog_slope(finest.times, finest.eff(s), config.slope_window)
        except ValueError:
            slopes[s] = None

    return {
        "config": config.resolved(),
        "config_hash": config.hash,
        "levels": levels,
        "per_level": per_level,
        "rates": rates,
        "component_rates": comp_rates,
        "eff_slopes": {"level": levels[-1], "window": list(config.slope_window),
                       **slopes},
        "final_effectivities": per_level[str(levels[-1])]["final_eff"],
    }


def run_accumulation_study(config: ExperimentConfig) -> dict:
    """Emit the three accumulation-comparison tables (tau = 0.1, alpha = 1)."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_hash = config.hash
    alpha = 1.0 if config.alpha_preset == "paper51" else config.constants.alpha
    paths = {}
    for kind in ("ones", "random", "large_initial"):
        table = synthetic_accumulation_study(kind, alpha=alpha, seed=config.seed,
                                             pset=config.pset)
        header = ["t", "F"]
        header += [f"weighted_p{_fmt_p(p)}" for p in config.pset]
        header += [f"raw_p{_fmt_p(p)}" for p in config.pset]
        header += ["config_hash"]
        rows = []
        for i in range(len(table["t"])):
            row = [_fmt(table["t"][i]), _fmt(table["F"][i])]
            row += [_fmt(table["weighted"][p][i]) for p in config.pset]
            row += [_fmt(table["raw"][p][i]) for p in config.pset]
            row.append(cfg_hash)
            rows.append(row)
        p = out / f"accumulation_{kind}.csv"
        _write_csv(p, header, rows)
        paths[kind] = str(p)
    return {"config_hash": cfg_hash, "paths": paths, "alpha": alpha}
