"""Seeded Monte Carlo experiments on G(n, p).

Trial ``i`` of an experiment with master seed ``s`` samples its graph with
seed ``derive_seed(s, i)``, so trials are independent of each other and of
the order in which a thread pool finishes them. Records are reassembled by
trial index, and a report depends only on its parameters.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from hatguess import __version__
from hatguess._rng import derive_seed
from hatguess.asymptotics import (
    common_neighbor_tail_bound,
    common_neighbor_tail_bound_exact,
    predicted_chi,
    predicted_omega,
)
from hatguess.bounds import (
    choose_d,
    dsatur_coloring,
    greedy_clique,
    lower_bound_certificate,
    max_clique_exact,
    verify_certificate,
)
from hatguess.graph import Graph, as_fraction, sample_gnp

SCHEMA = "report-v1"
EXPERIMENTS = ("common-neighbor", "growth", "pipeline")


def trial_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, index)


def _p_text(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


def _map_trials(fn, count: int, threads: int, on_record=None) -> list[dict]:
    out = []
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            # map yields in submission order, whatever the completion order
            for rec in pool.map(fn, range(count)):
                out.append(rec)
                if on_record:
                    on_record(rec)
    else:
        for i in range(count):
            rec = fn(i)
            out.append(rec)
            if on_record:
                on_record(rec)
    return out


# aggregates --------------------------------------------------------------


def summarize(values) -> dict:
    """Mean, sample standard deviation and standard error of integer data, exactly rounded."""
    xs = [int(v) for v in values]
    k = len(xs)
    if k == 0:
        return {"count": 0, "mean": None, "sd": None, "se": None}
    mean = Fraction(sum(xs), k)
    if k > 1:
        var = sum((x - mean) ** 2 for x in xs) / (k - 1)
        sd = math.sqrt(float(var))
    else:
        sd = 0.0
    return {"count": k, "mean": float(mean), "sd": sd, "se": sd / math.sqrt(k)}


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    records: list[dict]
    aggregates: dict
    predicted: dict
    checks: dict = field(default_factory=dict)
    config: dict | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        doc = {
            "schema": SCHEMA,
            "version": __version__,
            "experiment": self.experiment,
            "parameters": self.parameters,
            "records": self.records,
            "aggregates": self.aggregates,
            "predicted": self.predicted,
            "checks": self.checks,
        }
        if self.config is not None:
            doc["config"] = self.config
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
        return cls(
            doc["experiment"], doc["parameters"], doc["records"], doc["aggregates"],
            doc["predicted"], doc.get("checks", {}), doc.get("config"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def csv_columns(self) -> list[str]:
        return list(self.records[0]) if self.records else []

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.csv_columns(), lineterminator="\n")
        w.writeheader()
        for rec in self.records:
            w.writerow({k: _csv_cell(v) for k, v in rec.items()})
        return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def recompute_aggregates(report: ExperimentReport) -> dict:
    """Aggregates rebuilt from the per-trial records alone."""
    recs = report.records
    if report.experiment == "common-neighbor":
        return {
            "N": summarize(r["N"] for r in recs),
            "tail_events": sum(1 for r in recs if r["tail_event"]),
            "tail_frequency": sum(1 for r in recs if r["tail_event"]) / len(recs),
        }
    if report.experiment == "growth":
        out = {}
        for n in sorted({r["n"] for r in recs}):
            rows = [r for r in recs if r["n"] == n]
            exact = [r["omega_exact"] for r in rows if r["omega_exact"] is not None]
            out[str(n)] = {
                "greedy_clique": summarize(r["greedy_clique"] for r in rows),
                "omega_exact": summarize(exact),
                "dsatur_colors": summarize(r["dsatur_colors"] for r in rows),
                "exact_trials": len(exact),
            }
        return out
    if report.experiment == "pipeline":
        k = len(recs)
        ok = sum(1 for r in recs if r["success"])
        return {
            "successes": ok,
            "success_rate": ok / k,
            "verified": sum(1 for r in recs if r["verified"]),
            "value_counts": _counts(r["value"] for r in recs),
            "d_counts": _counts(r["d"] for r in recs),
        }
    raise ValueError(f"unknown experiment {report.experiment!r}")


def _counts(values) -> dict:
    out: dict[str, int] = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def _independent_summary(xs) -> dict:
    # second implementation, through the statistics module
    xs = [int(v) for v in xs]
    k = len(xs)
    if k == 0:
        return {"count": 0, "mean": None, "sd": None, "se": None}
    sd = statistics.stdev(xs) if k > 1 else 0.0
    return {"count": k, "mean": statistics.fmean(xs), "sd": sd, "se": sd / math.sqrt(k)}


def check_aggregates(report: ExperimentReport) -> bool:
    """Recompute aggregates from the records by a separate code path; exact equality."""
    recs = report.records
    agg = report.aggregates
    k = len(recs)
    if report.experiment == "common-neighbor":
        events = [bool(r["tail_event"]) for r in recs]
        return agg == {
            "N": _independent_summary([r["N"] for r in recs]),
            "tail_events": events.count(True),
            "tail_frequency": events.count(True) / k,
        }
    if report.experiment == "growth":
        expect = {}
        for n in sorted({r["n"] for r in recs}):
            rows = [r for r in recs if r["n"] == n]
            ex = [r["omega_exact"] for r in rows if r["omega_exact"] is not None]
            expect[str(n)] = {
                "greedy_clique": _independent_summary([r["greedy_clique"] for r in rows]),
                "omega_exact": _independent_summary(ex),
                "dsatur_colors": _independent_summary([r["dsatur_colors"] for r in rows]),
                "exact_trials": len(ex),
            }
        return agg == expect
    if report.experiment == "pipeline":
        succ = [bool(r["success"]) for r in recs]
        values = sorted(int(r["value"]) for r in recs)
        ds = sorted(int(r["d"]) for r in recs)
        return agg == {
            "successes": succ.count(True),
            "success_rate": succ.count(True) / k,
            "verified": [bool(r["verified"]) for r in recs].count(True),
            "value_counts": {str(v): values.count(v) for v in sorted(set(values))},
            "d_counts": {str(v): ds.count(v) for v in sorted(set(ds))},
        }
    return False


# experiments -------------------------------------------------------------


def run_common_neighbor_trials(
    n: int,
    p,
    d: int,
    trials: int,
    master_seed: int = 0,
    unconditioned: bool = False,
    threads: int = 1,
    on_record=None,
) -> ExperimentReport:
    """Count common neighbors ``N`` of the vertex set ``{0..d-1}`` in seeded G(n, p).

    By default the core's internal edges are forced present, mirroring the
    conditioning on a clique; ``unconditioned=True`` leaves the sampled
    graph alone. (``N`` never depends on core-internal edges, so both modes
    give identical counts; the flag only changes the recorded clique check.)
    """
    pf = as_fraction(p)
    if not 0 < pf < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    if not 0 <= d < n:
        raise ValueError("need 0 <= d < n")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    core = list(range(d))
    # tail event N <= n p^d / 2, compared exactly: 2 N den^d <= n num^d
    lhs_scale = 2 * pf.denominator**d
    rhs = n * pf.numerator**d

    def one(i):
        s = trial_seed(master_seed, i)
        G = sample_gnp(n=n, p=pf, seed=s)
        core_clique = G.is_clique(core)
        if not unconditioned and not core_clique:
            G = _force_clique(G, core)
            core_clique = True
        N = int(G.common_neighbors(core).size)
        return {
            "trial": i,
            "seed": s,
            "N": N,
            "tail_event": lhs_scale * N <= rhs,
            "core_is_clique": core_clique,
        }

    recs = _map_trials(one, trials, threads, on_record)
    pr = {
        "mean_N": (n - d) * float(pf) ** d,
        "sd_N": math.sqrt((n - d) * float(pf) ** d * (1 - float(pf) ** d)),
        "threshold": float(Fraction(n) * pf**d / 2),
        "tail_bound": None,
        "tail_bound_n_minus_d": None,
    }
    if d <= n / 2:
        pr["tail_bound"] = common_neighbor_tail_bound(n, float(pf), d)
        pr["tail_bound_n_minus_d"] = common_neighbor_tail_bound_exact(n, float(pf), d)
    rep = ExperimentReport(
        "common-neighbor",
        {"n": n, "p": _p_text(pf), "d": d, "trials": trials, "master_seed": master_seed,
         "unconditioned": unconditioned},
        recs, {}, pr,
    )
    rep.aggregates = recompute_aggregates(rep)
    agg = rep.aggregates
    checks = {}
    if trials > 1 and agg["N"]["se"] > 0:
        checks["mean_within_3se"] = abs(agg["N"]["mean"] - pr["mean_N"]) <= 3 * agg["N"]["se"]
    if pr["tail_bound"] is not None:
        b = pr["tail_bound"]
        slack = 3 * math.sqrt(b * (1 - b) / trials) + 1 / trials
        checks["tail_within_bound"] = agg["tail_frequency"] <= b + slack
    rep.checks = checks
    return rep


def _force_clique(G: Graph, core) -> Graph:
    bits = G.bits.copy()
    for u in core:
        for v in core:
            if u != v:
                bits[u, v >> 3] |= np.uint8(1 << (v & 7))
    return Graph(G.n, bits)


def run_growth_experiment(
    n_list,
    p,
    trials: int,
    master_seed: int = 0,
    exact_limit: int = 30,
    exact_max_nodes: int = 20000,
    restarts: int = 8,
    threads: int = 1,
    on_record=None,
) -> ExperimentReport:
    """Greedy and exact clique sizes and DSATUR color counts across sizes ``n``.

    Exact cliques run with an unlimited node budget up to ``exact_limit``
    vertices and with ``exact_max_nodes`` beyond (0 skips them); a trial
    without an exact answer records ``omega_exact`` as null.
    """
    pf = as_fraction(p)
    n_list = [int(n) for n in n_list]
    if any(n < 10 for n in n_list):
        raise ValueError("each n must be at least 10")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    jobs = [(j, n, t) for j, n in enumerate(n_list) for t in range(trials)]

    def one(i):
        j, n, t = jobs[i]
        s = derive_seed(master_seed, j, t)
        G = sample_gnp(n=n, p=pf, seed=s)
        greedy = len(greedy_clique(G, restarts, seed=s))
        budget = 10**12 if n <= exact_limit else exact_max_nodes
        if budget > 0:
            mc = max_clique_exact(G, max_nodes=budget, time_limit=float("inf"))
            exact, lower = (mc.size if mc.exact else None), mc.size
        else:
            exact, lower = None, greedy
        return {
            "n": n,
            "trial": t,
            "seed": s,
            "greedy_clique": greedy,
            "omega_exact": exact,
            "omega_lower": lower,
            "dsatur_colors": dsatur_coloring(G).num_colors,
        }

    recs = _map_trials(one, len(jobs), threads, on_record)
    pr = {
        str(n): {"omega": predicted_omega(n, float(pf)), "chi": predicted_chi(n, float(pf))}
        for n in sorted(set(n_list))
    }
    rep = ExperimentReport(
        "growth",
        {"n_list": n_list, "p": _p_text(pf), "trials": trials, "master_seed": master_seed,
         "exact_limit": exact_limit, "exact_max_nodes": exact_max_nodes, "restarts": restarts},
        recs, {}, pr,
    )
    rep.aggregates = recompute_aggregates(rep)
    for key, agg in rep.aggregates.items():
        if agg["omega_exact"]["count"]:
            pr[key]["omega_ratio"] = agg["omega_exact"]["mean"] / pr[key]["omega"]
        pr[key]["chi_ratio"] = agg["dsatur_colors"]["mean"] / pr[key]["chi"]
    return rep


def run_pipeline_experiment(
    n: int,
    p,
    trials: int,
    master_seed: int = 0,
    max_nodes: int = 10**6,
    restarts: int = 8,
    threads: int = 1,
    on_record=None,
) -> ExperimentReport:
    """Lower-bound certificates on seeded G(n, p), each independently verified."""
    pf = as_fraction(p)
    target = choose_d(n, pf)
    if target < 1:
        raise ValueError(f"choose_d({n}, {_p_text(pf)}) = 0: no book size fits, nothing to certify")
    if trials < 1:
        raise ValueError("trials must be at least 1")

    def one(i):
        s = trial_seed(master_seed, i)
        G = sample_gnp(n=n, p=pf, seed=s)
        cert = lower_bound_certificate(G, p_hint=pf, max_nodes=max_nodes, restarts=restarts, seed=s)
        verdict = verify_certificate(G, cert)
        return {
            "trial": i,
            "seed": s,
            "kind": cert.kind,
            "d": cert.d if cert.d is not None else 0,
            "value": cert.value,
            "petals": len(cert.petals),
            "success": cert.kind == "LowerBook" and cert.d == target,
            "verified": verdict.ok,
            "reason": verdict.reason,
        }

    recs = _map_trials(one, trials, threads, on_record)
    rep = ExperimentReport(
        "pipeline",
        {"n": n, "p": _p_text(pf), "trials": trials, "master_seed": master_seed,
         "max_nodes": max_nodes, "restarts": restarts},
        recs, {}, {"d": target, "required_petals": str(target ** (target + 3))},
    )
    rep.aggregates = recompute_aggregates(rep)
    rep.checks = {"all_verified": rep.aggregates["verified"] == trials}
    return rep
