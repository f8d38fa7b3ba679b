"""Command-line entry point: ``hatguess <subcommand> ...``.

Exit codes: 0 success, 2 usage or input error, 3 inconclusive (budget
exhausted), 4 internal inconsistency, 5 verification failure.

Every artifact embeds the run configuration under ``"config"`` (edge lists
and CSV files carry it on a ``#`` comment line). Output paths and the
thread count are left out of it on purpose: neither changes the content.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from hatguess import __version__
from hatguess.asymptotics import theorem_window
from hatguess.bounds import (
    lower_bound_certificate,
    upper_bound_certificate,
    verify_certificate,
)
from hatguess.game import ENGINES, Status, StrategyTable, hg_exact, verify_strategy
from hatguess.graph import (
    EdgeListError,
    GnpParams,
    format_edge_list,
    read_edge_list,
    sample_gnp,
    write_edge_list,
)
from hatguess.montecarlo import (
    EXPERIMENTS,
    _csv_cell,
    run_common_neighbor_trials,
    run_growth_experiment,
    run_pipeline_experiment,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4
EXIT_VERIFY = 5

DEFAULT_MAX_NODES = 10**7
DEFAULT_TIME_LIMIT = 60.0


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    graph: str | None = None
    cert: str | None = None
    experiment: str | None = None
    n: int | None = None
    n_list: list[int] | None = None
    p: str | None = None
    q_max: int | None = None
    d: int | None = None
    trials: int | None = None
    seed: int | None = None
    engine: str | None = None
    max_nodes: int | None = None
    time_limit: float | None = None
    format: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def config_to_argv(cfg: dict) -> list[str]:
    """Command line that reproduces an artifact from its embedded config."""
    argv = [cfg["subcommand"]]
    if cfg["subcommand"] == "experiment":
        argv.append(cfg["experiment"])
    for key in ("graph", "cert"):
        if cfg.get(key) is not None:
            argv.append(cfg[key])
    flags = {
        "n": "-n", "p": "-p", "q_max": "--q-max", "d": "-d", "trials": "--trials",
        "seed": "--seed", "engine": "--engine", "max_nodes": "--max-nodes",
        "time_limit": "--time-limit", "format": "--format",
    }
    for key, flag in flags.items():
        if cfg.get(key) is not None:
            argv += [flag, str(cfg[key])]
    if cfg.get("n_list"):
        argv += ["--n-list", ",".join(str(n) for n in cfg["n_list"])]
    for key, val in sorted(cfg.get("extra", {}).items()):
        flag = "--" + key.replace("_", "-")
        argv += [flag] if val is True else [flag, str(val)]
    return argv


def extract_config(text: str) -> dict:
    """The RunConfig dict embedded in any artifact this tool writes.

    JSON artifacts carry it at top level; edge lists, text reports and CSV
    streams carry it on a ``#`` comment line.
    """
    try:
        doc = json.loads(text)
        if isinstance(doc, dict) and "config" in doc:
            return doc["config"]
    except ValueError:
        pass
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("#"):
            continue
        body = line[1:].strip()
        if body.startswith("hatguess ") and " config " in body:
            return json.loads(body.split(" config ", 1)[1])
        try:
            doc = json.loads(body)
        except ValueError:
            continue
        if isinstance(doc, dict) and "config" in doc:
            return doc["config"]
    raise ValueError("no embedded config found")


# parsing helpers ---------------------------------------------------------


def parse_p(text: str) -> Fraction:
    """Exact rational from ``"num/den"`` or a decimal string."""
    try:
        p = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if not 0 < p < 1:
        raise argparse.ArgumentTypeError(f"p must lie strictly between 0 and 1, got {text}")
    return p


def _p_text(p: Fraction | None) -> str | None:
    return None if p is None else f"{p.numerator}/{p.denominator}"


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _load_graph(path: str):
    try:
        return read_edge_list(path)
    except EdgeListError as e:
        raise UsageError(f"{path}: malformed edge list: {e}")
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror or e}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {out}: {e.strerror or e}")


def _config_line(cfg: RunConfig) -> str:
    return "# " + json.dumps({"config": cfg.to_dict(), "version": __version__}, sort_keys=True) + "\n"


def _artifact(cfg: RunConfig, body: dict) -> str:
    doc = {"config": cfg.to_dict(), "version": __version__}
    doc.update(body)
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


# subcommands -------------------------------------------------------------


def cmd_gen(a) -> int:
    cfg = RunConfig("gen", n=a.n, p=_p_text(a.p), seed=a.seed)
    G = sample_gnp(GnpParams(a.n, a.p, a.seed))
    note = f"hatguess {__version__} config {json.dumps(cfg.to_dict(), sort_keys=True)}"
    if a.out is None:
        sys.stdout.write(format_edge_list(G) + f"# {note}\n")
    else:
        try:
            write_edge_list(G, a.out, comment=note)
        except OSError as e:
            raise UsageError(f"cannot write {a.out}: {e.strerror or e}")
        print(G.edge_count)
    return EXIT_OK


def cmd_hg(a) -> int:
    G = _load_graph(a.graph)
    q_max = a.q_max if a.q_max is not None else G.n + 1
    cfg = RunConfig(
        "hg", graph=a.graph, q_max=q_max, engine=a.engine,
        max_nodes=a.max_nodes, time_limit=a.time_limit, format=a.format,
    )
    res = hg_exact(G, max(q_max, 1), a.max_nodes, a.time_limit, a.engine)
    evidence = [
        {"q": d.q, "status": d.status.value, "nodes": d.nodes, "reason": d.reason}
        for d in res.evidence
    ]
    if a.strategy_out:
        wins = [d for d in res.evidence if d.status is Status.WINNABLE]
        if wins:
            _emit(wins[-1].strategy.to_json(), a.strategy_out)
    if res.exact and not res.capped:
        line = f"HG = {res.lower}"
    elif res.exact:
        line = f"HG >= {res.lower} (q_max = {q_max} reached)"
    else:
        hi = "?" if res.upper is None else res.upper
        line = f"HG in [{res.lower}, {hi}]: BudgetExceeded at q = {res.lower + 1}"
    if a.format == "text":
        _emit(line + "\n" + _config_line(cfg), a.out)
    else:
        body = {
            "hg": {"lower": res.lower, "upper": res.upper, "exact": res.exact,
                   "capped": res.capped, "summary": line},
            "evidence": evidence,
        }
        _emit(_artifact(cfg, body), a.out)
    return EXIT_OK if res.exact else EXIT_BUDGET


def cmd_bounds(a) -> int:
    G = _load_graph(a.graph)
    cfg = RunConfig(
        "bounds", graph=a.graph, p=_p_text(a.p), seed=a.seed,
        max_nodes=a.max_nodes, time_limit=a.time_limit,
    )
    lower = lower_bound_certificate(G, a.p, a.max_nodes, a.time_limit, seed=a.seed)
    upper = upper_bound_certificate(G)
    for cert in (lower, upper):
        verdict = verify_certificate(G, cert)
        if not verdict:
            print(f"internal error: own {cert.kind} certificate fails ({verdict.reason})",
                  file=sys.stderr)
            return EXIT_INTERNAL
    _emit(_artifact(cfg, {"lower": lower.to_dict(), "upper": upper.to_dict()}), a.out)
    return EXIT_OK


def cmd_verify(a) -> int:
    G = _load_graph(a.graph)
    try:
        text = Path(a.cert).read_text()
    except OSError as e:
        raise UsageError(f"{a.cert}: {e.strerror or e}")
    try:
        doc = json.loads(text)
    except ValueError:
        print("verification failed: malformed", file=sys.stderr)
        return EXIT_VERIFY
    if isinstance(doc, dict) and doc.get("schema") == "strategy-v1":
        try:
            S = StrategyTable.from_json(text)
            out = verify_strategy(G, S.q, S)
        except (ValueError, KeyError, TypeError) as e:
            print(f"verification failed: malformed strategy ({e})", file=sys.stderr)
            return EXIT_VERIFY
        if out.winning:
            print(f"strategy wins all {S.q}^{G.n} assignments")
            return EXIT_OK
        print(f"verification failed: losing assignment {list(out.counterexample)}",
              file=sys.stderr)
        return EXIT_VERIFY
    certs = []
    if isinstance(doc, dict) and "kind" in doc:
        certs = [doc]
    elif isinstance(doc, dict) and ("lower" in doc or "upper" in doc):
        certs = [doc[k] for k in ("lower", "upper") if k in doc]
    if not certs:
        print("verification failed: malformed", file=sys.stderr)
        return EXIT_VERIFY
    for c in certs:
        verdict = verify_certificate(G, c)
        if not verdict:
            print(f"verification failed: {verdict.reason}", file=sys.stderr)
            return EXIT_VERIFY
    print("certificate ok" if len(certs) == 1 else "certificates ok")
    return EXIT_OK


def cmd_predict(a) -> int:
    cfg = RunConfig("predict", n=a.n, p=_p_text(a.p))
    if a.n < 2:
        raise UsageError("predict needs n >= 2")
    window = theorem_window(a.n, a.p)
    _emit(_artifact(cfg, {"prediction": window.to_dict()}), a.out)
    return EXIT_OK


def cmd_experiment(a) -> int:
    name = a.name
    extra = {}
    if name == "common-neighbor":
        if a.n is None or a.p is None or a.d is None:
            raise UsageError("common-neighbor needs -n, -p and -d")
        if not 0 <= a.d < a.n:
            raise UsageError("common-neighbor needs 0 <= d < n")
        if a.unconditioned:
            extra["unconditioned"] = True
        cfg = RunConfig("experiment", experiment=name, n=a.n, p=_p_text(a.p), d=a.d,
                        trials=a.trials, seed=a.seed, format=a.format, extra=extra)
    elif name == "growth":
        n_list = a.n_list or ([a.n] if a.n is not None else None)
        if not n_list or a.p is None:
            raise UsageError("growth needs --n-list (or -n) and -p")
        if any(n < 10 for n in n_list):
            raise UsageError("growth needs every n >= 10")
        cfg = RunConfig("experiment", experiment=name, n_list=n_list, p=_p_text(a.p),
                        trials=a.trials, seed=a.seed, format=a.format)
    else:
        if a.n is None or a.p is None:
            raise UsageError("pipeline needs -n and -p")
        cfg = RunConfig("experiment", experiment=name, n=a.n, p=_p_text(a.p),
                        trials=a.trials, seed=a.seed, format=a.format)
    cfg_line = _config_line(cfg)

    stream = None
    writer = None
    if a.csv:
        try:
            stream = open(a.csv, "w")
        except OSError as e:
            raise UsageError(f"cannot write {a.csv}: {e.strerror or e}")
    elif a.format == "csv" and a.out is None:
        stream = sys.stdout

    def on_record(rec):
        nonlocal writer
        if stream is None:
            return
        if writer is None:
            stream.write(cfg_line)
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(list(rec))
        writer.writerow([_csv_cell(v) for v in rec.values()])
        stream.flush()

    try:
        if name == "common-neighbor":
            rep = run_common_neighbor_trials(a.n, a.p, a.d, a.trials, a.seed,
                                             unconditioned=a.unconditioned,
                                             threads=a.threads, on_record=on_record)
        elif name == "growth":
            rep = run_growth_experiment(cfg.n_list, a.p, a.trials, a.seed,
                                        threads=a.threads, on_record=on_record)
        else:
            rep = run_pipeline_experiment(a.n, a.p, a.trials, a.seed,
                                          threads=a.threads, on_record=on_record)
    except ValueError as e:
        raise UsageError(str(e))
    finally:
        if stream is not None and stream is not sys.stdout:
            stream.close()
    rep.config = cfg.to_dict()
    if a.format == "csv":
        if a.out is not None:
            _emit(cfg_line + rep.to_csv(), a.out)
    elif a.format == "text":
        lines = [f"{rep.experiment}: {len(rep.records)} trials"]
        lines += [f"{k}: {'pass' if v else 'FAIL'}" for k, v in rep.checks.items()]
        _emit("\n".join(lines) + "\n" + cfg_line, a.out)
    else:
        _emit(rep.to_json(), a.out)
    return EXIT_OK


# parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _budget_args(p):
    p.add_argument("--max-nodes", type=_pos_int, default=DEFAULT_MAX_NODES,
                   help=f"search node cap (default {DEFAULT_MAX_NODES})")
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT,
                   help=f"wall-clock seconds (default {DEFAULT_TIME_LIMIT:g})")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hatguess", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hatguess {__version__}")
    ap.add_argument("--threads", type=_pos_int, default=1,
                    help="worker threads for trials and restarts; outputs do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="sample G(n, p) into an edge list")
    g.add_argument("-n", type=_nonneg_int, required=True)
    g.add_argument("-p", type=parse_p, required=True, help="edge probability, e.g. 1/2 or 0.8")
    g.add_argument("--seed", type=_nonneg_int, default=0)
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_gen)

    h = sub.add_parser("hg", help="exact hat guessing number of a small graph")
    h.add_argument("graph")
    h.add_argument("--q-max", type=_pos_int, help="largest q tried (default n + 1)")
    h.add_argument("--engine", choices=ENGINES, default="auto")
    _budget_args(h)
    h.add_argument("--format", choices=("json", "text"), default="text")
    h.add_argument("--strategy-out", help="write the strategy for the largest winnable q")
    h.add_argument("-o", "--out")
    h.set_defaults(func=cmd_hg)

    b = sub.add_parser("bounds", help="lower and upper bound certificates as JSON")
    b.add_argument("graph")
    b.add_argument("-p", "--p-hint", dest="p", type=parse_p)
    b.add_argument("--seed", type=_nonneg_int, default=0)
    _budget_args(b)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="check a certificate or strategy file against a graph")
    v.add_argument("graph")
    v.add_argument("cert")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("predict", help="predicted HG window for G(n, p)")
    pr.add_argument("-n", type=_nonneg_int, required=True)
    pr.add_argument("-p", type=parse_p, required=True)
    pr.add_argument("-o", "--out")
    pr.set_defaults(func=cmd_predict)

    e = sub.add_parser("experiment", help="seeded Monte Carlo experiment")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("-n", type=_pos_int)
    e.add_argument("--n-list", type=_int_list)
    e.add_argument("-p", type=parse_p)
    e.add_argument("-d", type=_nonneg_int)
    e.add_argument("--trials", type=_pos_int, default=100)
    e.add_argument("--seed", type=_nonneg_int, default=0)
    e.add_argument("--unconditioned", action="store_true")
    e.add_argument("--format", choices=("json", "csv", "text"), default="json")
    e.add_argument("--csv", help="stream per-trial rows to this file")
    e.add_argument("-o", "--out")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return a.func(a)
    except UsageError as e:
        print(f"hatguess: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as e:
        print(f"hatguess: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
