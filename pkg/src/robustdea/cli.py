"""Command-line front end: ``score``, ``curve``, ``bench``, ``gen`` and ``dump``.

Exit codes: 0 success, 2 usage or validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from .dea import MAX_CANDIDATES, DatasetError, MaskError, ModelSpec, ReturnsToScale
from .instances import CandidatePolicy, GeneratorConfig, dumps_csv, generate_random, load_data
from .report import RunSettings, compare_engines, default_threads, score_dataset, subset_scores
from .scores import (BetaIndependent, CommonBernoulli, CommonUniform, ExpertBernoulli, MaxEntropy,
                     mask_bits, popcount)

DUMP_MAX_Q = 20
SELECTIONS = ("expert", "entropy", "common-uniform", "beta", "common-bernoulli")


class UsageError(Exception):
    """Bad arguments or data; exit code 2."""


@dataclass
class RunConfig:
    subcommand: str
    data_path: str | None = None
    rts: str = "crs"
    constant_input: bool = False
    fixed: list[str] = field(default_factory=list)
    selections: list[str] = field(default_factory=list)
    probs: list[float] | None = None
    beta_alpha: list[float] | None = None
    beta_gamma: list[float] | None = None
    pbar: float | None = None
    engine: str = "exact"
    out: str | None = None
    fmt: str = "csv"
    grid: str = "0.1:1.0:0.1"
    threads: int | None = None
    dump_subsets: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def settings(self) -> RunSettings:
        return RunSettings(ModelSpec(ReturnsToScale(self.rts)), self.engine)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (up to rounding)."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise UsageError(f"grid must be start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"empty grid {spec!r}")
    count = int(round((stop - start) / step + 1e-9)) + 1
    grid = [round(start + i * step, 12) for i in range(count)]
    grid = [g for g in grid if g <= stop + 1e-12]
    if not grid:
        raise UsageError(f"empty grid {spec!r}")
    if grid[0] < 0 or grid[-1] > 1:
        raise UsageError(f"grid {spec!r} leaves [0, 1]")
    return grid


def _model(cls, *args):
    try:
        return cls(*args)
    except ValueError as exc:
        raise UsageError(f"{cls.name}: {exc}") from None


def build_models(cfg: RunConfig, q: int):
    models = []
    for sel in cfg.selections or ["entropy"]:
        if sel == "expert":
            if cfg.probs is None:
                raise UsageError("--selection expert needs --probs p1,...,pq")
            if len(cfg.probs) != q:
                raise UsageError(f"--probs has {len(cfg.probs)} values but the dataset has q={q} candidates")
            models.append(_model(ExpertBernoulli, tuple(cfg.probs)))
        elif sel == "entropy":
            models.append(MaxEntropy())
        elif sel == "common-uniform":
            models.append(CommonUniform())
        elif sel == "common-bernoulli":
            if cfg.pbar is None:
                raise UsageError("--selection common-bernoulli needs --pbar")
            models.append(_model(CommonBernoulli, cfg.pbar))
        elif sel == "beta":
            if cfg.beta_alpha is None or cfg.beta_gamma is None:
                raise UsageError("--selection beta needs --beta-alpha and --beta-gamma")
            a, g = cfg.beta_alpha, cfg.beta_gamma
            a = a * q if len(a) == 1 else a
            g = g * q if len(g) == 1 else g
            if len(a) != q or len(g) != q:
                raise UsageError(f"beta parameters need 1 or q={q} values each")
            models.append(_model(BetaIndependent, tuple(a), tuple(g)))
        else:
            raise UsageError(f"unknown selection {sel!r}")
    try:
        for m in models:
            m.check(q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return models


def _load(cfg: RunConfig):
    if not cfg.data_path:
        raise UsageError("--data is required")
    return load_data(cfg.data_path, cfg.fixed, cfg.constant_input)


def _write(cfg: RunConfig, text: str):
    if cfg.out and cfg.out != "-":
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows, delimiter=",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _dump_text(dataset, scores, fmt):
    q = dataset.q
    if fmt == "json":
        return json.dumps([{"dmu": d, "mask_bits": mask_bits(m, q), "popcount": popcount(m),
                            "theta": float(row[m])}
                           for d, row in zip(dataset.dmu_names, scores) for m in range(1 << q)]) + "\n"
    rows = [(d, mask_bits(m, q), popcount(m), f"{row[m]:.5f}")
            for d, row in zip(dataset.dmu_names, scores) for m in range(1 << q)]
    return _csv_text(["dmu", "mask_bits", "popcount", "theta"], rows)


def cmd_score(cfg: RunConfig) -> int:
    dataset = _load(cfg)
    models = build_models(cfg, dataset.q)
    report = score_dataset(dataset, models, cfg.settings, cfg.threads)
    if cfg.fmt == "json":
        _write(cfg, json.dumps(report.to_dict(), indent=1) + "\n")
    else:
        _write(cfg, _csv_text(["dmu", "model", "expected", "std_dev"],
                              [(d, m, f"{e:.5f}", f"{s:.5f}") for d, m, e, s in report.rows()]))
    if cfg.dump_subsets:
        if dataset.q > DUMP_MAX_Q:
            raise UsageError(f"--dump-subsets needs q <= {DUMP_MAX_Q}, dataset has q={dataset.q}")
        scores, _ = subset_scores(dataset, cfg.settings, cfg.threads)
        with open(cfg.dump_subsets, "w", encoding="utf-8", newline="") as fh:
            fh.write(_dump_text(dataset, scores, "csv"))
    return 0


def cmd_curve(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.grid)
    dataset = _load(cfg)
    report = score_dataset(dataset, [CommonBernoulli(g) for g in grid], cfg.settings, cfg.threads)
    if cfg.fmt == "json":
        _write(cfg, json.dumps([{"dmu": d, "pbar": g, "expected": float(report.expected[j, k]),
                                 "std_dev": float(report.std_dev[j, k])}
                                for j, d in enumerate(report.dmu_names)
                                for k, g in enumerate(grid)], indent=1) + "\n")
    else:
        rows = [(d, f"{g:g}", f"{report.expected[j, k]:.5f}", f"{report.std_dev[j, k]:.5f}")
                for j, d in enumerate(report.dmu_names) for k, g in enumerate(grid)]
        _write(cfg, _csv_text(["dmu", "pbar", "expected", "std_dev"], rows, delimiter="\t"))
    return 0


def cmd_dump(cfg: RunConfig) -> int:
    dataset = _load(cfg)
    if dataset.q > DUMP_MAX_Q:
        raise UsageError(f"dump needs q <= {DUMP_MAX_Q}, dataset has q={dataset.q}")
    scores, _ = subset_scores(dataset, cfg.settings, cfg.threads)
    _write(cfg, _dump_text(dataset, scores, cfg.fmt))
    return 0


BENCH_HEADER = ["n_dmu", "q", "alg_time", "alg_lps", "ratio_percent_time", "ratio_percent_lps",
                "reduction_percent_time", "reduction_percent_lps", "total_time", "total_lps",
                "scores_match"]


def bench_cell(n: int, q: int, seed: int, n_inputs: int = 1, spec: ModelSpec = ModelSpec(),
               threads: int | None = 1, tol: float = 1e-7) -> dict:
    """One benchmark cell: ``n_inputs`` fixed inputs plus ``q`` candidate outputs."""
    cfg = GeneratorConfig(n, n_inputs, q, seed=seed, candidate_policy=CandidatePolicy.OUTPUTS_CANDIDATE)
    dataset = generate_random(cfg)
    exact_stats, full_stats, diff = compare_engines(dataset, spec, threads=threads)
    alg_time = sum(s.wall_time for s in exact_stats)
    total_time = sum(s.wall_time for s in full_stats)
    alg = sum(s.lps_solved for s in exact_stats)
    total = sum(s.lps_solved for s in full_stats)
    rt = 100.0 * alg_time / total_time if total_time > 0 else 0.0
    rl = 100.0 * alg / total if total else 0.0
    return {"n_dmu": n, "q": q, "alg_time": alg_time, "alg_lps": alg,
            "ratio_percent_time": rt, "ratio_percent_lps": rl,
            "reduction_percent_time": 100.0 - rt, "reduction_percent_lps": 100.0 - rl,
            "total_time": total_time, "total_lps": total, "scores_match": diff <= tol}


def cmd_bench(cfg: RunConfig) -> int:
    sizes, qs = cfg.extra["sizes"], cfg.extra["qs"]
    if any(q > MAX_CANDIDATES for q in qs):
        raise UsageError(f"q must be <= {MAX_CANDIDATES}")
    if any(q < 1 for q in qs) or any(n < 1 for n in sizes):
        raise UsageError("sizes and q values must be positive")
    cells = []
    for n in sizes:
        for q in qs:
            cells.append(bench_cell(n, q, cfg.extra["seed"], cfg.extra["inputs"],
                                    cfg.settings.spec, cfg.threads))
    if cfg.fmt == "json":
        _write(cfg, json.dumps(cells, indent=1) + "\n")
    else:
        def fmt(k, v):
            if k == "scores_match":
                return "true" if v else "false"
            return f"{v:.3f}" if isinstance(v, float) else str(v)
        _write(cfg, _csv_text(BENCH_HEADER, [[fmt(k, c[k]) for k in BENCH_HEADER] for c in cells]))
    return 0


def cmd_gen(cfg: RunConfig) -> int:
    e = cfg.extra
    try:
        gc = GeneratorConfig(e["n"], e["inputs"], e["outputs"], (e["low"], e["high"]), e["seed"],
                             CandidatePolicy(e["policy"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(cfg, dumps_csv(generate_random(gc)))
    return 0


COMMANDS = {"score": cmd_score, "curve": cmd_curve, "bench": cmd_bench, "gen": cmd_gen, "dump": cmd_dump}


def _data_args(p):
    p.add_argument("--data", required=True, help="CSV path, or 'tennis' for the bundled corpus")
    p.add_argument("--constant-input", action="store_true", help="add a unit input to every DMU")
    p.add_argument("--fixed", type=lambda s: [x for x in s.split(",") if x], default=[],
                   help="comma-separated variables always in the model")


def _run_args(p, fmt=True):
    p.add_argument("--rts", choices=["crs", "vrs"], default="crs")
    p.add_argument("--engine", choices=["exact", "exhaustive"], default="exact")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes across DMUs (default: all cores; 1 = sequential)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    if fmt:
        p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustdea", description="Robust DEA efficiency scores")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("score", help="expected scores and standard deviations per DMU")
    _data_args(p)
    _run_args(p)
    p.add_argument("--selection", action="append", choices=SELECTIONS, dest="selections",
                   help="selection model (repeatable; default entropy)")
    p.add_argument("--probs", type=_floats, help="expert probabilities in dataset column order")
    p.add_argument("--beta-alpha", type=_floats)
    p.add_argument("--beta-gamma", type=_floats)
    p.add_argument("--pbar", type=float, help="shared probability for common-bernoulli")
    p.add_argument("--dump-subsets", metavar="PATH", help="also write every subset score to PATH")

    p = sub.add_parser("curve", help="expected score against a shared selection probability")
    _data_args(p)
    _run_args(p)
    p.add_argument("--grid", default="0.1:1.0:0.1", help="start:stop:step (inclusive)")

    p = sub.add_parser("dump", help="score of every subset for every DMU")
    _data_args(p)
    _run_args(p)

    p = sub.add_parser("bench", help="exact vs exhaustive enumeration on random instances")
    _run_args(p)
    p.add_argument("--sizes", type=_ints, default=[25, 50], help="DMU counts")
    p.add_argument("--q", dest="qs", type=_ints, default=[5, 10], help="candidate counts")
    p.add_argument("--inputs", type=int, default=1, help="fixed inputs per instance")
    p.add_argument("--seed", type=int, default=2015)

    p = sub.add_parser("gen", help="write a random instance as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--inputs", type=int, default=1)
    p.add_argument("--outputs", type=int, required=True)
    p.add_argument("--low", type=float, default=50.0)
    p.add_argument("--high", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=[c.value for c in CandidatePolicy], default="all")
    p.add_argument("--out", default=None)
    return parser


_CONFIG_KEYS = set(RunConfig.__dataclass_fields__) - {"subcommand", "extra"}
_RENAMES = {"data": "data_path"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known, extra = {}, {}
    for k, v in vars(ns).items():
        k = _RENAMES.get(k, k)
        if k == "subcommand":
            continue
        (known if k in _CONFIG_KEYS else extra)[k] = v
    known = {k: v for k, v in known.items() if v is not None or k in ("threads", "out")}
    cfg = RunConfig(ns.subcommand, extra=extra, **known)
    if cfg.threads is None:
        cfg.threads = default_threads()
    elif cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.subcommand](cfg)
    except (UsageError, DatasetError, MaskError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - stable exit code for anything unexpected
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
