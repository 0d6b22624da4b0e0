"""Command-line entry point: validate, front, ladder, compare, synth, report."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import model, synth
from .ladder import (
    STRATEGIES,
    Ladder,
    build_ladder,
    ladder_default,
    ladder_dynres,
    ladder_fixed,
    ladder_time_capped,
)
from .metrics import compare
from .model import (
    LadderError,
    MeasurementError,
    ParameterSpace,
    QualityMetric,
    TargetBitrateSet,
    ValidationOptions,
)
from .objective import JqtParams, MParams
from .pareto import front_jqt, front_jrqt, front_rate_quality
from .report import tradeoff_table, write_report

log = logging.getLogger("rqtladder")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_COMPUTE = 5

FRONT_STRATEGIES = ("jqt", "jrqt", "dynres")

# option -> fallback when neither the flag nor the config file sets it
DEFAULTS = {
    "metric": "xpsnr",
    "strategy": None,
    "alpha": None,
    "tau_limit": None,
    "targets": None,
    "pairs": None,
    "strict": False,
    "seed": 0,
    "workers": 1,
    "bins": 10,
}


class UsageError(Exception):
    pass


def _add_shared(p: argparse.ArgumentParser, *names: str) -> None:
    # defaults stay None so a config file can fill them; flags win
    if "metric" in names:
        p.add_argument("--metric", choices=[m.value for m in QualityMetric], default=None,
                       help="quality metric playing the role of v (default xpsnr)")
    if "strategy" in names:
        p.add_argument("--strategy", default=None)
    if "alpha" in names:
        p.add_argument("--alpha", type=float, default=None,
                       help="alpha_J for jqt, alpha_M for jrqt")
    if "tau_limit" in names:
        p.add_argument("--tau-limit", type=float, default=None,
                       help="decode-time cap in seconds (timecap)")
    if "targets" in names:
        p.add_argument("--targets", default=None, help="comma-separated target bitrates, kbps")
    if "pairs" in names:
        p.add_argument("--pairs", default=None,
                       help="CSV target_kbps,resolution for the fixed ladder")
    if "strict" in names:
        p.add_argument("--strict", action="store_true", default=None,
                       help="reject (resolution, qp) pairs outside the configured grid")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=None)
    if "workers" in names:
        p.add_argument("--workers", type=int, default=None,
                       help="sequences processed concurrently")
    p.add_argument("--config", type=Path, default=None, help="JSON file with option values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rqtladder", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a measurement CSV")
    p.add_argument("input", type=Path)
    _add_shared(p, "strict")

    p = sub.add_parser("front", help="write the Pareto front of every sequence")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--sequence", action="append", default=None,
                   help="restrict to these sequence ids (repeatable)")
    _add_shared(p, "metric", "strategy", "alpha", "strict", "workers")

    p = sub.add_parser("ladder", help="build a bitrate ladder for every sequence")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--sequence", action="append", default=None)
    _add_shared(p, "metric", "strategy", "alpha", "tau_limit", "targets", "pairs", "strict",
                "workers")

    p = sub.add_parser("compare", help="compare method ladders against reference ladders")
    p.add_argument("methods", type=Path, nargs="+", help="directories of method ladders")
    p.add_argument("--reference", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_shared(p, "workers")

    p = sub.add_parser("synth", help="generate a synthetic measurement corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--spatial", type=float, default=None, help="fix spatial complexity")
    p.add_argument("--temporal", type=float, default=None, help="fix temporal complexity")
    p.add_argument("--luminance", type=float, default=None)
    p.add_argument("--noise-level", type=float, default=None)
    p.add_argument("--energy-slope", type=float, default=None, help="joules per second")
    _add_shared(p, "seed")

    p = sub.add_parser("report", help="plot data and figures from comparison reports")
    p.add_argument("reports", type=Path, nargs="+",
                   help="*.report.json files or directories containing them")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--config", type=Path, default=None)
    return parser


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    config = {}
    if getattr(args, "config", None) is not None:
        try:
            config = json.loads(args.config.read_text())
        except ValueError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError(f"config file {args.config}: expected a JSON object")
    for key, fallback in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            value = config.get(key.replace("_", "-"), config.get(key, fallback))
            setattr(args, key, value)
    return args


def _targets(args) -> TargetBitrateSet:
    if args.targets is None:
        return TargetBitrateSet()
    try:
        if isinstance(args.targets, (list, tuple)):
            return TargetBitrateSet(tuple(args.targets))
        return TargetBitrateSet.parse(str(args.targets))
    except ValueError as exc:
        raise UsageError(f"--targets: {exc}") from None


def _load(path: Path, args, sequences=None) -> dict[str, ParameterSpace]:
    spaces = model.parse_measurements(path.read_text(encoding="utf-8"),
                                      ValidationOptions(strict=bool(args.strict)))
    if sequences:
        wanted = set(sequences)
        spaces = {k: v for k, v in spaces.items() if k in wanted}
        if not spaces:
            log.warning("no sequence matches %s; nothing written", ", ".join(sorted(wanted)))
    return spaces


def _parallel(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_validate(args) -> int:
    try:
        spaces = model.parse_measurements(args.input.read_text(encoding="utf-8"),
                                          ValidationOptions(strict=bool(args.strict)))
    except MeasurementError as exc:
        print(f"{args.input}: error: {exc}")
        return EXIT_VALIDATION
    status = EXIT_OK
    for seq, space in spaces.items():
        findings = model.validate_space(space)
        print(f"{seq}: {len(space)} points, {len(findings)} finding(s)")
        for f in findings:
            print(f"  {f}")
            if f.severity == "error":
                status = EXIT_VALIDATION
    return status


def _alpha_params(strategy: str, alpha):
    try:
        if strategy == "jqt":
            return JqtParams(2.5 if alpha is None else float(alpha))
        return MParams(0.75 if alpha is None else float(alpha))
    except ValueError as exc:
        raise UsageError(f"--alpha: {exc}") from None


def cmd_front(args) -> int:
    if args.strategy not in FRONT_STRATEGIES:
        raise UsageError(f"front --strategy must be one of {', '.join(FRONT_STRATEGIES)}")
    metric = QualityMetric.parse(args.metric)
    spaces = _load(args.input, args, args.sequence)

    def one(space):
        if args.strategy == "jqt":
            return front_jqt(space, metric, _alpha_params("jqt", args.alpha))
        if args.strategy == "jrqt":
            return front_jrqt(space, metric, _alpha_params("jrqt", args.alpha))
        return front_rate_quality(space, metric)

    fronts = _parallel(one, list(spaces.values()), int(args.workers))
    if fronts:
        args.out.mkdir(parents=True, exist_ok=True)
    for seq, front in zip(spaces, fronts):
        (args.out / f"{seq}.front.json").write_text(front.to_json())
        print(f"{seq}: {len(front)} front points")
    return EXIT_OK


def make_ladder(space: ParameterSpace, strategy: str, metric: QualityMetric,
                targets: TargetBitrateSet, alpha=None, tau_limit=None, pairs=None,
                pairs_name: str = "hls-default") -> Ladder:
    if strategy in ("jqt", "jrqt", "jrqt-nonmono"):
        if strategy == "jqt":
            front = front_jqt(space, metric, _alpha_params("jqt", alpha))
        else:
            front = front_jrqt(space, metric, _alpha_params("jrqt", alpha))
        return build_ladder(front, targets, monotonic=strategy != "jrqt-nonmono")
    if strategy == "fixed":
        return ladder_fixed(space, targets, pairs if pairs is not None else model.default_pairs(),
                            metric, pairs_name=pairs_name)
    if strategy == "default":
        return ladder_default(space, targets, metric)
    if strategy == "dynres":
        return ladder_dynres(space, targets, metric)
    if strategy == "timecap":
        if tau_limit is None:
            raise UsageError("strategy timecap needs --tau-limit")
        return ladder_time_capped(space, targets, metric, float(tau_limit))
    raise UsageError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")


def cmd_ladder(args) -> int:
    if args.strategy not in STRATEGIES:
        raise UsageError(f"ladder --strategy must be one of {', '.join(STRATEGIES)}")
    if args.strategy == "timecap" and args.tau_limit is None:
        raise UsageError("strategy timecap needs --tau-limit")
    metric = QualityMetric.parse(args.metric)
    targets = _targets(args)
    pairs, pairs_name = None, "hls-default"
    if args.pairs is not None:
        pairs_path = Path(args.pairs)
        pairs, pairs_name = model.read_pairs(pairs_path.read_text()), pairs_path.name
    spaces = _load(args.input, args, args.sequence)

    def one(space):
        return make_ladder(space, args.strategy, metric, targets, args.alpha, args.tau_limit,
                           pairs, pairs_name)

    ladders = _parallel(one, list(spaces.values()), int(args.workers))
    if ladders:
        args.out.mkdir(parents=True, exist_ok=True)
    for ladder in ladders:
        (args.out / f"{ladder.sequence_id}.ladder.json").write_text(ladder.to_json())
        carried = sum(r.carried for r in ladder.rungs)
        line = f"{ladder.sequence_id}: {len(ladder)} rungs"
        if carried:
            line += f", {carried} carried"
        if ladder.omitted_targets:
            line += ", omitted " + ",".join(f"{t:g}" for t in ladder.omitted_targets)
        if not ladder.monotonic:
            line += ", quality monotonicity not enforced"
        print(line)
    return EXIT_OK


def read_ladders(directory: Path) -> dict[str, Ladder]:
    files = sorted(directory.glob("*.ladder.json"))
    if not files:
        raise FileNotFoundError(f"no *.ladder.json files in {directory}")
    ladders = {}
    for f in files:
        ladder = Ladder.from_json(f.read_text())
        ladders[ladder.sequence_id] = ladder
    return ladders


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", name).strip("_") or "method"


def cmd_compare(args) -> int:
    reference = read_ladders(args.reference)
    args.out.mkdir(parents=True, exist_ok=True)
    reports = _parallel(lambda d: compare(read_ladders(d), reference), list(args.methods),
                        int(args.workers))
    used = set()
    for directory, rep in zip(args.methods, reports):
        stem = _slug(directory.name)
        while stem in used:
            stem += "_"
        used.add(stem)
        (args.out / f"{stem}.report.json").write_text(rep.to_json())
        (args.out / f"{stem}.report.csv").write_text(rep.to_csv())
        agg = rep.aggregate
        bdr, dt = agg["bdr_xpsnr"]["mean"], agg["delta_t_d"]["mean"]
        print(f"{stem}: BDR_X {_num(bdr)} %, dT_D {_num(dt)} %, "
              f"{len(rep.sequences)} sequences, {len(rep.failures)} failure(s)")
    if len(reports) > 1:
        (args.out / "tradeoff.csv").write_text(tradeoff_table([r.to_dict() for r in reports]))
    return EXIT_OK


def _num(v) -> str:
    return "n/a" if v is None else f"{v:.2f}"


def cmd_synth(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    overrides = {}
    for key, attr in (("spatial_complexity", "spatial"), ("temporal_complexity", "temporal"),
                      ("luminance", "luminance"), ("noise_level", "noise_level"),
                      ("time_energy_slope", "energy_slope")):
        if getattr(args, attr) is not None:
            overrides[key] = getattr(args, attr)
    try:
        spaces = synth.generate_corpus(args.count, int(args.seed), **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(model.to_csv(spaces))
    print(f"wrote {len(spaces)} sequences to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    paths = []
    for p in args.reports:
        paths += sorted(p.glob("*.report.json")) if p.is_dir() else [p]
    if not paths:
        raise UsageError("no comparison reports found")
    reports = [json.loads(p.read_text()) for p in paths]
    written = write_report(reports, args.out, bins=int(args.bins), figures=not args.no_figures)
    for p in written:
        print(p)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "front": cmd_front,
    "ladder": cmd_ladder,
    "compare": cmd_compare,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _resolve(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rqtladder {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MeasurementError as exc:
        print(f"rqtladder {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"rqtladder {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LadderError, ValueError) as exc:
        print(f"rqtladder {args.command}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
