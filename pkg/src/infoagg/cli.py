"""Command-line front end: ``infoagg example|diagnose|simulate``.

Every run writes its tables as CSV (17 significant digits), a JSON summary
and a ``manifest.json`` into ``--out``; the manifest path goes to stdout and
failed checks go to stderr.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration,
3 weight sequence rejected by the Jamison condition.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .aggregators import AggregatorSpec, aggregate, efficient_from_predictions
from .diagnostics import DEFAULT_SUBSET_BUDGET, diagnose
from .errors import InfoAggError, InvalidConfig, JamisonViolation
from .experiments import (
    Corollary1Config,
    Example1Config,
    Example3Config,
    WeightRule,
    run_corollary1,
    run_example1,
    run_example2,
    run_example3,
)
from .forecasters import InformationMenu, NoiseModel, calibrate
from .io import digest, load_config, problem_from_doc, problem_to_doc, write_csv, write_json
from .prob_core import Partition, ProbabilitySpace, RandomVariable

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_JAMISON = 0, 1, 2, 3

ANCHORS = {
    "example1": "two-expert linear pool with shared information",
    "example2": "fair-die example with two partially informed forecasters",
    "example3": "interleaved-partition example of an efficient strict mean",
    "simulate": "limit of weighted means of noisy calibrated forecasters",
    "jamison": "counting-function condition for consistent weighted means",
    "marginal_consistency": "aggregate mean equals the prior mean",
    "calibration": "aggregate equals E(Y | aggregate)",
    "extremizing": "aggregate variance dominates every subset's efficient aggregate",
    "efficiency": "aggregate equals E(Y | all predictions) almost surely",
}


@dataclass
class Outcome:
    """What a command produced, before the manifest is written."""

    config: dict
    outputs: list[Path] = field(default_factory=list)
    checks: dict[str, tuple[bool, str]] = field(default_factory=dict)
    enforce: bool = True


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON configuration file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    common.add_argument("--seed", type=_u64, default=None, help="master seed (default: config value or 0)")
    common.add_argument("--quiet", action="store_true", help="only report failures on stderr")

    parser = argparse.ArgumentParser(prog="infoagg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", parents=[common], help="reproduce one of the worked examples")
    ex.add_argument("which", type=int, choices=(1, 2, 3))
    ex.add_argument("--v1", type=float, help="example 1: variance of expert 1's private signal")
    ex.add_argument("--v2", type=float, help="example 1: variance of expert 2's private signal")
    ex.add_argument("--v12", type=float, help="example 1: variance of the shared signal")
    ex.add_argument("--atoms", type=int, help="example 1: support points per signal")
    ex.add_argument("--omega", type=float, help="example 3: evaluation point in (0, 1)")
    ex.add_argument("--depth", type=int, help="example 3: sequence terms per side")

    sub.add_parser("diagnose", parents=[common], help="run diagnostics for configured aggregators")
    sub.add_parser("simulate", parents=[common], help="noisy-forecaster convergence simulation")
    return parser


def _config_doc(args) -> dict:
    return load_config(args.config) if args.config else {}


def _resolve_seed(args, doc: dict) -> int:
    """--seed wins over the config's ``seed``, which wins over 0."""
    seed = doc.pop("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise InvalidConfig("seed must be an unsigned 64-bit integer")
    return seed if args.seed is None else args.seed


def _checks(report_checks: dict[str, bool], anchor: str) -> dict[str, tuple[bool, str]]:
    return {k: (bool(v), anchor) for k, v in report_checks.items()}


# example

_EX1_FLAGS = {"v1": "v1", "v2": "v2", "v12": "v12", "atoms": "atoms_per_signal"}
_EX3_FLAGS = {"omega": "omega", "depth": "depth"}


def _overrides(args, doc: dict, allowed: dict[str, str]) -> dict:
    doc = dict(doc)
    for flag in (*_EX1_FLAGS, *_EX3_FLAGS):
        value = getattr(args, flag)
        if value is None:
            continue
        if flag not in allowed:
            raise InvalidConfig(f"--{flag} does not apply to example {args.which}")
        doc[allowed[flag]] = value
    return doc


def cmd_example(args, doc: dict, out: Path) -> Outcome:
    name = f"example{args.which}"
    if args.which == 1:
        cfg = Example1Config.from_dict(_overrides(args, doc, _EX1_FLAGS))
        cfg.validate()
        report = run_example1(cfg)
        summary, resolved = report.to_dict(), asdict(cfg)
    elif args.which == 2:
        _overrides(args, doc, {})
        if doc:
            raise InvalidConfig("example 2 takes no configuration")
        report = run_example2()
        resolved = {}
        summary = {
            "x1": report.x1,
            "x2": report.x2,
            "efficient": report.efficient,
            "hull_positions": [p.value for p in report.positions],
            "checks": report.checks,
        }
    else:
        cfg = Example3Config.from_dict(_overrides(args, doc, _EX3_FLAGS))
        report = run_example3(cfg)
        summary, resolved = report.to_dict(), asdict(cfg)
    header, rows = report.table()
    outcome = Outcome(resolved)
    outcome.outputs.append(write_csv(out / f"{name}.csv", header, rows))
    outcome.outputs.append(write_json(out / f"{name}.json", summary))
    outcome.checks = _checks(report.checks, ANCHORS[name])
    return outcome


# diagnose

def _forecaster_predictions(space: ProbabilitySpace, y: RandomVariable, entries) -> tuple[list, list]:
    """Each entry gives either information ``blocks`` (calibrated from y) or raw ``values``."""
    if not isinstance(entries, list) or len(entries) < 1:
        raise InvalidConfig("forecasters must be a non-empty list")
    infos, preds = [], []
    for i, e in enumerate(entries):
        if not isinstance(e, dict) or ("blocks" in e) == ("values" in e):
            raise InvalidConfig(f"forecaster {i} needs exactly one of 'blocks' or 'values'")
        if "blocks" in e:
            g = Partition.from_dict(e, space.n_outcomes)
            infos.append(g)
            preds.append(calibrate(space, y, g).prediction)
        else:
            infos.append(None)
            preds.append(RandomVariable.from_dict(space, e))
    return infos, preds


def cmd_diagnose(args, doc: dict, out: Path, seed: int) -> Outcome:
    known = {"space", "outcome", "forecasters", "aggregators", "calibration_tol", "subset_budget"}
    extra = set(doc) - known
    if extra:
        raise InvalidConfig(f"unknown diagnose fields {sorted(extra)}")
    for key in ("space", "outcome", "forecasters", "aggregators"):
        if key not in doc:
            raise InvalidConfig(f"diagnose config needs '{key}'")
    space, y, _ = problem_from_doc({"space": doc["space"], "outcome": doc["outcome"]})
    infos, preds = _forecaster_predictions(space, y, doc["forecasters"])
    entries = doc["aggregators"]
    if not isinstance(entries, list) or not entries:
        raise InvalidConfig("at least one aggregator is required")
    tol = float(doc.get("calibration_tol", 1e-10))
    budget = int(doc.get("subset_budget", DEFAULT_SUBSET_BUDGET))

    x_eff = efficient_from_predictions(space, y, preds)
    reports = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise InvalidConfig("each aggregator must be a mapping")
        entry = dict(entry)
        name = entry.pop("name", None)
        if entry.get("kind") == "efficient":
            if set(entry) != {"kind"}:
                raise InvalidConfig("the efficient aggregator takes no parameters")
            x, label = x_eff, "efficient"
        else:
            spec = AggregatorSpec.from_dict(entry)
            x, label = aggregate(spec, preds), spec.label
        reports.append(diagnose(space, y, preds, x, name or label, tol, budget, seed, x_eff=x_eff))

    header = ["subject", "marginal_gap", "calibration_gap", "extremizing_violations",
              "inefficiency_prob", "var_x", "var_recalibrated", "var_efficient"]
    rows = [[r.subject, r.marginal_gap, r.calibration_gap, len(r.extremizing_violations),
             r.inefficiency_prob, r.var_x, r.var_recalibrated, r.var_efficient] for r in reports]
    outcome = Outcome(dict(doc), enforce=False)
    outcome.outputs.append(write_csv(out / "report.csv", header, rows))
    outcome.outputs.append(write_csv(
        out / "checks.csv", ["check", "subject", "gap_or_prob", "pass"],
        [row for r in reports for row in r.rows()],
    ))
    outcome.outputs.append(write_json(out / "summary.json", {"reports": [r.to_dict() for r in reports]}))
    if all(g is not None for g in infos):
        outcome.outputs.append(write_json(out / "problem.json", problem_to_doc(space, y, infos)))
    for r in reports:
        for check, subject, _, ok in r.rows():
            outcome.checks[f"{subject}:{check}"] = (bool(ok), ANCHORS[check])
    return outcome


# simulate

def corollary1_config_from_dict(doc: dict, seed: int) -> Corollary1Config:
    known = {"space", "outcome", "menu", "noise", "n_max", "weight_rule", "realized_outcome", "t_max"}
    extra = set(doc) - known
    if extra:
        raise InvalidConfig(f"unknown simulate fields {sorted(extra)}")
    for key in ("space", "outcome", "menu", "noise"):
        if key not in doc:
            raise InvalidConfig(f"simulate config needs '{key}'")
    space, y, _ = problem_from_doc({"space": doc["space"], "outcome": doc["outcome"]})
    menu = InformationMenu.from_dict(doc["menu"], space.n_outcomes)
    cfg = Corollary1Config(
        space=space,
        y=y,
        menu=menu,
        noise=NoiseModel.from_dict(doc["noise"]),
        n_max=int(doc.get("n_max", 10_000)),
        weight_rule=WeightRule.from_dict(doc.get("weight_rule", "equal")),
        seed=seed,
        realized_outcome=int(doc.get("realized_outcome", 0)),
        t_max=float(doc.get("t_max", 10_000.0)),
    )
    cfg.validate()
    return cfg


def cmd_simulate(args, doc: dict, out: Path, seed: int) -> Outcome:
    cfg = corollary1_config_from_dict(doc, seed)
    result = run_corollary1(cfg)
    header, rows = result.table()
    outcome = Outcome(dict(doc))
    outcome.outputs.append(write_csv(out / "trace.csv", header, rows))
    summary = result.summary()
    summary["jamison_horizon"] = result.jamison.horizon
    outcome.outputs.append(write_json(out / "summary.json", summary))
    outcome.checks = _checks(result.checks, ANCHORS["simulate"])
    outcome.checks["jamison_consistent"] = (result.jamison.consistent, ANCHORS["jamison"])
    return outcome


def _write_manifest(out: Path, command: str, seed: int, outcome: Outcome, code: int) -> Path:
    manifest = {
        "command": command,
        "config": outcome.config,
        "config_digest": digest({"command": command, "config": outcome.config, "seed": seed}),
        "seed": seed,
        "version": __version__,
        "outputs": [p.name for p in outcome.outputs],
        "checks": {k: {"pass": ok, "anchor": anchor} for k, (ok, anchor) in sorted(outcome.checks.items())},
        "exit_code": code,
    }
    return write_json(out / "manifest.json", manifest)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = f"example {args.which}" if args.command == "example" else args.command
    try:
        doc = _config_doc(args)
        seed = _resolve_seed(args, doc)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "example":
            outcome = cmd_example(args, doc, args.out)
        elif args.command == "diagnose":
            outcome = cmd_diagnose(args, doc, args.out, seed)
        else:
            outcome = cmd_simulate(args, doc, args.out, seed)
    except JamisonViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_JAMISON
    except (InfoAggError, KeyError, TypeError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failed = [k for k, (ok, _) in sorted(outcome.checks.items()) if not ok]
    code = EXIT_CHECK if outcome.enforce and failed else EXIT_OK
    path = _write_manifest(args.out, command, seed, outcome, code)
    for k in failed:
        label = "FAILED" if outcome.enforce else "not satisfied"
        print(f"check {label}: {k} ({outcome.checks[k][1]})", file=sys.stderr)
    if not args.quiet:
        print(f"{command}: {len(outcome.checks) - len(failed)}/{len(outcome.checks)} checks passed", file=sys.stderr)
    print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
