"""
Command-line front end for the determinant uncertainty checks.

    python cli_harness.py compute --instance qubit.json --check robertson
    python cli_harness.py compute --seed 17 --n 3 --N 2 --check hierarchy --f wy
    python cli_harness.py sweep --check hierarchy --f wy --n 3 --N 2 --trials 1000 --seed 0
    python cli_harness.py catalog
    python cli_harness.py sample --n 3 --N 2 --seed 17 --out instance.json

Exit codes: 0 all PASS (sweep: no FAIL), 1 FAIL or internal-consistency
error, 2 hypothesis not met, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from disclaimers import build_disclaimer
from inequality_suite import (
    DET_TOL,
    Direction,
    HypothesisGrid,
    InequalityReport,
    Verdict,
    check_cross_theorem,
    check_hierarchy,
    check_main_inequality,
    check_ordering_theorem,
    check_robertson_schrodinger,
    check_schrodinger,
)
from monotone_functions import (
    CLASSICAL,
    CMKernel,
    FopSpec,
    KernelKind,
    asymmetric_kernel,
    catalog_entries,
    parse_kernel,
    parse_spec,
    wyd,
)
from quantum_states import DensityMatrix, ObservableTuple, instance_to_json, load_instance, sample_instance
from utils.safety import safeguard
from validation import (
    POSITIVITY_FLOOR,
    DomainError,
    InternalConsistencyError,
    ValidationError,
    erratum_evidence,
    validate,
)
from versioning import finalize_provenance, get_initial_provenance

logger = logging.getLogger(__name__)

CHECKS = ("hierarchy", "main", "cross", "robertson", "schrodinger", "ordering")
OUTPUT_DIR_ENV = "MONOTONE_UNCERTAINTY_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"
SUMMARY_COLUMNS = ["check", "trial", "n", "N", "f1", "f2", "seed", "name", "lhs", "rhs", "margin", "verdict"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_HYPOTHESIS = 2
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors raised as input errors (exit 3, not 2)."""

    def error(self, message):
        raise ValidationError(message, invariant="arguments")


# --------------------------------------------------------------------------
# Check configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckParams:
    """Everything a check needs besides the instance."""

    check: str
    functions: Tuple[FopSpec, ...]
    f2: Optional[FopSpec] = None
    g1: Optional[CMKernel] = None
    g2: Optional[CMKernel] = None
    direction: Direction = Direction.AS_GEQ_S
    tol_det: float = DET_TOL
    grid: HypothesisGrid = HypothesisGrid()

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValidationError(f"unknown check {self.check!r}; expected one of {', '.join(CHECKS)}",
                                  field="--check", invariant="check")
        if self.check in ("cross", "ordering") and self.f2 is None:
            raise ValidationError(f"check {self.check} needs a second function", field="--f2",
                                  invariant="check")
        if not self.functions:
            raise ValidationError("no function specs given", field="--f", invariant="function-spec")
        if self.tol_det <= 0:
            raise ValidationError("must be positive", field="--tol-det", invariant="tolerance")
        if self.grid.points < 2:
            raise ValidationError("must be at least 2", field="--grid-points", invariant="grid")

    def kernel_pairs(self) -> List[Tuple[CMKernel, CMKernel]]:
        if self.g2 is not None:
            return [(self.g1 or CLASSICAL, self.g2)]
        return [(self.g1 or CLASSICAL, asymmetric_kernel(f)) for f in self.functions]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "functions": [f.label for f in self.functions],
            "f2": self.f2.label if self.f2 else None,
            "kernel_pairs": [[g1.label, g2.label] for g1, g2 in self.kernel_pairs()],
            "direction": self.direction.value,
            "tol_det": self.tol_det,
            "grid": {"points": self.grid.points, "lo": self.grid.lo, "hi": self.grid.hi,
                     "tol": self.grid.tol},
        }


def run_check(params: CheckParams, D: DensityMatrix, obs: ObservableTuple,
              seed: Optional[int] = None) -> List[InequalityReport]:
    """Run one named check on one instance."""
    check = params.check
    common = {"tol_det": params.tol_det, "seed": seed}
    if check == "robertson":
        return [check_robertson_schrodinger(D, obs, **common)]
    if check == "schrodinger":
        return [check_schrodinger(D, obs, **common)]
    reports: List[InequalityReport] = []
    if check == "main":
        for g1, g2 in params.kernel_pairs():
            reports.append(check_main_inequality(D, g1, g2, obs, params.grid, **common))
        return reports
    for f in params.functions:
        if check == "hierarchy":
            reports.extend(check_hierarchy(D, f, obs, params.grid, **common))
        elif check == "cross":
            reports.append(check_cross_theorem(f, params.f2, D, obs, params.direction, params.grid, **common))
        else:
            reports.extend(check_ordering_theorem(D, f, params.f2, obs, params.grid, **common))
    return reports


def _parse_functions(text: str, beta: Optional[float]) -> Tuple[FopSpec, ...]:
    specs = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if token.lower() == "wyd" and beta is not None:
            try:
                specs.append(wyd(beta))
            except DomainError as exc:
                raise ValidationError(str(exc), field="--beta", invariant="function-spec") from None
        else:
            specs.append(parse_spec(token))
    return tuple(specs)


def _parse_range(text: str, flag: str) -> Tuple[int, ...]:
    """``3``, ``2-4`` or ``2,3``."""
    try:
        if "-" in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            values = tuple(range(lo, hi + 1))
        else:
            values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValidationError(f"expected an integer, a range a-b or a list a,b; got {text!r}",
                              field=flag, invariant="range") from None
    if not values:
        raise ValidationError(f"empty range {text!r}", field=flag, invariant="range")
    return values


def _check_params(args: argparse.Namespace) -> CheckParams:
    return CheckParams(
        check=args.check,
        functions=_parse_functions(args.f, args.beta),
        f2=_parse_functions(args.f2, args.beta)[0] if args.f2 else None,
        g1=parse_kernel(args.g1) if args.g1 else None,
        g2=parse_kernel(args.g2) if args.g2 else None,
        direction=Direction(args.direction),
        tol_det=args.tol_det,
        grid=HypothesisGrid(points=args.grid_points),
    )


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    params: CheckParams
    n_values: Tuple[int, ...]
    N_values: Tuple[int, ...]
    trials: int
    seed: int
    min_gap: float = 0.0
    positivity_floor: float = POSITIVITY_FLOOR
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    output_format: str = "both"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("must be at least 1", field="--trials", invariant="sweep-config")
        if min(self.n_values) < 2:
            raise ValidationError("dimensions must be at least 2", field="--n", invariant="sweep-config")
        if min(self.N_values) < 1:
            raise ValidationError("tuple sizes must be at least 1", field="--N", invariant="sweep-config")
        if self.params.check == "schrodinger" and set(self.N_values) != {2}:
            raise ValidationError("the schrodinger check needs N = 2", field="--N", invariant="sweep-config")
        if self.min_gap < 0:
            raise ValidationError("must be nonnegative", field="--min-gap", invariant="sweep-config")
        if self.workers < 1:
            raise ValidationError("must be at least 1", field="--workers", invariant="sweep-config")
        if self.output_format not in ("json", "csv", "both"):
            raise ValidationError(f"unknown format {self.output_format!r}", field="--format",
                                  invariant="sweep-config")

    @property
    def shapes(self) -> List[Tuple[int, int]]:
        return [(n, N) for n in self.n_values for N in self.N_values]

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.params.to_dict(),
            "n": list(self.n_values),
            "N": list(self.N_values),
            "trials": self.trials,
            "seed": self.seed,
            "min_gap": self.min_gap,
            "positivity_floor": self.positivity_floor,
            "format": self.output_format,
        }


@dataclass(frozen=True)
class Trial:
    config: SweepConfig
    index: int

    @property
    def seed(self) -> int:
        return self.config.seed + self.index

    @property
    def shape(self) -> Tuple[int, int]:
        shapes = self.config.shapes
        return shapes[self.index % len(shapes)]

    @property
    def output_dir(self) -> Path:
        return self.config.output_dir

    def replay(self) -> Dict[str, Any]:
        n, N = self.shape
        params = self.config.params
        return {
            "trial": self.index,
            "seed": self.seed,
            "n": n,
            "N": N,
            "min_gap": self.config.min_gap,
            "positivity_floor": self.config.positivity_floor,
            "check": params.check,
            "f": [f.label for f in params.functions],
            "f2": params.f2.label if params.f2 else None,
        }


@safeguard("sweep_trial")
def run_trial(trial: Trial) -> List[Dict[str, Any]]:
    n, N = trial.shape
    D, obs = sample_instance(n, N, trial.seed, trial.config.min_gap, trial.config.positivity_floor)
    records = []
    for report in run_check(trial.config.params, D, obs, seed=trial.seed):
        record = report.to_dict()
        record.update({"check": trial.config.params.check, "trial": trial.index, "seed": trial.seed,
                       "n": n, "N": N, "min_gap": trial.config.min_gap,
                       "positivity_floor": trial.config.positivity_floor})
        records.append(record)
    return records


def run_sweep(config: SweepConfig) -> List[Dict[str, Any]]:
    """Records of every trial, in trial order regardless of ``workers``."""
    trials = [Trial(config, index) for index in range(config.trials)]
    if config.workers == 1:
        batches = [run_trial(trial) for trial in trials]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(run_trial, trials))
    return [record for batch in batches for record in batch]


def summary_frame(records: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame([{column: record.get(column) for column in SUMMARY_COLUMNS} for record in records],
                        columns=SUMMARY_COLUMNS)


def write_outputs(config: SweepConfig, records: List[Dict[str, Any]], disclaimer: str) -> Dict[str, Path]:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    if config.output_format in ("json", "both"):
        paths["records"] = out / "records.jsonl"
        with open(paths["records"], "w", encoding="utf-8", newline="\n") as handle:
            for record in records:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
    if config.output_format in ("csv", "both"):
        paths["summary"] = out / "summary.csv"
        summary_frame(records).to_csv(paths["summary"], index=False, float_format="%.17g",
                                      lineterminator="\n")
    provenance = get_initial_provenance(config.to_dict())
    provenance["disclaimer"] = disclaimer
    provenance = finalize_provenance(provenance, records)
    paths["provenance"] = out / "provenance.json"
    paths["provenance"].write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def _disclaimer_for(records: Sequence[Dict[str, Any]]) -> str:
    warnings = [w for record in records for w in record.get("warnings", [])]
    return build_disclaimer(
        sampled_hypothesis=any(record.get("hypothesis") for record in records),
        has_non_regular=any(w.startswith("non-regular") for w in warnings),
        has_ill_conditioned=any("ill-conditioned" in w for w in warnings),
        has_remainder=any(record.get("remainder") is not None for record in records),
    )


def print_aggregate(config: SweepConfig, records: List[Dict[str, Any]]) -> None:
    frame = summary_frame(records)
    counts = frame["verdict"].value_counts()
    print(f"Sweep: {len(records)} records over {config.trials} trials "
          f"(check={config.params.check}, n={list(config.n_values)}, N={list(config.N_values)}, "
          f"seed={config.seed})")
    for verdict in Verdict:
        print(f"  {verdict.value:20s} {int(counts.get(verdict.value, 0)):8d}")
    decided = frame[frame["verdict"] != Verdict.HYPOTHESIS_NOT_MET.value]
    if decided.empty:
        print("  min margin: n/a (no record met its hypothesis)")
    else:
        worst = decided.loc[decided["margin"].idxmin()]
        print(f"  min margin: {worst['margin']:.6e} (seed {worst['seed']}, n={worst['n']}, "
              f"N={worst['N']}, {worst['name']})")


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _exit_code(verdicts: Sequence[str]) -> int:
    if Verdict.FAIL.value in verdicts:
        return EXIT_FAIL
    if Verdict.HYPOTHESIS_NOT_MET.value in verdicts:
        return EXIT_HYPOTHESIS
    return EXIT_OK


def _print_report(record: Dict[str, Any]) -> None:
    pairing = f" [{record['f1']}{' vs ' + record['f2'] if record['f2'] else ''}]" if record["f1"] else ""
    print(f"{record['name']}{pairing}: {record['verdict']}  lhs={record['lhs']:.12g}  "
          f"rhs={record['rhs']:.12g}  margin={record['margin']:.6e}")
    for warning in record["warnings"]:
        print(f"    warning: {warning}")


def cmd_compute(args: argparse.Namespace) -> int:
    params = _check_params(args)
    if args.instance:
        D, obs = load_instance(args.instance, args.positivity_floor)
        seed = None
    else:
        if args.seed is None or args.n is None or args.N is None:
            raise ValidationError("give --instance FILE or all of --seed, --n and --N",
                                  field="--instance", invariant="arguments")
        D, obs = sample_instance(args.n, args.N, args.seed, args.min_gap, args.positivity_floor)
        seed = args.seed
    records = [report.to_dict() for report in run_check(params, D, obs, seed=seed)]
    if args.json:
        for record in records:
            print(json.dumps(record, sort_keys=True))
    else:
        for record in records:
            _print_report(record)
        print()
        print(_disclaimer_for(records))
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(json.dumps(record, sort_keys=True) + "\n" for record in records),
                        encoding="utf-8")
    return _exit_code([record["verdict"] for record in records])


def _output_dir(out: Optional[str]) -> Path:
    return Path(out or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig(
        params=_check_params(args),
        n_values=_parse_range(args.n, "--n"),
        N_values=_parse_range(args.N, "--N"),
        trials=args.trials,
        seed=args.seed,
        min_gap=args.min_gap,
        positivity_floor=args.positivity_floor,
        output_dir=_output_dir(args.out),
        output_format=args.format,
        workers=args.workers,
    )
    logger.info("sweep configuration: %s", config.to_dict())
    records = run_sweep(config)
    disclaimer = _disclaimer_for(records)
    paths = write_outputs(config, records, disclaimer)

    print_aggregate(config, records)
    for key, path in paths.items():
        print(f"  {key:10s} -> {path}")

    findings = validate(records)
    print(f"Validation: {len(findings)} finding(s)")
    for finding in findings:
        print(f"  [{finding['status']}] {finding['rule_name']}: {finding['details']}")
    evidence = erratum_evidence(records)
    if evidence is not None:
        print(f"  det(G1)-based remainder fails at seed {evidence['seed']} ({evidence['name']}): "
              f"margin_printed={evidence['margin_printed']:.6e}, margin={evidence['margin']:.6e}")
    print()
    print(disclaimer)
    return EXIT_FAIL if any(record["verdict"] == Verdict.FAIL.value for record in records) else EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    print("Operator monotone functions")
    print(pd.DataFrame(catalog_entries()).to_string(index=False))
    print()
    print("Kernels: " + ", ".join(kind.value for kind in KernelKind))
    print("Kernel specs: cl, s:<f>, as:<f>, inv:<f>")
    print("Checks: " + ", ".join(CHECKS))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    D, obs = sample_instance(args.n, args.N, args.seed, args.min_gap, args.positivity_floor)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(instance_to_json(D, obs), indent=2) + "\n", encoding="utf-8")
    print(f"instance n={args.n} N={args.N} seed={args.seed} -> {path}")
    return EXIT_OK


def _add_check_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--check", choices=CHECKS, default="hierarchy", help="check to run (default: hierarchy)")
    parser.add_argument("--f", default="sld",
                        help="comma-separated function specs: sld, wy, km, wyd:<beta> (default: sld)")
    parser.add_argument("--f2", help="second function for the cross and ordering checks")
    parser.add_argument("--beta", type=float, help="beta for a bare 'wyd' in --f/--f2")
    parser.add_argument("--g1", help="upper kernel for --check main: cl, s:<f>, as:<f>, inv:<f> (default: cl)")
    parser.add_argument("--g2", help="lower kernel for --check main (default: as:<f> for every --f)")
    parser.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.AS_GEQ_S.value,
                        help="cross theorem direction (default: as-geq-s)")
    parser.add_argument("--tol-det", type=float, default=DET_TOL,
                        help=f"relative determinant tolerance (default: {DET_TOL:g})")
    parser.add_argument("--grid-points", type=int, default=HypothesisGrid().points,
                        help="points of the hypothesis log grid (default: 200)")
    parser.add_argument("--min-gap", type=float, default=0.0, help="sampler eigenvalue gap (default: 0)")
    parser.add_argument("--positivity-floor", type=float, default=POSITIVITY_FLOOR,
                        help=f"smallest admissible eigenvalue of D (default: {POSITIVITY_FLOOR:g})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Numerical checks of determinant uncertainty relations "
                                 "for monotone metrics.")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="run one check on one instance")
    p_compute.add_argument("--instance", help="instance JSON file")
    p_compute.add_argument("--seed", type=int, help="regenerate a sweep instance from its seed")
    p_compute.add_argument("--n", type=int, help="dimension of the regenerated instance")
    p_compute.add_argument("--N", type=int, help="number of observables of the regenerated instance")
    p_compute.add_argument("--json", action="store_true", help="print reports as JSON lines")
    p_compute.add_argument("--out", help="also write the reports as JSON lines to this file")
    _add_check_flags(p_compute)
    p_compute.set_defaults(handler=cmd_compute)

    p_sweep = sub.add_parser("sweep", help="seeded randomized sweep")
    p_sweep.add_argument("--n", default="2-4", help="dimensions: 3, 2-4 or 2,3 (default: 2-4)")
    p_sweep.add_argument("--N", default="1-3", help="tuple sizes: 2, 1-3 or 1,2 (default: 1-3)")
    p_sweep.add_argument("--trials", type=int, default=100, help="number of trials (default: 100)")
    p_sweep.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed + i (default: 0)")
    p_sweep.add_argument("--out", help=f"output directory (default: ${OUTPUT_DIR_ENV} or {DEFAULT_OUTPUT_DIR}/)")
    p_sweep.add_argument("--format", choices=("json", "csv", "both"), default="both",
                         help="record outputs to write (default: both)")
    p_sweep.add_argument("--workers", type=int, default=1, help="worker threads (default: 1)")
    _add_check_flags(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_catalog = sub.add_parser("catalog", help="list functions, kernels and checks")
    p_catalog.set_defaults(handler=cmd_catalog)

    p_sample = sub.add_parser("sample", help="write a seeded instance to a JSON file")
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--N", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--min-gap", type=float, default=0.0)
    p_sample.add_argument("--positivity-floor", type=float, default=POSITIVITY_FLOOR)
    p_sample.add_argument("--out", required=True, help="instance file to write")
    p_sample.set_defaults(handler=cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_INPUT
    except (ValidationError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
