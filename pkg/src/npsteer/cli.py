"""Command-line front end.

Subcommands:

    eval    evaluate all observables and criterion verdicts on one state
    sweep   evaluate verdict margins along a parameter range
    sample  draw local-phase samples and estimate the dispersion
    curves  emit the boundary curves for the two figures

Exit codes: 0 success (verdict content never changes it), 1 an --assert
expectation failed, 2 malformed input (spec, flags, empty range), 3 the
requested truncation is unattainable.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .criteria import CriterionVerdict, all_verdicts, boundary_curves, sampled_np_verdicts
from .fock import TruncationError
from .observables import REPORT_FIELDS, ObservableReport, number_moments, observable_report
from .phase_povm import (
    estimate_relative_dispersion,
    relative_phase_density,
    sample_local_phases,
    write_samples_csv,
)
from .statespec import StateSpec, StateSpecError, load_state_spec

EVAL_CRITERIA = (
    "NP_ENT",
    "NP_STEER",
    "NAIVE_ENT",
    "NAIVE_STEER",
    "HZ_ENT",
    "HZ_STEER_A_BY_B",
    "HZ_STEER_B_BY_A",
)

DEFAULT_SHOTS = 10_000
DEFAULT_SEED = 0
DEFAULT_Z = 5.0
DEFAULT_CURVE_RANGE = "d2:0.005:1.0:0.005"

SWEEP_VARS = ("N", "r", "mean", "std", "transmissivity")

CURVE_COLUMNS = (
    "d2",
    "ent_threshold",
    "steer_threshold",
    "ur_sum_bound",
    "ur_flat_reference",
    "ur_min_d2",
)

SWEEP_COLUMNS = (
    "parameter",
    "n_var",
    "d2_rel",
    "np_ent_margin",
    "np_steer_margin",
    "naive_ent_margin",
    "naive_steer_margin",
    "naive_applicable",
    "hz_ent_margin",
    "hz_steer_a_by_b_margin",
    "hz_steer_b_by_a_margin",
)


@dataclass(frozen=True)
class RunConfig:
    """Validated flag set for one invocation."""

    command: str
    state: str | None = None
    out: str | None = None
    format: str | None = None
    shots: int = DEFAULT_SHOTS
    seed: int = DEFAULT_SEED
    grid: int | None = None
    tail_tol: float | None = None
    sweep: str | None = None
    z: float = DEFAULT_Z
    assert_spec: str | None = None


class _UsageError(Exception):
    """Bad flags or malformed input; maps to exit code 2."""


def _color_enabled() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _verdict_line(v: CriterionVerdict) -> str:
    word = "VIOLATED" if v.violated else "not violated"
    if _color_enabled():
        word = f"\x1b[31m{word}\x1b[0m" if v.violated else f"\x1b[32m{word}\x1b[0m"
    line = (
        f"{v.criterion_id:<16} {word:<12}  lhs={v.lhs:.12g}  bound={v.bound:.12g}  "
        f"margin={v.margin:.12g}"
    )
    if v.advisory:
        line += f"  [{v.advisory}]"
    return line


def _parse_range(text: str, expected_var: tuple[str, ...]) -> tuple[str, np.ndarray]:
    parts = text.split(":")
    if len(parts) != 4:
        raise _UsageError(f"range must look like var:lo:hi:step, got {text!r}")
    var = parts[0]
    if var not in expected_var:
        raise _UsageError(
            f"unknown sweep variable {var!r}; expected one of {', '.join(expected_var)}"
        )
    try:
        lo, hi, step = (float(p) for p in parts[1:])
    except ValueError as exc:
        raise _UsageError(f"non-numeric range bound in {text!r}: {exc}") from exc
    if step <= 0:
        raise _UsageError(f"range step must be > 0, got {step!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise _UsageError(f"range {text!r} contains no points")
    values = lo + step * np.arange(count)
    return var, values


def _parse_assert(text: str) -> dict[str, bool]:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise _UsageError(f"assert item {item!r} must look like ID=violated|ok")
        cid, _, want = item.partition("=")
        want = want.strip().lower()
        if want not in ("violated", "ok", "not_violated"):
            raise _UsageError(f"assert value for {cid!r} must be 'violated' or 'ok'")
        out[cid.strip()] = want == "violated"
    if not out:
        raise _UsageError("empty --assert expression")
    return out


def _check_asserts(spec: str | None, verdicts: list[CriterionVerdict]) -> int:
    if spec is None:
        return 0
    wanted = _parse_assert(spec)
    by_id = {v.criterion_id: v for v in verdicts}
    unknown = sorted(set(wanted) - set(by_id))
    if unknown:
        raise _UsageError(
            f"--assert names unknown criteria {', '.join(unknown)}; "
            f"this run produced {', '.join(by_id)}"
        )
    failures = [
        f"{cid}: expected {'violated' if want else 'ok'}, got "
        f"{'violated' if by_id[cid].violated else 'ok'}"
        for cid, want in wanted.items()
        if by_id[cid].violated is not want
    ]
    if failures:
        for line in failures:
            print(f"ASSERT FAILED  {line}")
        return 1
    print(f"ASSERT OK  ({len(wanted)} expectation(s) matched)")
    return 0


def _load_spec(config: RunConfig) -> StateSpec:
    if not config.state:
        raise _UsageError("--state is required for this command")
    return load_state_spec(config.state)


def _spec_echo(spec: StateSpec) -> dict:
    return {"family": spec.family, **spec.params}


def _eval_payload(spec, report, verdicts) -> dict:
    return {
        "spec": _spec_echo(spec),
        "report": report.to_json_dict(),
        "verdicts": [v.to_json_dict() for v in verdicts],
    }


def _eval_csv(report: ObservableReport, verdicts: list[CriterionVerdict]) -> str:
    header = list(REPORT_FIELDS)
    row = list(report.to_csv_row())
    for v in verdicts:
        header += [f"{v.criterion_id.lower()}_margin", f"{v.criterion_id.lower()}_violated"]
        row += [repr(float(v.margin)), str(int(v.violated))]
    return ",".join(header) + "\n" + ",".join(row) + "\n"


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_eval(config: RunConfig) -> int:
    spec = _load_spec(config)
    state = spec.build(config.tail_tol)
    report = observable_report(state)
    density = relative_phase_density(state, config.grid)
    verdicts = all_verdicts(report, density)
    for v in verdicts:
        print(_verdict_line(v))
    if (config.format or "json") == "json":
        _emit(config, json.dumps(_eval_payload(spec, report, verdicts), indent=2) + "\n")
    else:
        _emit(config, _eval_csv(report, verdicts))
    return _check_asserts(config.assert_spec, verdicts)


def cmd_sweep(config: RunConfig) -> int:
    if not config.sweep:
        raise _UsageError("sweep requires --sweep var:lo:hi:step")
    if not config.out:
        raise _UsageError("sweep requires --out")
    if config.format == "json":
        raise _UsageError("sweep emits CSV; drop --format json")
    spec = _load_spec(config)
    var, values = _parse_range(config.sweep, SWEEP_VARS)
    rows = []
    for value in values.tolist():
        try:
            point = spec.with_param(var, value)
        except StateSpecError as exc:
            raise _UsageError(str(exc)) from exc
        state = point.build(config.tail_tol)
        report = observable_report(state)
        density = relative_phase_density(state, config.grid)
        verdicts = {v.criterion_id: v for v in all_verdicts(report, density)}
        naive_ok = int(verdicts["NAIVE_ENT"].advisory is None)
        rows.append(
            [
                repr(float(value)),
                repr(float(report.n_var)),
                repr(float(report.d2_rel)),
                repr(float(verdicts["NP_ENT"].margin)),
                repr(float(verdicts["NP_STEER"].margin)),
                repr(float(verdicts["NAIVE_ENT"].margin)),
                repr(float(verdicts["NAIVE_STEER"].margin)),
                str(naive_ok),
                repr(float(verdicts["HZ_ENT"].margin)),
                repr(float(verdicts["HZ_STEER_A_BY_B"].margin)),
                repr(float(verdicts["HZ_STEER_B_BY_A"].margin)),
            ]
        )
    with open(config.out, "w") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        fh.writelines(",".join(row) + "\n" for row in rows)
    print(f"wrote {len(rows)} sweep rows to {config.out}")
    return 0


def cmd_sample(config: RunConfig) -> int:
    if not config.out:
        raise _UsageError("sample requires --out")
    if config.shots < 1:
        raise _UsageError("--shots must be >= 1")
    spec = _load_spec(config)
    state = spec.build(config.tail_tol)
    s1, s2 = sample_local_phases(state, config.shots, config.seed, grid_size=config.grid)
    write_samples_csv(config.out, s1, s2)
    est = estimate_relative_dispersion(s1, s2)
    n_mean, n_var, _, _ = number_moments(state)
    verdicts = list(sampled_np_verdicts(n_var, est.d2_hat, est.std_error, z=config.z))
    print(
        f"d2_hat = {est.d2_hat:.6g} +/- {est.std_error:.3g} "
        f"({est.method}, {est.shots} shots)"
    )
    for v in verdicts:
        print(_verdict_line(v))
    payload = {
        "spec": _spec_echo(spec),
        "shots": config.shots,
        "seed": config.seed,
        "z": config.z,
        "d2_hat": est.d2_hat,
        "std_error": est.std_error,
        "method": est.method,
        "resamples": est.resamples,
        "n_mean": float(n_mean),
        "n_var": float(n_var),
        "verdicts": [v.to_json_dict() for v in verdicts],
    }
    est_path = config.out + ".est.json"
    with open(est_path, "w") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {config.shots} samples to {config.out}, estimate to {est_path}")
    return _check_asserts(config.assert_spec, verdicts)


def cmd_curves(config: RunConfig) -> int:
    if not config.out:
        raise _UsageError("curves requires --out")
    text = config.sweep or DEFAULT_CURVE_RANGE
    var, values = _parse_range(text, ("d2",))
    if float(values.min()) <= 0.0 or float(values.max()) > 1.0:
        raise _UsageError("curves grid must stay inside (0, 1]")
    ent = boundary_curves("ENT_FIG2", values)
    steer = boundary_curves("STEER_FIG2", values)
    ur = boundary_curves("UR_FIG1", values)
    with open(config.out, "w") as fh:
        fh.write(",".join(CURVE_COLUMNS) + "\n")
        for i, d2 in enumerate(values.tolist()):
            fh.write(
                ",".join(
                    [
                        repr(float(d2)),
                        repr(float(ent.threshold[i])),
                        repr(float(steer.threshold[i])),
                        repr(float(ur.threshold[i])),
                        repr(0.75),
                        repr(0.5),
                    ]
                )
                + "\n"
            )
    print(f"wrote {len(values)} curve rows to {config.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npsteer",
        description="Number-phase entanglement and steering calculator for two bosonic modes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("eval", "evaluate observables and criteria on one state"),
        ("sweep", "tabulate criterion margins along a parameter range"),
        ("sample", "simulate local phase measurements and estimate the dispersion"),
        ("curves", "emit boundary-curve data for plotting"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--state", help="state spec: JSON file path or inline JSON object")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="payload format for eval (default json)")
        p.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                       help=f"number of sampling shots (default {DEFAULT_SHOTS})")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"sampling seed (default {DEFAULT_SEED})")
        p.add_argument("--grid", type=int, default=None,
                       help="phase-grid size K (default: automatic per state)")
        p.add_argument("--tail-tol", type=float, default=None, dest="tail_tol",
                       help="truncation tail tolerance (default 1e-10; spec file wins)")
        p.add_argument("--sweep", default=None,
                       help="range var:lo:hi:step (sweep: N|r|mean|std|transmissivity; curves: d2)")
        p.add_argument("--z", type=float, default=DEFAULT_Z,
                       help=f"z-score for sampled verdicts (default {DEFAULT_Z})")
        p.add_argument("--assert", dest="assert_spec", default=None,
                       help="comma list ID=violated|ok; exit 1 on mismatch")
    return parser


_COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "curves": cmd_curves,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(
        command=args.command,
        state=args.state,
        out=args.out,
        format=args.format,
        shots=args.shots,
        seed=args.seed,
        grid=args.grid,
        tail_tol=args.tail_tol,
        sweep=args.sweep,
        z=args.z,
        assert_spec=args.assert_spec,
    )
    try:
        return _COMMANDS[config.command](config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StateSpecError as exc:
        print(f"error: bad state spec: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"error: truncation unattainable: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
