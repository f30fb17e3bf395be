#!/usr/bin/env python3
"""Map how much number noise each certification criterion survives.

For Gaussian dephasing noise on flat-phase states the product criteria stop
firing once the number variance crosses a threshold; this script locates the
crossing by bisection for several mean occupations and compares it to the
large-mean rules of thumb (mean/2 for entanglement, mean/8 for steering).
For Poissonian and thermal dephasing it tabulates the margins directly,
showing that those mixtures never get certified at any mean.
"""
from __future__ import annotations

import argparse
import json
import math
import os
from dataclasses import dataclass

from npsteer import np_entanglement, np_steering, observable_report, parse_state_spec


@dataclass(frozen=True)
class RobustnessConfig:
    out_dir: str
    means: tuple[float, ...] = (50.0, 100.0, 200.0, 400.0)
    bisection_steps: int = 40


def dephased_report(noise: dict):
    spec = json.dumps(
        {"family": "mixture", "base": "number_phase", "noise": noise}
    )
    return observable_report(parse_state_spec(spec).build())


def gaussian_report(mean: float, std: float):
    return dephased_report({"kind": "gaussian", "mean": mean, "std": std})


def crossing(criterion, mean: float, steps: int) -> tuple[float, float]:
    """Largest tolerable noise width and the number variance there."""
    lo, hi = 0.5, math.sqrt(mean)
    while criterion(gaussian_report(mean, hi)).margin > 0.0:
        hi *= 1.5
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if criterion(gaussian_report(mean, mid)).margin > 0.0:
            lo = mid
        else:
            hi = mid
    std = 0.5 * (lo + hi)
    return std, gaussian_report(mean, std).n_var


def gaussian_table(config: RobustnessConfig) -> list[list[float]]:
    rows = []
    print("Gaussian dephasing on flat-phase states")
    print(f"{'mean':>8} {'ent std*':>10} {'ent n_var*':>11} {'/ (mean/2)':>10} "
          f"{'steer std*':>10} {'steer n_var*':>12} {'/ (mean/8)':>10}")
    for mean in config.means:
        ent_std, ent_var = crossing(np_entanglement, mean, config.bisection_steps)
        steer_std, steer_var = crossing(np_steering, mean, config.bisection_steps)
        rows.append([mean, ent_std, ent_var, steer_std, steer_var])
        print(
            f"{mean:8.0f} {ent_std:10.3f} {ent_var:11.2f} "
            f"{ent_var / (mean / 2.0):10.4f} {steer_std:10.3f} "
            f"{steer_var:12.2f} {steer_var / (mean / 8.0):10.4f}"
        )
    return rows


def dephasing_table(name: str, means: tuple[float, ...]) -> list[list[float]]:
    rows = []
    print(f"\n{name.capitalize()} dephasing on flat-phase states")
    print(f"{'mean':>8} {'d2_rel':>10} {'n_var':>10} {'ent margin':>11} {'steer margin':>13}")
    for mean in means:
        report = dephased_report({"kind": name, "mean": mean})
        ent, steer = np_entanglement(report), np_steering(report)
        rows.append([mean, report.d2_rel, report.n_var, ent.margin, steer.margin])
        print(
            f"{mean:8.2f} {report.d2_rel:10.5f} {report.n_var:10.3f} "
            f"{ent.margin:11.4f} {steer.margin:13.4f}"
        )
    return rows


def write_rows(path: str, columns: tuple[str, ...], rows: list[list[float]]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        fh.writelines(",".join(repr(float(x)) for x in row) + "\n" for row in rows)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="noise_data", help="output directory")
    parser.add_argument("--steps", type=int, default=40, help="bisection iterations")
    args = parser.parse_args(argv)
    config = RobustnessConfig(out_dir=args.out_dir, bisection_steps=args.steps)
    os.makedirs(config.out_dir, exist_ok=True)

    rows = gaussian_table(config)
    write_rows(
        os.path.join(config.out_dir, "gaussian_thresholds.csv"),
        ("mean", "ent_std", "ent_n_var", "steer_std", "steer_n_var"),
        rows,
    )
    small_means = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
    for name in ("poissonian", "thermal"):
        rows = dephasing_table(name, small_means)
        write_rows(
            os.path.join(config.out_dir, f"{name}_margins.csv"),
            ("mean", "d2_rel", "n_var", "ent_margin", "steer_margin"),
            rows,
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
