#!/usr/bin/env python3
"""
Recompute the empirical maxima behind config/calibration.json and print them next to the
committed ceilings. Nothing is written; edit the JSON by hand if a ceiling must move.

Usage: python3 scripts/calibrate.py [--kmax 10] [--theta-points 64]
"""

import math
import sys
from pathlib import Path

import click
import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.lab_config import load_calibration, load_lab_config
from models.plane import PlanePoint
from services.amplifier import build_sequences, parameter_from_args, sum_lower_bound_sweep, technical_sum
from services.lattice_counting import LatticeCounter
from services.quaternion_core import load_order

TECHNICAL_X = (-0.8, 0.0, 7.0)
TECHNICAL_L = (4, 8, 16, 32)


def section(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70 + "\n")


def report_line(name: str, empirical: float, ceiling: float, larger_is_worse: bool = True) -> bool:
    ok = empirical <= ceiling if larger_is_worse else empirical >= ceiling
    marker = "✅" if ok else "❌"
    print(f"{marker} {name:<34} empirical {empirical:>12.6g}   committed {ceiling:>12.6g}")
    return ok


def calibrate_technical_sum(calibration, theta_points: int) -> bool:
    section("TECHNICAL SUM (P = {2}, per-prime ratio)")
    per_prime = calibration['technical_sum']['per_prime']
    ok = True
    thetas = np.linspace(0.05, math.pi - 0.05, theta_points)
    for x in TECHNICAL_X:
        worst = 0.0
        for L in TECHNICAL_L:
            for theta in thetas:
                seqs = build_sequences((2,), [parameter_from_args('tempered', float(theta))], L)
                ratio = technical_sum(seqs, (2,), L, x)['ratio']
                if x == 0:
                    ratio /= L + 1
                worst = max(worst, ratio)
        ok &= report_line(f"x = {x:g}", worst, float(per_prime[format(x, 'g')]))
    return ok


def calibrate_growth(calibration, k_max: int) -> bool:
    section(f"GROWTH (p = 2, t = 10, z = i, k ≤ {k_max})")
    counter = LatticeCounter(load_order(load_lab_config(), validate=False))
    table, slope = counter.growth_scan(2, k_max, 10.0, PlanePoint.i())
    ok = report_line("max M/(tN²)", float(table['ratio'].max()), calibration['growth_ratio_ceiling'])
    ok &= report_line("log-log slope", slope, calibration['growth_slope_ceiling'])
    return ok


def calibrate_sweep(calibration) -> bool:
    section("LOWER BOUND SWEEP (p = 2, step 1e-3)")
    ok = True
    for L in (8, 64):
        ratio, theta, _ = sum_lower_bound_sweep(2, L)
        ok &= report_line(f"min S/L, L = {L} (θ = {theta:.3f})", ratio,
                          calibration['sweep_min_ratio'], larger_is_worse=False)
    return ok


@click.command()
@click.option('--kmax', type=int, default=10, show_default=True)
@click.option('--theta-points', 'theta_points', type=int, default=64, show_default=True)
def main(kmax, theta_points):
    calibration = load_calibration()
    ok = calibrate_technical_sum(calibration, theta_points)
    ok &= calibrate_growth(calibration, kmax)
    ok &= calibrate_sweep(calibration)
    print("\n✅ ALL CEILINGS HOLD\n" if ok else "\n❌ SOME CEILINGS ARE TOO TIGHT\n")
    sys.exit(0 if ok else 1)


if __name__ == '__main__':
    main()
