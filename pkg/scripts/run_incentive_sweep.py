#!/usr/bin/env python3
"""Incentive sweep experiment: threshold-success rate over a grid of
(deposit, reward, quorum fraction), with matched seeds across cells.

Writes sweep.csv next to this script unless --out is given.
"""

import argparse
from pathlib import Path

from covote.sim import ProfileDistribution, ScenarioConfig, sweep, sweep_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--population", type=int, default=40)
    parser.add_argument("--runs", type=int, default=400)
    parser.add_argument("--seed", default="sweep-2026")
    parser.add_argument("--out", type=Path, default=Path(__file__).parent / "sweep.csv")
    args = parser.parse_args()

    config = ScenarioConfig(
        population=args.population,
        profiles=ProfileDistribution(
            reward=(0.2, 1.0),
            goodwill=(0.2, 1.0),
            obligation=(0.0, 0.8),
            deposit=(0.0, 0.8),
            release_reliability=0.9,
        ),
        protocol="behavioral",
    )
    rows = sweep(
        config,
        deposits=[0, 5, 20],
        rewards=[0, 5, 20, 80],
        fractions=[0.25, 0.5, 0.75, 1.0],
        runs=args.runs,
        seed=args.seed,
    )
    csv = sweep_csv(rows)
    args.out.write_text(csv)
    print(csv)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
