#!/usr/bin/env python3
"""Audit the interval inequalities on large random rational samples.

Runs every lemma variant over exact-rational random polynomials and
reports violation counts, the smallest relative margin seen, and where
it occurred.  The margin is (rhs - lhs) / rhs, so 0 is an equality case
and anything negative would be a counterexample.
"""

import argparse
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from wavechannel.polylib import lemma_check

VARIANTS = ("sup_odd", "deriv_odd", "sup_even", "deriv_even")


@dataclass
class AuditConfig:
    trials: int = 2000
    degree_max: int = 15
    coeff_max: int = 9
    seed: int = 0


def random_poly(rng: random.Random, cfg: AuditConfig) -> list[Fraction]:
    degree = rng.randint(0, cfg.degree_max)
    return [
        Fraction(rng.randint(-cfg.coeff_max, cfg.coeff_max), rng.randint(1, 9))
        for _ in range(degree + 1)
    ]


def audit(cfg: AuditConfig) -> int:
    rng = random.Random(cfg.seed)
    total_violations = 0
    print(f"{'variant':<12} {'trials':>7} {'violations':>10} {'min margin':>12}  at")
    for variant in VARIANTS:
        start = time.time()
        violations = 0
        min_margin = None
        witness = None
        for _ in range(cfg.trials):
            coeffs = random_poly(rng, cfg)
            L = Fraction(rng.randint(1, 16), rng.randint(1, 4))
            l = L * Fraction(rng.randint(1, 4), 8)
            chk = lemma_check(coeffs, variant, L, l)
            if not chk.holds:
                violations += 1
            if chk.rhs > 0:
                margin = float((chk.rhs - chk.lhs) / chk.rhs)
                if min_margin is None or margin < min_margin:
                    min_margin = margin
                    witness = (len(coeffs) - 1, L, l)
        elapsed = time.time() - start
        spot = f"deg={witness[0]} L={witness[1]} l={witness[2]}" if witness else "-"
        print(
            f"{variant:<12} {cfg.trials:>7} {violations:>10} "
            f"{min_margin:>12.3e}  {spot}  ({elapsed:.1f}s)"
        )
        total_violations += violations
    return total_violations


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=AuditConfig.trials)
    parser.add_argument("--degree-max", type=int, default=AuditConfig.degree_max)
    parser.add_argument("--seed", type=int, default=AuditConfig.seed)
    args = parser.parse_args(argv)
    cfg = AuditConfig(trials=args.trials, degree_max=args.degree_max, seed=args.seed)
    violations = audit(cfg)
    if violations:
        print(f"FOUND {violations} VIOLATIONS")
        return 1
    print("all inequalities hold on the sampled data")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
