"""Exact E[X_n] and the cocycle-probability lower bound as functions of n.

Prints log P(5-cycle family is a cocycle) next to log(4^h n^{-5h} e^{-80h})
and reports the smallest n in range where the bound holds.  For n >= 16 the
spectral checks on M_G are run too (--no-spectrum skips them).  With --mc it
also runs Monte Carlo moments at each n.

    python3 scripts/moment_scan.py --n-min 6 --n-max 60
"""

import argparse
import math

from hypertree_lab.moments import (
    asymptotic_lower_bound_log,
    exact_prob_cocycle,
    expected_X_exact,
    first_family,
    mc_moments,
    spectrum_report,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-min", type=int, default=6)
    ap.add_argument("--n-max", type=int, default=60)
    ap.add_argument("--h", type=int, default=1)
    ap.add_argument("--mc", type=int, default=0, help="Monte Carlo trials per n (0 = skip)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--no-spectrum", action="store_true")
    args = ap.parse_args()
    h = args.h

    first_ok = first_spectral = None
    print(f"{'n':>4} {'log P':>12} {'log bound':>12} {'holds':>6} {'log E[X]':>12} {'spectrum':>9}")
    for n in range(max(args.n_min, 5 * h + 1), args.n_max + 1):
        lp = exact_prob_cocycle(n, first_family(n, h)).log
        lb = asymptotic_lower_bound_log(n, h)
        ex = expected_X_exact(n, h)
        holds = lp >= lb
        if holds and first_ok is None:
            first_ok = n
        spectral = "-"
        if n >= 16 and not args.no_spectrum:
            ok = spectrum_report(n, first_family(n, h)).satisfied
            spectral = str(ok)
            if ok and first_spectral is None:
                first_spectral = n
        line = f"{n:>4} {lp:>12.4f} {lb:>12.4f} {str(holds):>6} {ex.log_value:>12.4f} {spectral:>9}"
        if args.mc:
            rep = mc_moments(n, h, args.mc, args.seed)
            line += (f"  mc E[X]={rep.mc_EX:.3e}+-{rep.se_EX:.1e}"
                     f" P(X>0)={rep.mc_PXpos:.3e} PZ={rep.pz_bound:.3e}")
        print(line)
    print(f"smallest n with log P >= bound: {first_ok}")
    if first_ok is not None:
        print(f"  at that n, margin = {exact_prob_cocycle(first_ok, first_family(first_ok, h)).log - asymptotic_lower_bound_log(first_ok, h):.3f} nats")
    if not args.no_spectrum:
        print(f"smallest n with every spectral check satisfied: {first_spectral}")
    print(f"exp(log E[X]) at n_max: {math.exp(expected_X_exact(args.n_max, h).log_value):.3e}")


if __name__ == "__main__":
    main()
