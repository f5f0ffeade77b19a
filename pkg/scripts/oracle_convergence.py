"""Grid refinement of the LP cross-check on the uniform / Beta(2,2) instance.

Prints the best-reply value to the discretized prior for a sequence of grid
sizes next to the analytic optimum, showing the O(1/n) agreement.

Usage: python scripts/oracle_convergence.py [--sizes 51 101 201]
"""

import argparse
import time

import infodelegation as d


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[51, 101, 201])
    args = parser.parse_args()

    prior = d.UniformDistribution()
    g = d.BetaDistribution(2, 2)
    pair, star = d.solve_full_delegation(prior, g)
    analytic = d.expected_payoff(star, g.cdf)
    print(f"analytic optimum: {analytic:.9f}  (threshold {pair.x:.6f}, atom {pair.y:.6f})")
    for n in args.sizes:
        instance = d.make_instance(prior, g.cdf, n)
        t0 = time.perf_counter()
        _, result, value = d.lp_best_reply(instance, instance.prior_mass)
        dt = time.perf_counter() - t0
        support = result.support()
        print(f"n={n:4d}: value={value:.9f}  gap={value - analytic:+.2e}"
              f"  support={len(support):3d} points  ({dt:.2f}s)")


if __name__ == "__main__":
    main()
