"""Compare the two index placements of L in the Hermitian curvature relation on every zoo chart.

Usage: python3 scripts/wr1_resolution.py [--samples N] [--seed S]
"""

import argparse

from akahler import diagnostics, zoo


def charts():
    yield from (zoo.flat_kahler(n) for n in (1, 2, 3))
    yield zoo.kodaira_thurston()
    yield from (zoo.symplectic_twist_r4(eps) for eps in (0.0, 0.1, 0.3))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)
    a, b = diagnostics.WR1_VARIANTS
    print(f"{'chart':<36} {a:>18} {b:>18}  verdict")
    for chart in charts():
        table = diagnostics.identity_suite(chart, args.samples, args.seed, rows=["hermitian_curvature_L"])
        w = table.wr1_variant
        print(f"{chart.label:<36} {w[a]:>18.12g} {w[b]:>18.12g}  {w['verdict']}")


if __name__ == "__main__":
    main()
