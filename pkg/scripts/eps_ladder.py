"""Defect ladder of the symplectic twist as eps shrinks toward the flat Kähler chart.

Usage: python3 scripts/eps_ladder.py [--samples N] [--seed S] [--eps 0.3 0.1 0.03 0.01]
"""

import argparse

from akahler import diagnostics, zoo


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--eps", type=float, nargs="+", default=[0.3, 0.1, 0.03, 0.01, 0.0])
    args = parser.parse_args(argv)
    print(f"{'eps':>8} " + " ".join(f"{name:>18}" for name in diagnostics.DEFECTS) + "  verdict")
    for eps in args.eps:
        rep = diagnostics.integrability_defects(
            zoo.symplectic_twist_r4(eps), args.samples, args.seed, identities=False
        )
        cells = " ".join(f"{rep.defects[name]:>18.12g}" for name in diagnostics.DEFECTS)
        print(f"{eps:>8g} {cells}  {rep.verdict}")


if __name__ == "__main__":
    main()
