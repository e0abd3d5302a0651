"""Fit the constants c in N_J(Z_i, Z_k)(o) = c [Z_i, Z_k](o) and L(conj Z_i, Z_i, Z_j, conj Z_j)(o) = c |nabla_i Z_j|^2.

Least squares over normal frames built at random base points of the non-Kähler zoo charts.

Usage: python3 scripts/frame_constants.py [--points N] [--seed S]
"""

import argparse

import numpy as np

from akahler import connections as C
from akahler import zoo
from akahler.charts import bracket_jets
from akahler.frames import construct_gnh_frame, frame_components


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    for chart in (zoo.kodaira_thurston(), zoo.symplectic_twist_r4(0.3), zoo.symplectic_twist_r4(0.1)):
        lhs_b, rhs_b, lhs_l, rhs_l = [], [], [], []
        for o in rng.uniform(-0.9, 0.9, (args.points, chart.dim)):
            F = construct_gnh_frame(chart, o)
            geo = C.geometry(chart, o)
            Z = F.jet(3)
            n = F.n
            lhs_b.append(frame_components(chart, F, C.nijenhuis, "ik").ravel())
            rhs_b.append(np.array([[bracket_jets(Z[i], Z[k]).value for k in range(n)] for i in range(n)]).ravel())
            lhs_l.append(frame_components(chart, F, C.L_tensor, "īijj̄").ravel())
            nZ = np.einsum("jac,ic->ija", C.cov_vector(Z, geo.gamma).value, Z.value)
            rhs_l.append(np.einsum("ija,ab,ijb->ij", nZ, geo.g0, np.conj(nZ)).ravel())
        for name, lhs, rhs in (("bracket", lhs_b, rhs_b), ("L diagonal", lhs_l, rhs_l)):
            x, y = np.concatenate(rhs), np.concatenate(lhs)
            c = np.vdot(x, y) / np.vdot(x, x)
            print(f"{chart.label:<36} {name:<11} c = {c.real:+.12g}{c.imag:+.3g}j  residual {np.abs(y - c * x).max():.3g}")


if __name__ == "__main__":
    main()
