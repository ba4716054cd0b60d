#!/usr/bin/env python3
"""Numerical period matrix of the genus-2 curve y^2 + y = x^5.

Derivation of the golden CM matrix used by the Jacobian-height pipeline.

Completing the square turns the curve into w^2 = f(x) = x^5 + 1/4, whose
branch points are the five 5th roots of -1/4 on a circle.  The holomorphic
differentials are om_i = x^{i-1} dx / (2w) = x^{i-1} dx / (2y + 1).

Homology: gamma_k is the loop around the adjacent branch-point pair
(r_k, r_{k+1}) (roots ordered by angle), k = 0..3.  For this 'necklace'
configuration the intersection pairing is tridiagonal,
gamma_k . gamma_{k+1} = 1, so integer symplectic Gram-Schmidt gives the
symplectic basis A = (gamma_0, gamma_0 + gamma_2), B = (gamma_1, gamma_3).
Each loop integral is twice the branch-tracked segment integral between the
two roots.

The order-5 automorphism x -> zeta x permutes the cycles, which collapses
tau = Omega_A^{-1} Omega_B to exact zeta_5 arithmetic; this script computes
the periods by direct contour integration, assembles tau, and checks it
against the exact construction through the Sp(4,Z)-invariant quantities
|J10(tau)|^{1/10} det(Im tau)^{1/2} (basis-independent, unlike tau itself).

Run:  python scripts/period_matrix_oracle.py [--dps 30]
"""

import argparse
import sys

from mpmath import mp, mpc, mpf

from thetaheights.hyper_faltings import quintic_cm_period_matrix
from thetaheights.precision import PrecisionContext
from thetaheights.theta_engine import as_siegel, j10


def branch_tracked_sqrt_signs(f, a, b, samples=4000):
    """Sign pattern making sqrt(f) continuous along the segment [a, b].

    Returns breakpoints 0 = t_0 < ... < t_m < 1, each with the sign of the
    continuous branch relative to the principal branch on that piece.
    """
    ts = [mpf(k) / samples for k in range(1, samples)]
    prev = mp.sqrt(f(a + (b - a) * ts[0]))
    cur_sign = 1
    pieces = [(mpf(0), 1)]
    for t in ts[1:]:
        val = mp.sqrt(f(a + (b - a) * t))
        # continuity: flip the relative sign when the principal branch jumps
        if abs(cur_sign * val - prev) > abs(-cur_sign * val - prev):
            cur_sign = -cur_sign
            pieces.append((t, cur_sign))
        prev = cur_sign * val
    return pieces


def segment_period(f, a, b, i):
    """int_a^b x^{i-1} dx / w with w = sqrt(f) continued from the principal
    branch at the start of the segment."""
    pieces = branch_tracked_sqrt_signs(f, a, b)
    total = mpc(0)
    bounds = [t for t, _ in pieces] + [mpf(1)]
    for (t0, sgn), t1 in zip(pieces, bounds[1:]):
        def integrand(t, sgn=sgn):
            x = a + (b - a) * t
            return (b - a) * x ** (i - 1) / (sgn * mp.sqrt(f(x)))
        total += mp.quad(integrand, [t0, t1], method="tanh-sinh")
    return total


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--dps", type=int, default=30)
    args = ap.parse_args(argv)
    mp.dps = args.dps + 10

    f = lambda x: x ** 5 + mpf(1) / 4
    # branch points of w^2 = x^5 + 1/4, ordered by angle
    radius = mpf(4) ** (mpf(-1) / 5)
    roots = [radius * mp.expjpi(mpf(2 * k + 1) / 5) for k in range(5)]

    # periods of om_i = x^{i-1} dx/(2w) over gamma_k = loop around
    # (r_k, r_{k+1}): the loop doubles the segment integral, cancelling the
    # 1/2 of the differential, so the period is the segment integral of
    # x^{i-1} dx / w
    per = [[segment_period(f, roots[k], roots[k + 1], i) for k in range(4)]
           for i in (1, 2)]

    # symplectic basis from the tridiagonal intersection pattern
    def col(k):
        return [per[0][k], per[1][k]]

    A1, A2 = col(0), [col(0)[i] + col(2)[i] for i in range(2)]
    B1, B2 = col(1), col(3)
    OmA = mp.matrix([[A1[0], A2[0]], [A1[1], A2[1]]])
    OmB = mp.matrix([[B1[0], B2[0]], [B1[1], B2[1]]])
    tau = OmA ** -1 * OmB
    # orientation: flip the B-cycles if Im tau is negative definite
    if tau[0, 0].imag < 0:
        tau = -1 * tau

    sym_err = abs(tau[0, 1] - tau[1, 0])
    print("tau from contour integration:")
    for r in range(2):
        print("   ", mp.nstr(tau[r, 0], args.dps), mp.nstr(tau[r, 1], args.dps))
    print("symmetry error:", mp.nstr(sym_err, 3))

    ctx = PrecisionContext(bits=int(args.dps * 3.33) + 48)
    rows = [[tau[0, 0], (tau[0, 1] + tau[1, 0]) / 2],
            [(tau[0, 1] + tau[1, 0]) / 2, tau[1, 1]]]
    t_num = as_siegel(rows, g=2, ctx=ctx)
    t_cm = quintic_cm_period_matrix(ctx)

    def invariant(t):
        return abs(j10(t, ctx)) ** (mpf(1) / 10) * mp.sqrt(t.det_imag())

    inv_num = invariant(t_num)
    inv_cm = invariant(t_cm)
    rel = abs(inv_num - inv_cm) / inv_cm
    print("Sp(4,Z)-invariant |J10|^(1/10) sqrt(det Im):")
    print("   integration:", mp.nstr(inv_num, args.dps))
    print("   exact zeta5:", mp.nstr(inv_cm, args.dps))
    print("   rel. difference:", mp.nstr(rel, 3))
    ok = rel < mpf(10) ** (-(args.dps - 12)) and sym_err < mpf(10) ** (-(args.dps - 14))
    print("CROSS-CHECK:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
