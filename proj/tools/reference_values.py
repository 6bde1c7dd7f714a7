#!/usr/bin/env python3
"""High-precision reference values, computed without the C++ library.

Writes tests/goldens/reference.json. The unit tests hold these numbers as
literals; rerun this script when a definition changes and update the tests.
"""

import json
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def double_well(x):
    return (x * x - 1) ** 2


def spline_pieces(h_minus, h_plus, barrier):
    # p(s) = B + q s^2/2 + c3 s^3 + c4 s^4 + c5 s^5 with p(1) = p'(1) = 0, p''(1) = h.
    def solve(h):
        q = -4 * barrier
        A = mp.matrix([[1, 1, 1], [3, 4, 5], [6, 12, 20]])
        rhs = mp.matrix([-barrier - q / 2, -q, h - q])
        c3, c4, c5 = mp.lu_solve(A, rhs)
        return lambda s: barrier + q * s**2 / 2 + c3 * s**3 + c4 * s**4 + c5 * s**5

    left, right = solve(h_minus), solve(h_plus)

    def v(x):
        if x <= -1:
            return h_minus * (x + 1) ** 2 / 2
        if x >= 1:
            return h_plus * (x - 1) ** 2 / 2
        return left(-x) if x < 0 else right(x)

    return v


def gibbs_integral(v, eps2, f=lambda x: 1, breaks=(-6, -1, 0, 1, 6)):
    return mp.quad(lambda x: f(x) * mp.exp(-2 * v(x) / eps2), list(breaks))


def osc_chi(v, c, radius, n=400001):
    # chi = V - W with W - c x^2/2 the lower convex envelope of V - c x^2/2.
    xs = np.linspace(-radius, radius, n)
    f = np.array([float(v(mp.mpf(x))) for x in xs]) - 0.5 * c * xs * xs
    hull = []
    for i in range(n):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (xs[i1] - xs[i0]) * (f[i] - f[i0]) - (f[i1] - f[i0]) * (xs[i] - xs[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    env = np.interp(xs, xs[hull], f[hull])
    chi = f - env
    return float(chi.max() - min(chi.min(), 0.0))


def log_schedule_state(k, shift, r, t):
    s = mp.mpf(shift)

    def G(u):
        return ((s + u) * mp.log(s + u) - (s + u) - (s * mp.log(s) - s)) / k

    u = mp.findroot(lambda u: G(u) - t, mp.mpf(t))
    eps2 = k / mp.log(s + u)
    return u, eps2, (r + u) / eps2


def main():
    out = {}
    for eps2 in ("0.2", "0.05", "0.01"):
        out[f"double_well_Z_eps2_{eps2}"] = float(gibbs_integral(double_well, mp.mpf(eps2)))
    z = gibbs_integral(double_well, 1)
    out["double_well_gamma_second_moment"] = float(gibbs_integral(double_well, 1, lambda x: x * x) / z)
    e = mp.mpf("0.2")
    out["double_well_mass_0.5_1.5_eps2_0.2"] = float(
        mp.quad(lambda x: mp.exp(-2 * double_well(x) / e), [0.5, 1, 1.5]) / gibbs_integral(double_well, e))
    e = mp.mpf("0.01")
    laplace = 2 * mp.sqrt(mp.pi * e / 8)
    out["double_well_laplace_ratio_eps2_0.01"] = float(gibbs_integral(double_well, e) / laplace)

    spline = spline_pieces(mp.mpf(2), mp.mpf(8), mp.mpf(1))
    zs = gibbs_integral(spline, e)
    out["spline_twowell_left_mass_eps2_0.01"] = float(gibbs_integral(spline, e, breaks=(-6, -1, 0)) / zs)
    out["spline_twowell_Z_eps2_0.01"] = float(zs)

    zm = 2 * mp.pi * mp.quad(lambda r: r * mp.exp(-2 * (r * r - 1) ** 2 / mp.mpf("0.1")), [0, 1, 4])
    out["mexican_2d_Z_eps2_0.1"] = float(zm)

    out["double_well_osc_chi"] = osc_chi(double_well, 1.0, 2.0)
    out["spline_twowell_osc_chi"] = osc_chi(spline, 1.0, 2.0)

    k = mp.mpf("12.5")
    for t in (10, 100, 1000, 10000):
        u, eps2, a = log_schedule_state(k, mp.e, 1, t)
        out[f"log_schedule_k12.5_t{t}"] = {"inner_time": float(u), "eps2": float(eps2), "a": float(a)}

    # Y' = -Y - Y/(1 + t) has Y(t) = y0 e^-t / (1 + t); the Kolmogorov partner is z0 e^-t.
    out["quadratic_centered_y_at_5"] = float(2 * mp.exp(-5) / 6)
    out["quadratic_coupled_gap_at_5"] = float(2 * mp.exp(-5) / 6 - 2 * mp.exp(-5))

    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests/goldens"
    target.mkdir(parents=True, exist_ok=True)
    (target / "reference.json").write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
