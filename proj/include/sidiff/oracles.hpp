#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sidiff/potential.hpp"
#include "sidiff/schedule.hpp"

namespace sidiff {

/// Brute-force reference computations, deliberately independent of the
/// production code paths they check (no adaptive panels, no closed forms).

/// int_lo^hi exp(-2 (V_a - shift) / eps^2) f(x) dx by the composite trapezoid
/// rule on n intervals (1D); f = 1, x or x^2 via `moment`.
double trapezoid_integral(const Potential& potential, double eps2, double a, double lo, double hi,
                          std::size_t n, int moment = 0, double shift = 0.0);

/// Deterministic Y: y' = -g(t) V'(y) - y / (r + t), classical RK4 with n steps.
double rk4_centered_ode(const Potential& potential, const Schedule& schedule, double r, double y0, double T,
                        std::size_t n);

/// Deterministic Kolmogorov-pair gap: Y as above with g = 1 and z' = -V'(z).
double rk4_coupled_gap(const Potential& potential, double r, double y0, double z0, double T, std::size_t n);

/// Sign changes of V' on a uniform grid refined by bisection (1D).
std::vector<double> gradient_roots_1d(const Potential& potential, double lo, double hi, std::size_t n);

/// sup chi - inf chi on a uniform grid of the given step over the support.
double grid_osc_chi(const Potential& potential, double step);

/// m(infinity) in 1D without a grid. The only path between two points is the
/// interval, so H(m_i, z0) is the largest critical value between them; m is
/// the largest H(m_i, z0) - V(m_i) over the local minima.
double interval_maximal_height_1d(const Potential& potential);

/// Runs every oracle and returns the reference values as a JSON document.
std::string run_oracles();

}  // namespace sidiff
