#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace sidiff {

/// A point or vector in R^d for d in {1, 2}. Unused trailing components of a
/// 1D point are kept at zero so that norms and dot products need no dimension.
using Vec = std::array<double, 2>;

/// Symmetric 2x2 matrix; for d = 1 only `xx` is meaningful.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

struct Eigen2 {
  double min = 0.0;
  double max = 0.0;
};

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }

inline bool all_finite(const Vec& a) { return std::isfinite(a[0]) && std::isfinite(a[1]); }

double determinant(const Sym2& h, int dim);
double trace(const Sym2& h, int dim);
Eigen2 eigenvalues(const Sym2& h, int dim);

/// Solves h * out = rhs. Returns false when h is numerically singular.
bool solve(const Sym2& h, const Vec& rhs, int dim, Vec& out);

}  // namespace sidiff
