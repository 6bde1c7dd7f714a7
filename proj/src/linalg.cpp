#include "sidiff/linalg.hpp"

#include <algorithm>

namespace sidiff {

double determinant(const Sym2& h, int dim) {
  return dim == 1 ? h.xx : h.xx * h.yy - h.xy * h.xy;
}

double trace(const Sym2& h, int dim) { return dim == 1 ? h.xx : h.xx + h.yy; }

Eigen2 eigenvalues(const Sym2& h, int dim) {
  if (dim == 1) return {h.xx, h.xx};
  const double mean = 0.5 * (h.xx + h.yy);
  const double half_diff = 0.5 * (h.xx - h.yy);
  const double radius = std::hypot(half_diff, h.xy);
  return {mean - radius, mean + radius};
}

bool solve(const Sym2& h, const Vec& rhs, int dim, Vec& out) {
  if (dim == 1) {
    if (std::abs(h.xx) < 1e-300) return false;
    out = {rhs[0] / h.xx, 0.0};
    return true;
  }
  const double det = determinant(h, 2);
  const double scale = std::max({std::abs(h.xx), std::abs(h.yy), std::abs(h.xy), 1e-300});
  if (std::abs(det) < 1e-14 * scale * scale) return false;
  out = {(h.yy * rhs[0] - h.xy * rhs[1]) / det, (h.xx * rhs[1] - h.xy * rhs[0]) / det};
  return true;
}

}  // namespace sidiff
