#include "sidiff/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "sidiff/error.hpp"

namespace sidiff {

namespace {

template <int N>
GaussRule expand() {
  using Half = boost::math::quadrature::gauss<double, N>;
  const auto& x = Half::abscissa();
  const auto& w = Half::weights();
  GaussRule rule;
  // Boost stores the nonnegative half; for odd N the first entry is 0.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    rule.nodes.push_back(-x[i]);
    rule.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.nodes.push_back(x[i]);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const GaussRule r7 = expand<7>();
  static const GaussRule r10 = expand<10>();
  static const GaussRule r15 = expand<15>();
  static const GaussRule r20 = expand<20>();
  switch (n) {
    case 7: return r7;
    case 10: return r10;
    case 15: return r15;
    case 20: return r20;
    default: throw UnsupportedError("Gauss-Legendre rule of this order is not tabulated");
  }
}

}  // namespace sidiff
