#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "sidiff/error.hpp"
#include "sidiff/potential.hpp"

namespace sidiff {

namespace {

class QuadraticShape final : public PotentialShape {
 public:
  explicit QuadraticShape(int dim) : dim_(dim) {}
  int dimension() const override { return dim_; }
  double value(const Vec& x) const override { return 0.5 * norm2(x); }
  Vec gradient(const Vec& x) const override { return x; }
  Sym2 hessian(const Vec&) const override { return dim_ == 1 ? Sym2{1, 0, 0} : Sym2{1, 0, 1}; }
  bool radial() const override { return dim_ == 2; }
  double profile(double r) const override { return 0.5 * r * r; }
  double profile_d1(double r) const override { return r; }
  double profile_d2(double) const override { return 1.0; }

 private:
  int dim_;
};

class DoubleWellShape final : public PotentialShape {
 public:
  int dimension() const override { return 1; }
  double value(const Vec& x) const override {
    const double s = x[0] * x[0] - 1.0;
    return s * s;
  }
  Vec gradient(const Vec& x) const override { return {4.0 * x[0] * (x[0] * x[0] - 1.0), 0.0}; }
  Sym2 hessian(const Vec& x) const override { return {12.0 * x[0] * x[0] - 4.0, 0.0, 0.0}; }
};

class TiltedWellShape final : public PotentialShape {
 public:
  explicit TiltedWellShape(double v) : v_(v) {}
  int dimension() const override { return 1; }
  double value(const Vec& x) const override { return 0.5 * (x[0] - v_) * (x[0] - v_); }
  Vec gradient(const Vec& x) const override { return {x[0] - v_, 0.0}; }
  Sym2 hessian(const Vec&) const override { return {1.0, 0.0, 0.0}; }

 private:
  double v_;
};

class MexicanShape final : public PotentialShape {
 public:
  int dimension() const override { return 2; }
  double value(const Vec& x) const override { return profile(norm(x)); }
  Vec gradient(const Vec& x) const override { return (4.0 * (norm2(x) - 1.0)) * x; }
  Sym2 hessian(const Vec& x) const override {
    const double s = norm2(x) - 1.0;
    return {4.0 * s + 8.0 * x[0] * x[0], 8.0 * x[0] * x[1], 4.0 * s + 8.0 * x[1] * x[1]};
  }
  bool radial() const override { return true; }
  double profile(double r) const override {
    const double s = r * r - 1.0;
    return s * s;
  }
  double profile_d1(double r) const override { return 4.0 * r * (r * r - 1.0); }
  double profile_d2(double r) const override { return 12.0 * r * r - 4.0; }
};

// p(s) = B + q s^2/2 + c3 s^3 + c4 s^4 + c5 s^5 on [0, 1] with p(1) = p'(1) = 0
// and p''(1) = h.
struct Quintic {
  double b, q, c3, c4, c5;

  static Quintic hermite(double barrier, double q, double h) {
    const double a = -barrier - 0.5 * q;
    const double bv = -q;
    const double cv = h - q;
    return {barrier, q, 10 * a - 4 * bv + 0.5 * cv, -15 * a + 7 * bv - cv, 6 * a - 3 * bv + 0.5 * cv};
  }
  double p(double s) const { return b + s * s * (0.5 * q + s * (c3 + s * (c4 + s * c5))); }
  double d1(double s) const { return s * (q + s * (3 * c3 + s * (4 * c4 + s * 5 * c5))); }
  double d2(double s) const { return q + s * (6 * c3 + s * (12 * c4 + s * 20 * c5)); }
};

// C^2 two-well potential: minima of value 0 at -1 and +1 with curvatures h-
// and h+, a single maximum of value B at 0 with curvature -4B, quadratic tails.
class SplineTwoWellShape final : public PotentialShape {
 public:
  SplineTwoWellShape(double h_minus, double h_plus, double barrier)
      : h_minus_(h_minus),
        h_plus_(h_plus),
        left_(Quintic::hermite(barrier, -4.0 * barrier, h_minus)),
        right_(Quintic::hermite(barrier, -4.0 * barrier, h_plus)) {}

  int dimension() const override { return 1; }
  double value(const Vec& x) const override {
    const double t = x[0];
    if (t <= -1.0) return 0.5 * h_minus_ * (t + 1.0) * (t + 1.0);
    if (t >= 1.0) return 0.5 * h_plus_ * (t - 1.0) * (t - 1.0);
    return t < 0.0 ? left_.p(-t) : right_.p(t);
  }
  Vec gradient(const Vec& x) const override {
    const double t = x[0];
    if (t <= -1.0) return {h_minus_ * (t + 1.0), 0.0};
    if (t >= 1.0) return {h_plus_ * (t - 1.0), 0.0};
    return {t < 0.0 ? -left_.d1(-t) : right_.d1(t), 0.0};
  }
  Sym2 hessian(const Vec& x) const override {
    const double t = x[0];
    if (t <= -1.0) return {h_minus_, 0.0, 0.0};
    if (t >= 1.0) return {h_plus_, 0.0, 0.0};
    return {t < 0.0 ? left_.d2(-t) : right_.d2(t), 0.0, 0.0};
  }

  bool monotone_between_wells() const {
    for (int i = 1; i < 2000; ++i) {
      const double s = i / 2000.0;
      if (!(left_.d1(s) < 0.0) || !(right_.d1(s) < 0.0)) return false;
    }
    return true;
  }

  double max_curvature() const {
    double m = std::max(h_minus_, h_plus_);
    for (int i = 0; i <= 2000; ++i) {
      const double s = i / 2000.0;
      m = std::max({m, left_.d2(s), right_.d2(s)});
    }
    return m;
  }

 private:
  double h_minus_;
  double h_plus_;
  Quintic left_;
  Quintic right_;
};

ParamMap resolve_params(std::string_view id, const ParamMap& given,
                        const std::vector<std::pair<std::string, double>>& defaults) {
  ParamMap out;
  for (const auto& [name, value] : defaults) out[name] = value;
  for (const auto& [name, value] : given) {
    if (!out.contains(name)) {
      std::ostringstream msg;
      msg << "potential '" << id << "' has no parameter '" << name << "'";
      throw ConfigError(msg.str());
    }
    if (!std::isfinite(value)) throw ConfigError("potential parameter '" + name + "' is not finite");
    out[name] = value;
  }
  return out;
}

const CatalogEntry& entry(std::string_view id) {
  for (const auto& e : potential_catalog())
    if (e.id == id) return e;
  throw ConfigError("unknown potential id '" + std::string(id) + "'");
}

}  // namespace

const std::vector<CatalogEntry>& potential_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      {"quadratic", "|x|^2/2", {{"d", 1.0}}},
      {"double_well", "(x^2-1)^2", {{"c", 1.0}}},
      {"spline_twowell",
       "C^2 quintic Hermite two-well: minima 0 at -1, +1 with curvatures h_minus, h_plus; "
       "maximum 'barrier' at 0",
       {{"h_minus", 2.0}, {"h_plus", 8.0}, {"barrier", 1.0}, {"c", 0.0}}},
      {"tilted_well", "(x-v)^2/2", {{"v", 1.0}}},
      {"mexican_2d", "(|x|^2-1)^2 in 2D", {{"c", 1.0}}},
  };
  return catalog;
}

Potential make_potential(std::string_view id, const ParamMap& params) {
  const CatalogEntry& e = entry(id);
  ParamMap p = resolve_params(id, params, e.parameters);

  if (id == "quadratic") {
    const double d = p["d"];
    if (d != 1.0 && d != 2.0) throw ConfigError("quadratic: d must be 1 or 2");
    const int dim = static_cast<int>(d);
    SearchBox box = dim == 1 ? SearchBox{{-3.0, 0.0}, {3.0, 0.0}} : SearchBox{{-3.0, -3.0}, {3.0, 3.0}};
    return Potential(std::string(id), p, std::make_shared<QuadraticShape>(dim), box,
                     dim == 1 ? 0.01 : 0.05, {d, 0.0}, 1.0);
  }
  if (id == "double_well") {
    if (!(p["c"] > 0.0)) throw ConfigError("double_well: c must be positive");
    return Potential(std::string(id), p, std::make_shared<DoubleWellShape>(),
                     {{-2.5, 0.0}, {2.5, 0.0}}, 0.01, {44.0, 1.0}, p["c"]);
  }
  if (id == "spline_twowell") {
    const double hm = p["h_minus"];
    const double hp = p["h_plus"];
    const double barrier = p["barrier"];
    if (!(hm > 0.0) || !(hp > 0.0) || !(barrier > 0.0))
      throw ConfigError("spline_twowell: h_minus, h_plus and barrier must be positive");
    double c = p["c"];
    if (c == 0.0) c = std::min(1.0, 0.5 * std::min(hm, hp));
    if (!(c > 0.0) || c > std::min(hm, hp))
      throw ConfigError("spline_twowell: c must lie in (0, min(h_minus, h_plus)]");
    p["c"] = c;
    auto shape = std::make_shared<SplineTwoWellShape>(hm, hp, barrier);
    if (!shape->monotone_between_wells())
      throw ConfigError("spline_twowell: these parameters give a non-monotone spline between the wells");
    return Potential(std::string(id), p, shape, {{-2.5, 0.0}, {2.5, 0.0}}, 0.01,
                     {shape->max_curvature(), 0.0}, c);
  }
  if (id == "tilted_well") {
    const double v = p["v"];
    return Potential(std::string(id), p, std::make_shared<TiltedWellShape>(v),
                     {{v - 3.0, 0.0}, {v + 3.0, 0.0}}, 0.01, {1.0, 0.0}, 1.0);
  }
  // mexican_2d
  if (!(p["c"] > 0.0)) throw ConfigError("mexican_2d: c must be positive");
  return Potential(std::string(id), p, std::make_shared<MexicanShape>(),
                   {{-2.0, -2.0}, {2.0, 2.0}}, 0.05, {72.0, 1.0}, p["c"]);
}

}  // namespace sidiff
