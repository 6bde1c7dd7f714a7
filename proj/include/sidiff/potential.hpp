#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sidiff/linalg.hpp"

namespace sidiff {

using ParamMap = std::map<std::string, double>;

/// Closed-form V, grad V and Hess V of one catalog family.
class PotentialShape {
 public:
  virtual ~PotentialShape() = default;
  virtual int dimension() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Sym2 hessian(const Vec& x) const = 0;

  /// Radially symmetric shapes expose their profile f with V(x) = f(|x|).
  virtual bool radial() const { return false; }
  virtual double profile(double /*r*/) const { return 0.0; }
  virtual double profile_d1(double /*r*/) const { return 0.0; }
  virtual double profile_d2(double /*r*/) const { return 0.0; }
};

struct SearchBox {
  Vec lo{0.0, 0.0};
  Vec hi{0.0, 0.0};
};

/// The split V = W + chi with W uniformly convex (Hess W >= c Id) and chi
/// compactly supported.
///
/// W is the convex envelope of U = V - c|x|^2/2 plus c|x|^2/2. Where U is
/// already convex, W = V. Across the non-convex region U is replaced by its
/// bitangent line (1D) or by the flat disc at the bottom of the radial profile
/// (2D radial), so W is C^{1,1} there with Hess W = c Id.
struct Decomposition {
  enum class Kind { convex, interval_bridge, radial_bridge };
  Kind kind = Kind::convex;
  double convexity = 1.0;       ///< c
  double support_radius = 0.0;  ///< chi = 0 for |x| > support_radius
  double bridge_lo = 0.0;       ///< interval bridge: [bridge_lo, bridge_hi]
  double bridge_hi = 0.0;       ///< radial bridge: disc of radius bridge_hi
  double line_value = 0.0;      ///< U on the bridge: line_value + line_slope * (x - bridge_lo)
  double line_slope = 0.0;
  double chi_gradient_lipschitz = 0.0;
  Vec w_argmin{0.0, 0.0};
  double w_min = 0.0;
};

/// Constants (a, b) with Laplacian V <= a + b V, declared per catalog family.
struct GrowthConstants {
  double a = 0.0;
  double b = 0.0;
};

enum class CriticalKind { local_min, local_max, saddle };

const char* to_string(CriticalKind kind);

struct CriticalPoint {
  Vec location{0.0, 0.0};
  double value = 0.0;
  CriticalKind kind = CriticalKind::local_min;
  double hessian_det = 0.0;
  double min_eigenvalue = 0.0;
  bool is_global_min = false;
};

/// A grid candidate that Newton refinement could not turn into a
/// nondegenerate critical point.
struct UnresolvedCandidate {
  Vec start{0.0, 0.0};
  Vec last{0.0, 0.0};
  double gradient_norm = 0.0;
  std::string reason;
};

struct CriticalPointSet {
  std::vector<CriticalPoint> points;  ///< sorted by location (x, then y)
  std::vector<UnresolvedCandidate> unresolved;

  std::vector<CriticalPoint> local_minima() const;
  std::vector<CriticalPoint> global_minima() const;
};

struct PotentialEval {
  double value = 0.0;
  Vec gradient{0.0, 0.0};
  Sym2 hessian{};
};

/// A catalog potential: immutable after construction and safe to share across
/// threads.
class Potential {
 public:
  Potential(std::string id, ParamMap params, std::shared_ptr<const PotentialShape> shape,
            SearchBox default_box, double default_step, GrowthConstants growth,
            double convexity);

  const std::string& id() const { return id_; }
  const ParamMap& params() const { return params_; }
  int dimension() const { return shape_->dimension(); }

  double value(const Vec& x) const { return shape_->value(x) + offset_; }
  Vec gradient(const Vec& x) const { return shape_->gradient(x); }
  Sym2 hessian(const Vec& x) const { return shape_->hessian(x); }

  double w_value(const Vec& x) const;
  Sym2 w_hessian(const Vec& x) const;
  double chi_value(const Vec& x) const;

  const Decomposition& decomposition() const { return decomposition_; }
  const GrowthConstants& growth() const { return growth_; }
  const SearchBox& default_box() const { return default_box_; }
  double default_step() const { return default_step_; }
  double offset() const { return offset_; }

  /// Critical points over the default search box, computed at construction.
  const CriticalPointSet& critical_points() const { return critical_points_; }

  /// The same potential plus a constant (W absorbs the constant).
  Potential shifted(double constant) const;

 private:
  std::string id_;
  ParamMap params_;
  std::shared_ptr<const PotentialShape> shape_;
  SearchBox default_box_;
  double default_step_;
  GrowthConstants growth_;
  double offset_ = 0.0;
  Decomposition decomposition_;
  CriticalPointSet critical_points_;
};

/// Builds a catalog entry: quadratic, double_well, spline_twowell,
/// tilted_well, mexican_2d. Unknown ids or parameters raise ConfigError.
Potential make_potential(std::string_view id, const ParamMap& params = {});

struct CatalogEntry {
  std::string id;
  std::string formula;
  std::vector<std::pair<std::string, double>> parameters;  ///< name, default
};

const std::vector<CatalogEntry>& potential_catalog();

/// Value, gradient and Hessian in one call; rejects non-finite input.
PotentialEval eval_all(const Potential& potential, const Vec& x);

/// Grid scan for dips of |grad V|, damped Newton refinement to |grad V| < 1e-10,
/// merge within 1e-6, classification by Hessian eigenvalues.
CriticalPointSet find_critical_points(const Potential& potential, const SearchBox& box,
                                      double grid_step);

/// sup chi - inf chi over the support of chi.
double osc_chi(const Potential& potential);

struct AnnulusReport {
  double r_inner = 0.0;
  double r_outer = 0.0;
  std::size_t samples = 0;
  double min_growth_ratio = 0.0;  ///< min |grad V|^2 / V
  double max_laplacian_excess = 0.0;  ///< max (Laplacian V - a - b V) with declared a, b
  double min_w_eigenvalue = 0.0;
};

struct HypothesisReport {
  std::vector<AnnulusReport> annuli;
  GrowthConstants declared;
  GrowthConstants fitted;
  bool laplacian_bound_ok = false;
  bool growth_ratio_diverges = false;
  bool growth_ratio_borderline = false;
  double min_w_eigenvalue = 0.0;
  bool w_convexity_ok = false;
  bool potential_nonnegative = false;
};

/// Samples nested annuli and reports the slack of each standing hypothesis.
/// Violations are flagged, never thrown.
HypothesisReport check_hypotheses(const Potential& potential, std::size_t samples_per_annulus,
                                  std::uint64_t seed = 0);

}  // namespace sidiff
