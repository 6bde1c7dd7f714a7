#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "sidiff/potential.hpp"
#include "sidiff/rng.hpp"
#include "sidiff/schedule.hpp"

namespace sidiff {

enum class ProcessKind { X, Y_mu, Z_annealed, Z_kolmogorov, coupled_YZ };

const char* to_string(ProcessKind kind);

struct SdeOptions {
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t stride = 100;  ///< record every stride-th step
  double blowup_radius = 1e6;
  bool zero_noise = false;  ///< test mode: drop the Brownian increments
};

/// Test-mode freezing of the annealed coefficients. `a` may be +infinity,
/// which removes the confinement term.
struct AnnealedOverrides {
  std::optional<double> eps2;
  std::optional<double> a;
};

/// Everything an observer can see at one sample time. Channels not carried by
/// the process stay zero.
struct PathSnapshot {
  Vec x{0.0, 0.0};         ///< X, Y or Z (Y for the coupled pair)
  Vec mu{0.0, 0.0};        ///< empirical mean mu-bar (X and Y kinds, coupled pair)
  Vec integral{0.0, 0.0};  ///< int_0^t of the main state (X and Y kinds, coupled pair)
  Vec z{0.0, 0.0};         ///< Z of the coupled pair
};

struct Trajectory {
  ProcessKind kind = ProcessKind::X;
  int dimension = 1;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> t;
  std::vector<PathSnapshot> states;
  bool blew_up = false;
  double blowup_time = 0.0;

  /// Squared Y - Z gap per sample (coupled pair).
  double gap2(std::size_t i) const { return norm2(states[i].x - states[i].z); }

  /// CSV with header t,x1[,x2][,mu1[,mu2]][,gap2].
  void write_csv(std::ostream& out) const;
};

Trajectory simulate_X(const Potential& potential, const Schedule& schedule, double r, const Vec& x0,
                      const Vec& mu0, const SdeOptions& options, RngStream& rng);

Trajectory simulate_Y(const Potential& potential, const Schedule& schedule, double r, const Vec& y0,
                      const Vec& mu0, const SdeOptions& options, RngStream& rng);

Trajectory simulate_Z_annealed(const Potential& potential, const Schedule& schedule, double r,
                               const Vec& z0, const SdeOptions& options, RngStream& rng,
                               const AnnealedOverrides& overrides = {});

Trajectory simulate_kolmogorov(const Potential& potential, const Vec& z0, const SdeOptions& options,
                               RngStream& rng);

/// Y (with g = 1) and Z = Kolmogorov process driven by the same increments.
Trajectory simulate_coupled_YZ(const Potential& potential, double r, const Vec& y0, const Vec& z0,
                               const Vec& mu0, const SdeOptions& options, RngStream& rng);

/// Receives samples from an ensemble run. Calls for different paths may come
/// from different worker threads at the same time, so implementations must
/// only write per-path state.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void observe(std::size_t path, std::size_t step, double t, const PathSnapshot& state) = 0;
};

struct EnsembleSpec {
  std::size_t paths = 256;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  unsigned workers = 0;          ///< 0 = hardware concurrency
  std::size_t observe_every = 100;  ///< steps between observer calls (step 0 included)
  double blowup_radius = 1e6;
  AnnealedOverrides overrides;   ///< Z_annealed only
};

struct EnsembleResult {
  std::size_t steps = 0;
  std::vector<char> blown_up;  ///< per path
  std::vector<double> blowup_time;
  std::size_t blown_up_count() const;
};

/// Initial states: one per path, or a single state shared by all paths.
/// Path i draws its increments from RngStream(seed, i).
EnsembleResult run_ensemble(ProcessKind kind, const Potential& potential, const Schedule& schedule,
                            double r, const std::vector<Vec>& x0, const std::vector<Vec>& mu0,
                            const std::vector<Vec>& z0, const EnsembleSpec& spec,
                            PathObserver& observer);

/// Number of Euler steps covering [0, horizon].
std::size_t step_count(double horizon, double dt);

}  // namespace sidiff
