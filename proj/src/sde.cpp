#include "sidiff/sde.hpp"

#include <algorithm>
#include <cmath>

#include "sidiff/csv.hpp"
#include "sidiff/error.hpp"
#include "sidiff/parallel.hpp"

namespace sidiff {

const char* to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::X: return "X";
    case ProcessKind::Y_mu: return "Y_mu";
    case ProcessKind::Z_annealed: return "Z_annealed";
    case ProcessKind::Z_kolmogorov: return "Z_kolmogorov";
    case ProcessKind::coupled_YZ: return "coupled_YZ";
  }
  return "unknown";
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(horizon >= dt)) throw DomainError("horizon must be at least dt");
  const double ratio = horizon / dt;
  if (ratio >= 1e9) throw DomainError("horizon/dt must stay below 1e9");
  return static_cast<std::size_t>(std::ceil(ratio - 1e-9));
}

std::size_t EnsembleResult::blown_up_count() const {
  return static_cast<std::size_t>(std::count(blown_up.begin(), blown_up.end(), char{1}));
}

namespace {

// Steps per coefficient table; fixed so that table values never depend on how
// a run is split across workers.
constexpr std::size_t kChunk = 4096;

struct PathState {
  PathSnapshot s;
  Vec r_mu0{0.0, 0.0};  // r * mu0, for the X kind
  bool alive = true;
  double blowup_time = 0.0;
};

// Time-dependent coefficients for steps n0..n1 (inclusive):
//   Z_annealed: c1 = eps(t_n) sqrt(dt), c2 = 2 / a(t_n)
//   X:          c1 = g(t_n)
//   Y_mu:       c1 = g(t_n), c2 = 1 / (r + t_n)
//   coupled_YZ: c2 = 1 / (r + t_n)
class CoefficientTable {
 public:
  CoefficientTable(ProcessKind kind, const Schedule& schedule, double r, double dt,
                   const AnnealedOverrides& overrides)
      : kind_(kind), schedule_(schedule), r_(r), dt_(dt), overrides_(overrides) {
    c1_.resize(kChunk + 1);
    c2_.resize(kChunk + 1);
  }

  void fill(std::size_t n0, std::size_t n1) {
    n0_ = n0;
    for (std::size_t n = n0; n <= n1; ++n) {
      const double t = static_cast<double>(n) * dt_;
      double c1 = 0.0;
      double c2 = 0.0;
      switch (kind_) {
        case ProcessKind::Z_annealed: {
          double eps2 = 0.0;
          double a = 0.0;
          if (!overrides_.eps2 || !overrides_.a) {
            const AnnealingState st = state_at(n, t);
            eps2 = st.eps2;
            a = st.a;
          }
          if (overrides_.eps2) eps2 = *overrides_.eps2;
          if (overrides_.a) a = *overrides_.a;
          c1 = std::sqrt(eps2 * dt_);
          c2 = std::isinf(a) ? 0.0 : 2.0 / a;
          break;
        }
        case ProcessKind::X: c1 = schedule_.g(t); break;
        case ProcessKind::Y_mu:
          c1 = schedule_.g(t);
          c2 = 1.0 / (r_ + t);
          break;
        case ProcessKind::coupled_YZ: c2 = 1.0 / (r_ + t); break;
        case ProcessKind::Z_kolmogorov: break;
      }
      c1_[n - n0] = c1;
      c2_[n - n0] = c2;
    }
  }

  double c1(std::size_t n) const { return c1_[n - n0_]; }
  double c2(std::size_t n) const { return c2_[n - n0_]; }

 private:
  // G^-1 along the step grid, each solve seeded from the previous one.
  AnnealingState state_at(std::size_t n, double t) {
    if (cached_n_ && *cached_n_ == n) return cached_;
    std::optional<double> hint;
    if (cached_n_ && *cached_n_ + 1 == n) {
      const double u = cached_.inner_time;
      hint = u + dt_ / schedule_.g(u);
    }
    cached_ = annealing_state(schedule_, r_, t, hint);
    cached_n_ = n;
    return cached_;
  }

  ProcessKind kind_;
  const Schedule& schedule_;
  double r_;
  double dt_;
  AnnealedOverrides overrides_;
  std::size_t n0_ = 0;
  std::vector<double> c1_;
  std::vector<double> c2_;
  std::optional<std::size_t> cached_n_;
  AnnealingState cached_{};
};

struct RunContext {
  ProcessKind kind;
  const Potential* potential;
  double dt;
  double sqrt_dt;
  double radius2;
  bool noise;
  std::size_t observe_every;
  std::size_t steps;
  double r;
};

template <int D, ProcessKind K>
inline bool step_one(const RunContext& ctx, const CoefficientTable& tab, PathState& p, RngStream& rng,
                     std::size_t n, double t_next) {
  const Potential& pot = *ctx.potential;
  const double dt = ctx.dt;
  const double half_dt = 0.5 * dt;
  PathSnapshot& s = p.s;
  Vec xi{0.0, 0.0};
  if (ctx.noise) {
    xi[0] = rng.normal();
    if constexpr (D == 2) xi[1] = rng.normal();
  }
  switch (K) {
    case ProcessKind::Z_annealed: {
      const Vec g = pot.gradient(s.x);
      const double sigma = tab.c1(n);
      const double kappa = tab.c2(n);
      s.x = {s.x[0] + sigma * xi[0] - dt * (g[0] + kappa * s.x[0]),
             s.x[1] + sigma * xi[1] - dt * (g[1] + kappa * s.x[1])};
      return norm2(s.x) <= ctx.radius2;
    }
    case ProcessKind::Z_kolmogorov: {
      const Vec g = pot.gradient(s.x);
      s.x = {s.x[0] + ctx.sqrt_dt * xi[0] - dt * g[0], s.x[1] + ctx.sqrt_dt * xi[1] - dt * g[1]};
      return norm2(s.x) <= ctx.radius2;
    }
    case ProcessKind::X: {
      const Vec g = pot.gradient(s.x - s.mu);
      const double gn = tab.c1(n);
      const Vec prev = s.x;
      s.x = {s.x[0] + ctx.sqrt_dt * xi[0] - dt * gn * g[0], s.x[1] + ctx.sqrt_dt * xi[1] - dt * gn * g[1]};
      s.integral = {s.integral[0] + half_dt * (prev[0] + s.x[0]), s.integral[1] + half_dt * (prev[1] + s.x[1])};
      const double inv = 1.0 / (ctx.r + t_next);
      s.mu = {(p.r_mu0[0] + s.integral[0]) * inv, (p.r_mu0[1] + s.integral[1]) * inv};
      return norm2(s.x) <= ctx.radius2;
    }
    case ProcessKind::Y_mu:
    case ProcessKind::coupled_YZ: {
      constexpr bool coupled = K == ProcessKind::coupled_YZ;
      const Vec g = pot.gradient(s.x);
      const double gn = coupled ? 1.0 : tab.c1(n);
      const double w0 = tab.c2(n);
      const double w1 = tab.c2(n + 1);
      const Vec prev = s.x;
      s.x = {s.x[0] + ctx.sqrt_dt * xi[0] - dt * (gn * g[0] + w0 * s.x[0]),
             s.x[1] + ctx.sqrt_dt * xi[1] - dt * (gn * g[1] + w0 * s.x[1])};
      s.mu = {s.mu[0] + half_dt * (w0 * prev[0] + w1 * s.x[0]), s.mu[1] + half_dt * (w0 * prev[1] + w1 * s.x[1])};
      s.integral = {s.integral[0] + half_dt * (prev[0] + s.x[0]), s.integral[1] + half_dt * (prev[1] + s.x[1])};
      bool ok = norm2(s.x) <= ctx.radius2;
      if constexpr (coupled) {
        const Vec gz = pot.gradient(s.z);
        s.z = {s.z[0] + ctx.sqrt_dt * xi[0] - dt * gz[0], s.z[1] + ctx.sqrt_dt * xi[1] - dt * gz[1]};
        ok = ok && norm2(s.z) <= ctx.radius2;
      }
      return ok;
    }
  }
  return false;
}

// Paths advanced in lockstep; independent dependency chains overlap in the CPU.
constexpr std::size_t kBatch = 8;

template <int D, ProcessKind K>
void advance(const RunContext& ctx, const CoefficientTable& tab, PathState* paths, RngStream* rngs,
             std::size_t count, std::size_t n0, std::size_t n1, std::size_t first_path,
             PathObserver& observer) {
  std::size_t until_observe = ctx.observe_every - n0 % ctx.observe_every;
  for (std::size_t n = n0; n < n1; ++n) {
    const double t_next = static_cast<double>(n + 1) * ctx.dt;
    for (std::size_t b = 0; b < count; ++b) {
      PathState& p = paths[b];
      if (!p.alive) continue;
      if (!step_one<D, K>(ctx, tab, p, rngs[b], n, t_next)) {
        p.alive = false;
        p.blowup_time = t_next;
      }
    }
    const bool observe = --until_observe == 0 || n + 1 == ctx.steps;
    if (until_observe == 0) until_observe = ctx.observe_every;
    if (observe)
      for (std::size_t b = 0; b < count; ++b)
        if (paths[b].alive) observer.observe(first_path + b, n + 1, t_next, paths[b].s);
  }
}

template <int D, class F>
void dispatch_kind(ProcessKind kind, F&& f) {
  switch (kind) {
    case ProcessKind::X: f.template operator()<D, ProcessKind::X>(); break;
    case ProcessKind::Y_mu: f.template operator()<D, ProcessKind::Y_mu>(); break;
    case ProcessKind::Z_annealed: f.template operator()<D, ProcessKind::Z_annealed>(); break;
    case ProcessKind::Z_kolmogorov: f.template operator()<D, ProcessKind::Z_kolmogorov>(); break;
    case ProcessKind::coupled_YZ: f.template operator()<D, ProcessKind::coupled_YZ>(); break;
  }
}

template <class F>
void dispatch(int dim, ProcessKind kind, F&& f) {
  if (dim == 1) {
    dispatch_kind<1>(kind, f);
  } else {
    dispatch_kind<2>(kind, f);
  }
}

void run_paths(const RunContext& ctx, const Schedule& schedule, const AnnealedOverrides& overrides,
               std::vector<PathState>& states, std::vector<RngStream>& rngs, std::size_t first_path,
               PathObserver& observer) {
  CoefficientTable table(ctx.kind, schedule, ctx.r, ctx.dt, overrides);
  const int dim = ctx.potential->dimension();
  for (std::size_t i = 0; i < states.size(); ++i) observer.observe(first_path + i, 0, 0.0, states[i].s);
  for (std::size_t n0 = 0; n0 < ctx.steps; n0 += kChunk) {
    const std::size_t n1 = std::min(ctx.steps, n0 + kChunk);
    table.fill(n0, n1);
    for (std::size_t i = 0; i < states.size(); i += kBatch) {
      const std::size_t count = std::min(kBatch, states.size() - i);
      dispatch(dim, ctx.kind, [&]<int D, ProcessKind K>() {
        advance<D, K>(ctx, table, &states[i], &rngs[i], count, n0, n1, first_path + i, observer);
      });
    }
  }
}

PathState initial_state(ProcessKind kind, double r, const Vec& x0, const Vec& mu0, const Vec& z0) {
  PathState p;
  p.s.x = x0;
  p.s.mu = mu0;
  p.s.z = z0;
  if (kind == ProcessKind::X) p.r_mu0 = r * mu0;
  if (kind == ProcessKind::Z_annealed || kind == ProcessKind::Z_kolmogorov) p.s.mu = {0.0, 0.0};
  if (kind != ProcessKind::coupled_YZ) p.s.z = {0.0, 0.0};
  return p;
}

void check_point(const Potential& potential, const Vec& x, const char* what) {
  if (!all_finite(x)) throw DomainError(std::string(what) + " is not finite");
  if (potential.dimension() == 1 && x[1] != 0.0)
    throw DomainError(std::string(what) + " has a nonzero second coordinate for a 1D potential");
}

class Recorder final : public PathObserver {
 public:
  explicit Recorder(Trajectory& traj) : traj_(traj) {}
  void observe(std::size_t, std::size_t, double t, const PathSnapshot& state) override {
    traj_.t.push_back(t);
    traj_.states.push_back(state);
  }

 private:
  Trajectory& traj_;
};

Trajectory simulate_single(ProcessKind kind, const Potential& potential, const Schedule& schedule,
                           double r, const Vec& x0, const Vec& mu0, const Vec& z0,
                           const SdeOptions& options, RngStream& rng,
                           const AnnealedOverrides& overrides) {
  if (!(r > 0.0)) throw ConfigError("initial weight r must be positive");
  if (options.stride == 0) throw DomainError("stride must be positive");
  if (!(options.blowup_radius > 0.0)) throw DomainError("blow-up radius must be positive");
  check_point(potential, x0, "initial state");
  check_point(potential, mu0, "initial mean");
  check_point(potential, z0, "initial Z state");
  if (overrides.eps2 && !(*overrides.eps2 > 0.0)) throw DomainError("frozen eps^2 must be positive");
  if (overrides.a && !(*overrides.a > 0.0)) throw DomainError("frozen a must be positive");

  Trajectory traj;
  traj.kind = kind;
  traj.dimension = potential.dimension();
  traj.dt = options.dt;
  traj.seed = rng.seed();
  traj.stream = rng.index();
  const RunContext ctx{kind,
                       &potential,
                       options.dt,
                       std::sqrt(options.dt),
                       options.blowup_radius * options.blowup_radius,
                       !options.zero_noise,
                       options.stride,
                       step_count(options.horizon, options.dt),
                       r};
  std::vector<PathState> states{initial_state(kind, r, x0, mu0, z0)};
  std::vector<RngStream> rngs{rng};
  Recorder recorder(traj);
  run_paths(ctx, schedule, overrides, states, rngs, 0, recorder);
  rng = rngs.front();
  traj.blew_up = !states.front().alive;
  traj.blowup_time = states.front().blowup_time;
  return traj;
}

}  // namespace

void Trajectory::write_csv(std::ostream& out) const {
  std::vector<std::string> header{"t", "x1"};
  if (dimension == 2) header.push_back("x2");
  const bool has_mu = kind == ProcessKind::X || kind == ProcessKind::Y_mu || kind == ProcessKind::coupled_YZ;
  if (has_mu) {
    header.push_back("mu1");
    if (dimension == 2) header.push_back("mu2");
  }
  if (kind == ProcessKind::coupled_YZ) header.push_back("gap2");
  CsvWriter csv(out, header);
  std::vector<double> row;
  for (std::size_t i = 0; i < t.size(); ++i) {
    row.clear();
    row.push_back(t[i]);
    row.push_back(states[i].x[0]);
    if (dimension == 2) row.push_back(states[i].x[1]);
    if (has_mu) {
      row.push_back(states[i].mu[0]);
      if (dimension == 2) row.push_back(states[i].mu[1]);
    }
    if (kind == ProcessKind::coupled_YZ) row.push_back(gap2(i));
    csv.row(row);
  }
}

Trajectory simulate_X(const Potential& potential, const Schedule& schedule, double r, const Vec& x0,
                      const Vec& mu0, const SdeOptions& options, RngStream& rng) {
  return simulate_single(ProcessKind::X, potential, schedule, r, x0, mu0, {0.0, 0.0}, options, rng, {});
}

Trajectory simulate_Y(const Potential& potential, const Schedule& schedule, double r, const Vec& y0,
                      const Vec& mu0, const SdeOptions& options, RngStream& rng) {
  return simulate_single(ProcessKind::Y_mu, potential, schedule, r, y0, mu0, {0.0, 0.0}, options, rng, {});
}

Trajectory simulate_Z_annealed(const Potential& potential, const Schedule& schedule, double r,
                               const Vec& z0, const SdeOptions& options, RngStream& rng,
                               const AnnealedOverrides& overrides) {
  return simulate_single(ProcessKind::Z_annealed, potential, schedule, r, z0, {0.0, 0.0}, {0.0, 0.0},
                         options, rng, overrides);
}

Trajectory simulate_kolmogorov(const Potential& potential, const Vec& z0, const SdeOptions& options,
                               RngStream& rng) {
  return simulate_single(ProcessKind::Z_kolmogorov, potential, Schedule::constant(1.0), 1.0, z0,
                         {0.0, 0.0}, {0.0, 0.0}, options, rng, {});
}

Trajectory simulate_coupled_YZ(const Potential& potential, double r, const Vec& y0, const Vec& z0,
                               const Vec& mu0, const SdeOptions& options, RngStream& rng) {
  return simulate_single(ProcessKind::coupled_YZ, potential, Schedule::constant(1.0), r, y0, mu0, z0,
                         options, rng, {});
}

EnsembleResult run_ensemble(ProcessKind kind, const Potential& potential, const Schedule& schedule,
                            double r, const std::vector<Vec>& x0, const std::vector<Vec>& mu0,
                            const std::vector<Vec>& z0, const EnsembleSpec& spec,
                            PathObserver& observer) {
  if (spec.paths == 0) throw ConfigError("ensemble needs at least one path");
  if (!(r > 0.0)) throw ConfigError("initial weight r must be positive");
  if (spec.observe_every == 0) throw DomainError("observe_every must be positive");
  if (!z0.empty() && kind != ProcessKind::coupled_YZ)
    throw ConfigError("initial Z state applies only to the coupled pair");
  if (!mu0.empty() && (kind == ProcessKind::Z_annealed || kind == ProcessKind::Z_kolmogorov))
    throw ConfigError("initial mean applies only to self-interacting processes");
  auto pick = [&](const std::vector<Vec>& v, std::size_t i, const char* what) -> Vec {
    if (v.empty()) return {0.0, 0.0};
    if (v.size() != 1 && v.size() != spec.paths)
      throw ConfigError(std::string(what) + ": need one initial value or one per path");
    const Vec& x = v.size() == 1 ? v.front() : v[i];
    check_point(potential, x, what);
    return x;
  };

  const bool uses_schedule = kind != ProcessKind::Z_kolmogorov && kind != ProcessKind::coupled_YZ;
  const Schedule unit = Schedule::constant(1.0);
  const Schedule& sched = uses_schedule ? schedule : unit;
  const RunContext ctx{kind,
                       &potential,
                       spec.dt,
                       std::sqrt(spec.dt),
                       spec.blowup_radius * spec.blowup_radius,
                       true,
                       spec.observe_every,
                       step_count(spec.horizon, spec.dt),
                       r};

  // Initial states are validated up front so errors surface before any compute.
  std::vector<PathState> all(spec.paths);
  for (std::size_t i = 0; i < spec.paths; ++i)
    all[i] = initial_state(kind, r, pick(x0, i, "initial state"), pick(mu0, i, "initial mean"),
                           pick(z0, i, "initial Z state"));

  EnsembleResult result;
  result.steps = ctx.steps;
  result.blown_up.assign(spec.paths, 0);
  result.blowup_time.assign(spec.paths, 0.0);
  parallel_blocks(spec.paths, resolve_workers(spec.workers), [&](std::size_t begin, std::size_t end) {
    std::vector<PathState> states(all.begin() + static_cast<std::ptrdiff_t>(begin),
                                  all.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<RngStream> rngs;
    rngs.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) rngs.emplace_back(spec.seed, i);
    run_paths(ctx, sched, spec.overrides, states, rngs, begin, observer);
    for (std::size_t i = begin; i < end; ++i) {
      result.blown_up[i] = states[i - begin].alive ? 0 : 1;
      result.blowup_time[i] = states[i - begin].blowup_time;
    }
  });
  return result;
}

}  // namespace sidiff
