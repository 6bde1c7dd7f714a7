#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "sidiff/error.hpp"
#include "sidiff/gibbs.hpp"
#include "sidiff/sde.hpp"

using namespace sidiff;

namespace {

// Records the final observed state of every path.
class FinalStates final : public PathObserver {
 public:
  explicit FinalStates(std::size_t paths, std::size_t last_step) : x(paths), last_(last_step) {}
  void observe(std::size_t path, std::size_t step, double, const PathSnapshot& s) override {
    if (step == last_) x[path] = s.x[0];
  }
  std::vector<double> x;

 private:
  std::size_t last_;
};

// Per-path time averages of x and x^2 over the second half of the run.
class Moments final : public PathObserver {
 public:
  Moments(std::size_t paths, std::size_t from) : s1(paths), s2(paths), n(paths), from_(from) {}
  void observe(std::size_t path, std::size_t step, double, const PathSnapshot& s) override {
    if (step < from_) return;
    s1[path] += s.x[0];
    s2[path] += s.x[0] * s.x[0];
    n[path] += 1;
  }
  std::vector<double> s1, s2, n;

 private:
  std::size_t from_;
};

}  // namespace

TEST_SUITE("sde") {
  TEST_CASE("step count and horizon checks") {
    CHECK(step_count(1.0, 1e-3) == 1000);
    CHECK(step_count(1e4, 1e-3) == 10000000);
    CHECK_THROWS_AS(step_count(1e-3, 1e-2), DomainError);
    CHECK_THROWS_AS(step_count(1e7, 1e-3), DomainError);
    CHECK_THROWS_AS(step_count(1.0, 0.0), DomainError);
  }

  TEST_CASE("zero-noise Y on the quadratic follows y0 e^-t / (1 + t)") {
    SdeOptions opt;
    opt.dt = 1e-4;
    opt.horizon = 5.0;
    opt.stride = 1000;
    opt.zero_noise = true;
    RngStream rng(1, 0);
    const auto tr = simulate_Y(make_potential("quadratic"), Schedule::constant(1.0), 1.0, {2.0, 0.0}, {0.0, 0.0},
                               opt, rng);
    REQUIRE(tr.t.back() == doctest::Approx(5.0));
    // Closed form; the RK4 oracle reproduces it to 1e-15. Euler error is O(dt).
    CHECK(tr.states.back().x[0] == doctest::Approx(0.002245982333028489).epsilon(5e-4));
  }

  TEST_CASE("zero-noise coupled pair gap") {
    SdeOptions opt;
    opt.dt = 1e-4;
    opt.horizon = 5.0;
    opt.stride = 1000;
    opt.zero_noise = true;
    RngStream rng(1, 0);
    const auto tr = simulate_coupled_YZ(make_potential("quadratic"), 1.0, {2.0, 0.0}, {2.0, 0.0}, {0.0, 0.0}, opt,
                                        rng);
    const auto& s = tr.states.back();
    CHECK(s.x[0] - s.z[0] == doctest::Approx(-0.011229911665142445).epsilon(5e-4));
    CHECK(tr.gap2(tr.states.size() - 1) == doctest::Approx(0.011229911665142445 * 0.011229911665142445).epsilon(1e-3));
  }

  TEST_CASE("identical seeds give identical trajectories") {
    SdeOptions opt;
    opt.horizon = 3.0;
    opt.stride = 10;
    const Potential p = make_potential("double_well");
    const Schedule s = Schedule::logarithmic(2.0, std::exp(1.0));
    RngStream a(99, 4);
    RngStream b(99, 4);
    RngStream c(99, 5);
    const auto ta = simulate_Z_annealed(p, s, 1.0, {0.3, 0.0}, opt, a);
    const auto tb = simulate_Z_annealed(p, s, 1.0, {0.3, 0.0}, opt, b);
    const auto tc = simulate_Z_annealed(p, s, 1.0, {0.3, 0.0}, opt, c);
    std::ostringstream oa, ob, oc;
    ta.write_csv(oa);
    tb.write_csv(ob);
    tc.write_csv(oc);
    CHECK(oa.str() == ob.str());
    CHECK(oa.str() != oc.str());
  }

  TEST_CASE("ensembles do not depend on the worker count") {
    const Potential p = make_potential("double_well");
    const Schedule s = Schedule::logarithmic(4.0, std::exp(1.0));
    EnsembleSpec spec;
    spec.paths = 37;
    spec.horizon = 2.0;
    spec.seed = 5;
    spec.observe_every = 50;
    const std::size_t last = step_count(spec.horizon, spec.dt);
    std::vector<std::vector<double>> finals;
    for (unsigned w : {1u, 3u, 8u}) {
      spec.workers = w;
      FinalStates obs(spec.paths, last);
      run_ensemble(ProcessKind::Z_annealed, p, s, 1.0, {{0.0, 0.0}}, {}, {}, spec, obs);
      finals.push_back(obs.x);
    }
    CHECK(finals[0] == finals[1]);
    CHECK(finals[0] == finals[2]);
  }

  TEST_CASE("Kolmogorov process on the quadratic has stationary variance 1/2") {
    EnsembleSpec spec;
    spec.paths = 64;
    spec.horizon = 200.0;
    spec.dt = 1e-2;
    spec.seed = 8;
    spec.observe_every = 10;
    const std::size_t steps = step_count(spec.horizon, spec.dt);
    Moments m(spec.paths, steps / 10);
    run_ensemble(ProcessKind::Z_kolmogorov, make_potential("quadratic"), Schedule::constant(1.0), 1.0, {{0.0, 0.0}}, {},
                 {}, spec, m);
    double s1 = 0.0, s2 = 0.0, n = 0.0;
    for (std::size_t i = 0; i < spec.paths; ++i) {
      s1 += m.s1[i];
      s2 += m.s2[i];
      n += m.n[i];
    }
    // Euler bias for dt = 0.01 is about dt/4 relative.
    CHECK(std::abs(s1 / n) < 0.03);
    CHECK(s2 / n == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("frozen annealed coefficients sample the Gibbs measure") {
    EnsembleSpec spec;
    spec.paths = 64;
    spec.horizon = 150.0;
    spec.dt = 2e-3;
    spec.seed = 12;
    spec.observe_every = 50;
    spec.overrides.eps2 = 0.6;
    spec.overrides.a = 4.0;
    const Potential p = make_potential("double_well");
    const std::size_t steps = step_count(spec.horizon, spec.dt);
    Moments m(spec.paths, steps / 10);
    run_ensemble(ProcessKind::Z_annealed, p, Schedule::logarithmic(1.0, std::exp(1.0)), 1.0, {{1.0, 0.0}}, {}, {},
                 spec, m);
    double s2 = 0.0, n = 0.0;
    for (std::size_t i = 0; i < spec.paths; ++i) {
      s2 += m.s2[i];
      n += m.n[i];
    }
    CHECK(s2 / n == doctest::Approx(GibbsMeasure(p, 0.6, 4.0).second_moment()).epsilon(0.05));
  }

  TEST_CASE("blow-up is detected and reported per path") {
    EnsembleSpec spec;
    spec.paths = 4;
    spec.horizon = 1.0;
    spec.dt = 0.5;
    spec.seed = 1;
    spec.observe_every = 1;
    Moments m(spec.paths, 0);
    // Explicit Euler on x^4 with a large step diverges from x0 = 10.
    const auto res = run_ensemble(ProcessKind::Z_kolmogorov, make_potential("double_well"), Schedule::constant(1.0),
                                  1.0, {{10.0, 0.0}}, {}, {}, spec, m);
    CHECK(res.blown_up_count() == 4);
    CHECK(res.blowup_time[0] > 0.0);
    CHECK_THROWS_AS(run_ensemble(ProcessKind::Z_kolmogorov, make_potential("double_well"), Schedule::constant(1.0),
                                 1.0, {}, {}, {{1.0, 0.0}}, spec, m),
                    ConfigError);
  }

  TEST_CASE("initial values must be finite and match the dimension") {
    SdeOptions opt;
    RngStream rng(1, 0);
    const Potential p = make_potential("double_well");
    CHECK_THROWS_AS(simulate_kolmogorov(p, {NAN, 0.0}, opt, rng), DomainError);
    CHECK_THROWS_AS(simulate_kolmogorov(p, {0.0, 1.0}, opt, rng), DomainError);
  }
}
