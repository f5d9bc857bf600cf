#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "tlc/grid.hpp"
#include "tlc/ipa.hpp"
#include "tlc/simulate.hpp"
#include "tlc/util.hpp"

using namespace tlc;

namespace {

EventRecord record(double t, EventKind kind, int queue) {
  EventRecord rec;
  rec.time = t;
  rec.kind = kind;
  rec.queue = queue;
  return rec;
}

SimConfig queue2_scenario() {
  SimConfig cfg;
  cfg.backend = Backend::Fluid;
  cfg.horizon = 35.0;
  cfg.alpha_bar = {0.0, 0.25, 0.0, 0.0};
  cfg.service_rate = {1, 1, 1, 1};
  cfg.theta.sec = {15, 20, 30, 30};
  cfg.weights = {0, 1, 0, 0};
  cfg.fluid.constant = true;
  return cfg;
}

SimConfig full_fluid_scenario(std::uint64_t seed) {
  SimConfig cfg;
  cfg.backend = Backend::Fluid;
  cfg.horizon = 2000.0;
  cfg.alpha_bar = {0.25, 0.25, 0.0, 0.25};
  cfg.service_rate = {1, 1, 1, 1};
  cfg.theta.sec = {22, 27, 19, 24};
  cfg.weights = {1, 1, 1, 1};
  cfg.fluid.holding_time_mean = 50.0;
  cfg.fluid.level_scale = 2.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("event-time derivatives follow the switch counters") {
  IpaState ipa;
  SUBCASE("first green-to-red of queue 1") {
    at1(ipa.zeta, 1) = 1;  // counters include the event itself
    const auto tp = event_time_derivative(record(15, EventKind::GreenToRed, 1), ipa);
    CHECK(tp == std::array<double, 4>{1, 0, 0, 0});
  }
  SUBCASE("exogenous rate change") {
    at1(ipa.zeta, 1) = 3;
    at1(ipa.rho, 1) = 3;
    const auto tp = event_time_derivative(record(100, EventKind::RateChange, 2), ipa);
    CHECK(tp == std::array<double, 4>{0, 0, 0, 0});
  }
  SUBCASE("second red-to-green of queue 3") {
    at1(ipa.zeta, 3) = 2;
    at1(ipa.rho, 3) = 2;
    const auto tp = event_time_derivative(record(90, EventKind::RedToGreen, 3), ipa);
    CHECK(tp == std::array<double, 4>{0, 0, 2, 2});
  }
  SUBCASE("emptiness event divides by the pre-event drift") {
    at1(ipa.zeta, 1) = 1;
    ipa.xp(2, 1) = 1.0;
    EventRecord rec = record(20, EventKind::NepEnd, 2);
    rec.alpha_minus = 0.25;
    rec.h = 1.0;
    const auto tp = event_time_derivative(rec, ipa);
    CHECK(at1(tp, 1) == doctest::Approx(1.0 / 0.75));
  }
  SUBCASE("degenerate emptiness is treated as exogenous") {
    ipa.xp(2, 1) = 1.0;
    EventRecord rec = record(20, EventKind::NepEnd, 2);
    rec.alpha_minus = 1.0;
    rec.h = 1.0;
    const auto tp = event_time_derivative(rec, ipa);
    CHECK(tp == std::array<double, 4>{0, 0, 0, 0});
  }
}

TEST_CASE("apply_event: spec examples") {
  SUBCASE("emptiness of queue 3 resets its row") {
    IpaState ipa;
    at1(ipa.in_nep, 3) = true;
    ipa.xprime[2] = {0.4, 0.2, -1.0, -0.5};
    ResolvedRates r;
    r.alpha_minus = 0.5;
    r.h_minus = 1.0;
    apply_event(ipa, record(40, EventKind::NepEnd, 3), r);
    CHECK(ipa.xprime[2] == std::array<double, 4>{0, 0, 0, 0});
    CHECK_FALSE(at1(ipa.in_nep, 3));
  }
  SUBCASE("emptiness of queue 1 transfers its row into queue 3") {
    IpaState ipa;
    at1(ipa.in_nep, 1) = true;
    at1(ipa.in_nep, 3) = true;
    ipa.xprime[0] = {-1, 0, 0, 0};
    ipa.xprime[2] = {2, 1, 0, 0};
    ResolvedRates r;
    r.alpha_minus = 0.25;
    r.h_minus = 1.0;
    apply_event(ipa, record(40, EventKind::NepEnd, 1), r);
    CHECK(ipa.xprime[2] == std::array<double, 4>{1, 1, 0, 0});
    CHECK(ipa.xprime[0] == std::array<double, 4>{0, 0, 0, 0});
  }
  SUBCASE("green-to-red of queue 1 bumps row 3 by beta1 times the counters") {
    IpaState ipa;
    at1(ipa.green, 1) = true;
    at1(ipa.in_nep, 3) = true;
    at1(ipa.zeta, 1) = 2;
    at1(ipa.rho, 1) = 1;
    ResolvedRates r;
    r.beta1_minus = 1.0;
    r.h_minus = 1.0;
    apply_event(ipa, record(77, EventKind::GreenToRed, 1), r);
    CHECK(ipa.xprime[2] == std::array<double, 4>{2, 1, 0, 0});
    CHECK_FALSE(at1(ipa.green, 1));
  }
  SUBCASE("degenerate queue-1 emptiness skips the transfer and is counted") {
    IpaState ipa;
    at1(ipa.in_nep, 1) = true;
    at1(ipa.in_nep, 3) = true;
    ipa.xprime[0] = {-1, 0, 0, 0};
    ipa.xprime[2] = {2, 1, 0, 0};
    ResolvedRates r;
    r.alpha_minus = 1.0;  // drift alpha - h == 0
    r.h_minus = 1.0;
    apply_event(ipa, record(40, EventKind::NepEnd, 1), r);
    CHECK(ipa.xprime[2] == std::array<double, 4>{2, 1, 0, 0});
    CHECK(ipa.xprime[0] == std::array<double, 4>{0, 0, 0, 0});
    CHECK(ipa.n_degenerate == 1);
  }
}

TEST_CASE("accumulate integrates weighted derivative rows over NEPs") {
  IpaState ipa;
  const std::array<double, 4> w{0, 1, 0, 0};
  SUBCASE("zero rows leave dL unchanged") {
    at1(ipa.in_nep, 2) = true;
    accumulate(ipa, 0.0, 10.0, w, 35.0);
    CHECK(ipa.dL == std::array<double, 4>{0, 0, 0, 0});
  }
  SUBCASE("queue-2 scenario value") {
    at1(ipa.in_nep, 2) = true;
    ipa.xp(2, 1) = 1.0;
    accumulate(ipa, 15.0, 20.0, w, 35.0);
    CHECK(at1(ipa.dL, 1) == doctest::Approx(5.0 / 35.0).epsilon(1e-12));
  }
  SUBCASE("consecutive intervals add") {
    at1(ipa.in_nep, 2) = true;
    ipa.xp(2, 1) = 1.0;
    accumulate(ipa, 15.0, 18.0, w, 35.0);
    accumulate(ipa, 18.0, 20.0, w, 35.0);
    CHECK(at1(ipa.dL, 1) == doctest::Approx(5.0 / 35.0).epsilon(1e-12));
  }
  SUBCASE("queues outside a NEP do not accumulate") {
    ipa.xp(2, 1) = 1.0;
    accumulate(ipa, 15.0, 20.0, w, 35.0);
    CHECK(at1(ipa.dL, 1) == 0.0);
  }
  SUBCASE("negative interval rejected") {
    CHECK_THROWS_AS(accumulate(ipa, 5.0, 4.0, w, 35.0), std::invalid_argument);
  }
}

TEST_CASE("windowed rate estimation on discrete streams") {
  Trace trace;
  trace.backend = Backend::Discrete;
  trace.horizon = 100.0;
  at1(trace.arrivals, 2) = {1.0, 2.0, 3.0};
  RateEstimatorConfig cfg;
  cfg.window = 3.0;

  SUBCASE("no events in the window") {
    CHECK(estimate_rate(trace, 50.0, RateKind::Arrival, 2, cfg,
                        RateEstimatorConfig::Direction::Before) == 0.0);
  }
  SUBCASE("symmetric window (0.5, 3.5] counts all three") {
    CHECK(estimate_rate(trace, 2.0, RateKind::Arrival, 2, cfg,
                        RateEstimatorConfig::Direction::Symmetric) == doctest::Approx(1.0));
  }
  SUBCASE("window truncation shortens the divisor, anchor excluded") {
    // Before-window anchored at t=2 reaches only back to 0 and does not
    // count the event at the anchor itself: 1 event / 2 s.
    CHECK(estimate_rate(trace, 2.0, RateKind::Arrival, 2, cfg,
                        RateEstimatorConfig::Direction::Before) == doctest::Approx(0.5));
  }
  SUBCASE("window must be positive") {
    cfg.window = 0.0;
    CHECK_THROWS_AS(estimate_rate(trace, 2.0, RateKind::Arrival, 2, cfg), std::invalid_argument);
  }
  SUBCASE("poisson windows average near the true rate") {
    Trace ptrace;
    ptrace.backend = Backend::Discrete;
    ptrace.horizon = 5000.0;
    at1(ptrace.arrivals, 1) = poisson_arrivals(0.25, 5000.0, 99);
    RateEstimatorConfig pcfg;
    pcfg.window = 20.0;
    double total = 0.0;
    const int windows = 200;
    for (int i = 0; i < windows; ++i) {
      const double t = 20.0 + i * 24.0;
      total += estimate_rate(ptrace, t, RateKind::Arrival, 1, pcfg,
                             RateEstimatorConfig::Direction::Before);
    }
    CHECK(std::abs(total / windows - 0.25) <= 0.2 * 0.25);
  }
}

TEST_CASE("gradient of the zero-arrival path is zero") {
  SimConfig cfg = queue2_scenario();
  cfg.alpha_bar = {0, 0, 0, 0};
  const SamplePathResult res = simulate(cfg);
  GradientConfig gcfg;
  gcfg.weights = cfg.weights;
  const GradientResult g = estimate_gradient(res.trace, gcfg);
  CHECK(g.dL == std::array<double, 4>{0, 0, 0, 0});
}

TEST_CASE("queue-2 scenario gradient matches the analytic oracle") {
  const SimConfig cfg = queue2_scenario();
  const SamplePathResult res = simulate(cfg);
  GradientConfig gcfg;
  gcfg.weights = cfg.weights;
  const GradientResult g = estimate_gradient(res.trace, gcfg);
  // dL/dtheta1 = a * theta1 * H / (H - a) / T = 5/35; theta2 does not move
  // any event inside [0, T).
  CHECK(at1(g.dL, 1) == doctest::Approx(5.0 / 35.0).epsilon(1e-9));
  CHECK(at1(g.dL, 2) == doctest::Approx(0.0));
  CHECK(at1(g.dL, 3) == doctest::Approx(0.0));
  CHECK(at1(g.dL, 4) == doctest::Approx(0.0));

  // The R2G_2 record must have seeded xprime[2][1] = +1 (h2 * zeta1).
  struct Probe : IpaObserver {
    double seen = 0.0;
    void after_event(const EventRecord& rec, const IpaState& st) override {
      if (rec.kind == EventKind::RedToGreen && rec.queue == 2 && rec.time == 15.0) {
        seen = st.xp(2, 1);
      }
    }
  } probe;
  estimate_gradient(res.trace, gcfg, &probe);
  CHECK(probe.seen == doctest::Approx(1.0));
}

TEST_CASE("finite differences validate the queue-2 gradient") {
  const SimConfig cfg = queue2_scenario();
  const FdGradient fd = finite_difference_gradient(cfg, cfg.theta, 0.01, FdMode::CommonRandomness);
  CHECK(at1(fd.component, 1).value == doctest::Approx(5.0 / 35.0).epsilon(1e-4));
}

TEST_CASE("estimator state invariants hold along random fluid paths") {
  struct Inv : IpaObserver {
    std::map<std::pair<int, int>, int> counts;  // (kind, queue) -> seen
    void after_event(const EventRecord& rec, const IpaState& st) override {
      if (rec.kind == EventKind::NepEnd) {
        for (int i = 1; i <= 4; ++i) CHECK(st.xp(rec.queue, i) == 0.0);
      }
      if (rec.kind == EventKind::GreenToRed) {
        ++counts[{0, rec.queue}];
        CHECK(at1(st.zeta, rec.queue) == counts[{0, rec.queue}]);
      }
      if (rec.kind == EventKind::RedToGreen) {
        ++counts[{1, rec.queue}];
        CHECK(at1(st.rho, rec.queue) == counts[{1, rec.queue}]);
      }
      for (int n : {1, 2}) {
        for (int i : {3, 4}) CHECK(st.xp(n, i) == 0.0);
      }
    }
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SimConfig cfg = full_fluid_scenario(seed);
    cfg.horizon = 500.0;
    const SamplePathResult res = simulate(cfg);
    GradientConfig gcfg;
    gcfg.weights = cfg.weights;
    Inv inv;
    estimate_gradient(res.trace, gcfg, &inv);
  }
}

TEST_CASE("replaying a trace twice gives bit-identical gradients") {
  SimConfig cfg = full_fluid_scenario(12);
  cfg.horizon = 800.0;
  const SamplePathResult res = simulate(cfg);
  GradientConfig gcfg;
  gcfg.weights = cfg.weights;
  const GradientResult a = estimate_gradient(res.trace, gcfg);
  const GradientResult b = estimate_gradient(res.trace, gcfg);
  for (int i = 1; i <= 4; ++i) CHECK(at1(a.dL, i) == at1(b.dL, i));
}

TEST_CASE("xprime changes only at event records") {
  // Piecewise constancy: accumulating over [t, t') between records uses one
  // constant row; verified by replaying with a half-split accumulation.
  SimConfig cfg = full_fluid_scenario(21);
  cfg.horizon = 300.0;
  const SamplePathResult res = simulate(cfg);
  GradientConfig gcfg;
  gcfg.weights = cfg.weights;

  struct Snap : IpaObserver {
    std::vector<std::array<std::array<double, 4>, 4>> states;
    void after_instant(double, const IpaState& st) override { states.push_back(st.xprime); }
  } snap_a, snap_b;
  estimate_gradient(res.trace, gcfg, &snap_a);
  estimate_gradient(res.trace, gcfg, &snap_b);
  REQUIRE(snap_a.states.size() == snap_b.states.size());
  for (std::size_t i = 0; i < snap_a.states.size(); ++i) CHECK(snap_a.states[i] == snap_b.states[i]);
}

TEST_CASE("degenerate emptiness in a synthetic trace is flagged, not fatal") {
  Trace trace;
  trace.backend = Backend::Fluid;
  trace.horizon = 30.0;
  trace.theta.sec = {15, 15, 15, 15};
  trace.initial_green = {1, 3};
  trace.service_rate = {1, 1, 1, 1};
  trace.alpha0 = {1.0, 0, 0, 0};
  EventRecord s1 = record(0.0, EventKind::NepStart, 1);
  EventRecord e1 = record(10.0, EventKind::NepEnd, 1);
  e1.alpha_minus = 1.0;  // drift alpha - h = 0: degenerate
  e1.alpha_plus = 1.0;
  e1.h = 1.0;
  EventRecord s3 = record(0.0, EventKind::NepStart, 3);
  trace.events = {s1, s3, e1};
  GradientConfig gcfg;
  const GradientResult g = estimate_gradient(trace, gcfg);
  CHECK(g.n_degenerate == 1);
}

TEST_CASE("gradient rejects traces shorter than the requested horizon") {
  SimConfig cfg = queue2_scenario();
  const SamplePathResult res = simulate(cfg);
  GradientConfig gcfg;
  gcfg.weights = cfg.weights;
  gcfg.horizon = 100.0;
  CHECK_THROWS_AS(estimate_gradient(res.trace, gcfg), std::invalid_argument);
}

TEST_CASE("out-of-order traces are rejected") {
  Trace trace;
  trace.backend = Backend::Fluid;
  trace.horizon = 10.0;
  trace.events = {record(5.0, EventKind::NepStart, 1), record(1.0, EventKind::NepEnd, 1)};
  GradientConfig gcfg;
  CHECK_THROWS_AS(estimate_gradient(trace, gcfg), std::invalid_argument);
}
