#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tlc/model.hpp"
#include "tlc/util.hpp"

using namespace tlc;

namespace {

ClockState clock_state(std::array<double, 4> z, std::array<int, 2> green = {1, 3}) {
  ClockState c;
  c.z = z;
  c.green_queue = green;
  return c;
}

ThetaVector theta_of(double a, double b, double c, double d) {
  ThetaVector t;
  t.sec = {a, b, c, d};
  return t;
}

}  // namespace

TEST_CASE("light predicate follows the clock formula") {
  const ThetaVector th = theta_of(15, 15, 15, 15);
  CHECK(is_green(clock_state({5, 0, 0, 0}), th, 1));
  CHECK(is_green(clock_state({15, 0, 0, 0}), th, 2));  // perpendicular clock just expired
  CHECK_FALSE(is_green(clock_state({15, 3, 0, 0}), th, 1));
  CHECK(is_green(clock_state({15, 3, 0, 0}), th, 2));
}

TEST_CASE("at most one green per intersection over reachable clock states") {
  const ThetaVector th = theta_of(17, 23, 31, 19);
  // Walk the clock dynamics directly for a few cycles and probe interior points.
  for (int inter = 1; inter <= 2; ++inter) {
    const int a = inter == 1 ? 1 : 3;
    const int b = perpendicular(a);
    double za = 0.0, zb = 0.0;
    bool a_running = true;
    for (int step = 0; step < 200; ++step) {
      const double probe = 0.25 + 0.25 * (step % 3);  // interior of the running phase
      ClockState c;
      if (a_running) at1(c.z, a) = za + probe * (th(a) - za);
      else at1(c.z, b) = zb + probe * (th(b) - zb);
      CHECK(is_green(c, th, a) != is_green(c, th, b));
      a_running = !a_running;
      za = 0.0;
      zb = 0.0;
    }
  }
}

TEST_CASE("queue drift branches") {
  const ThetaVector th = theta_of(15, 15, 15, 15);
  QueueState xs;
  FlowRates r;
  r.h = {1, 1, 1, 1};

  SUBCASE("red queue accumulates arrivals") {
    // Queue 2 is red while queue 1 holds the green.
    const ClockState c = clock_state({5, 0, 5, 0});
    r.alpha = {0, 0.25, 0, 0};
    CHECK(queue_drift(2, xs, c, th, r) == doctest::Approx(0.25));
  }
  SUBCASE("green empty queue passes flow through") {
    const ClockState c = clock_state({0, 5, 0, 5});
    r.alpha = {0, 0.25, 0, 0};
    CHECK(queue_drift(2, xs, c, th, r) == doctest::Approx(0.0));
  }
  SUBCASE("green backlogged queue drains at alpha - h") {
    const ClockState c = clock_state({0, 5, 0, 5});
    r.alpha = {0, 0.25, 0, 0};
    at1(xs.x, 2) = 3.0;
    CHECK(queue_drift(2, xs, c, th, r) == doctest::Approx(-0.75));
  }
  SUBCASE("negative content rejected") {
    const ClockState c = clock_state({5, 0, 5, 0});
    at1(xs.x, 2) = -1.0;
    CHECK_THROWS_AS(queue_drift(2, xs, c, th, r), std::invalid_argument);
  }
}

TEST_CASE("queue 3 six-case rule table") {
  const ThetaVector th = theta_of(15, 15, 15, 15);
  FlowRates r;
  r.h = {1, 1, 1, 1};
  r.alpha = {0.4, 0, 0, 0};

  // B3 = 0 means queue 4 holds the green at intersection 2.
  const ClockState b1_b3 = clock_state({5, 0, 5, 0});     // B1=1, B3=1
  const ClockState b1_nb3 = clock_state({5, 0, 0, 5});    // B1=1, B3=0
  const ClockState nb1_b3 = clock_state({0, 5, 5, 0});    // B1=0, B3=1
  const ClockState nb1_nb3 = clock_state({0, 5, 0, 5});   // B1=0, B3=0

  QueueState xs;
  SUBCASE("5.1: red queue 3 fills at h1 while queue 1 discharges") {
    at1(xs.x, 1) = 2.0;
    CHECK(queue_drift(3, xs, b1_nb3, th, r) == doctest::Approx(1.0));
  }
  SUBCASE("5.2: red queue 3 fills at queue 1's pass-through rate") {
    CHECK(queue_drift(3, xs, b1_nb3, th, r) == doctest::Approx(0.4));
  }
  SUBCASE("5.3: no inflow or empty green queue") {
    CHECK(queue_drift(3, xs, nb1_nb3, th, r) == doctest::Approx(0.0));
    at1(xs.x, 1) = 2.0;  // inflow h1 = h3: passes through the empty green queue
    CHECK(queue_drift(3, xs, b1_b3, th, r) == doctest::Approx(0.0));
  }
  SUBCASE("5.4: both backlogged and green: h1 - h3") {
    at1(xs.x, 1) = 2.0;
    at1(xs.x, 3) = 2.0;
    CHECK(queue_drift(3, xs, b1_b3, th, r) == doctest::Approx(0.0));  // h1 = h3 = 1
  }
  SUBCASE("5.5: green queue 3 drains against pass-through inflow") {
    at1(xs.x, 3) = 2.0;
    CHECK(queue_drift(3, xs, b1_b3, th, r) == doctest::Approx(0.4 - 1.0));
  }
  SUBCASE("5.6: green queue 3 with no inflow drains at -h3") {
    at1(xs.x, 3) = 2.0;
    CHECK(queue_drift(3, xs, nb1_b3, th, r) == doctest::Approx(-1.0));
  }
}

TEST_CASE("drift never pushes an empty queue negative") {
  const ThetaVector th = theta_of(20, 25, 18, 22);
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    FlowRates r;
    for (int q = 1; q <= 4; ++q) {
      at1(r.alpha, q) = rng.uniform(0.0, 1.5);
      at1(r.h, q) = rng.uniform(0.2, 1.5);
    }
    QueueState xs;
    for (int q = 1; q <= 4; ++q) at1(xs.x, q) = rng.uniform01() < 0.5 ? 0.0 : rng.uniform(0.0, 5.0);
    ClockState c;
    const int g1 = rng.uniform01() < 0.5 ? 1 : 2;
    const int g2 = rng.uniform01() < 0.5 ? 3 : 4;
    c.green_queue = {g1, g2};
    at1(c.z, g1) = rng.uniform(0.1, th(g1) - 0.1);
    at1(c.z, g2) = rng.uniform(0.1, th(g2) - 0.1);
    for (int q = 1; q <= 4; ++q) {
      const double d = queue_drift(q, xs, c, th, r);
      CHECK(d >= -at1(r.h, q) - 1e-12);
      if (at1(xs.x, q) == 0.0) CHECK(d >= 0.0);
    }
  }
}

TEST_CASE("next light switch picks the soonest intersection") {
  SUBCASE("residual green") {
    ClockState c = clock_state({10, 0, 0, 0});
    const SwitchEvent e = next_light_switch(c, theta_of(15, 15, 40, 40));
    CHECK(e.dt == doctest::Approx(5.0));
    CHECK(e.intersection == 1);
    CHECK(e.expiring == 1);
    CHECK(e.starting == 2);
  }
  SUBCASE("full perpendicular cycle after a reset") {
    ClockState c = clock_state({0, 0, 0, 0}, {2, 3});  // queue 2 just got the green
    const SwitchEvent e = next_light_switch(c, theta_of(15, 20, 40, 40));
    CHECK(e.dt == doctest::Approx(20.0));
    CHECK(e.expiring == 2);
    CHECK(e.starting == 1);
  }
  SUBCASE("two intersections race") {
    ClockState c = clock_state({14, 0, 14.5, 0});
    const SwitchEvent e = next_light_switch(c, theta_of(15, 15, 15, 15));
    CHECK(e.dt == doctest::Approx(0.5));
    CHECK(e.intersection == 2);
    CHECK(e.expiring == 3);
  }
}

TEST_CASE("switch times are affine in theta") {
  // The k-th G2R_1 lands at zeta*theta1 + rho*theta2 when queue 1 starts green.
  const ThetaVector th = theta_of(17.5, 23.25, 40, 40);
  ClockState c;
  c.green_queue = {1, 3};
  double t = 0.0;
  int zeta = 0;
  int rho = 0;
  for (int k = 0; k < 20; ++k) {
    const double dt = time_to_switch(c, th, 1);
    t += dt;
    const int expiring = c.green_at(1);
    if (expiring == 1) {
      ++zeta;
      CHECK(t == doctest::Approx(zeta * th(1) + rho * th(2)).epsilon(1e-12));
    } else {
      ++rho;
      CHECK(t == doctest::Approx(zeta * th(1) + rho * th(2)).epsilon(1e-12));
    }
    c.green_queue[0] = perpendicular(expiring);
    at1(c.z, c.green_queue[0]) = 0.0;
  }
}

TEST_CASE("theta validation enforces bounds and positivity") {
  ThetaBounds b{15, 40};
  CHECK_NOTHROW(validate_theta(theta_of(15, 40, 20, 30), b));
  CHECK_THROWS_AS(validate_theta(theta_of(14.9, 20, 20, 20), b), std::invalid_argument);
  CHECK_THROWS_AS(validate_theta(theta_of(20, 41, 20, 20), b), std::invalid_argument);
  CHECK_THROWS_AS(validate_theta(theta_of(-1, 20, 20, 20), ThetaBounds{0.5, 100}), std::invalid_argument);
}
