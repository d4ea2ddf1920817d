#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "core/config.hpp"
#include "core/greedy.hpp"
#include "core/rate_region.hpp"
#include "core/util.hpp"

using namespace vumac;

namespace {

SystemParams params_m(int users) {
  SystemParams p = problem_config_from_ini(IniFile::parse_string("")).params;
  p.num_users = users;
  p.horizon = 1;
  p.validate();
  return p;
}

SystemState state_of(std::vector<double> b, std::vector<double> r, std::vector<double> h,
                     std::vector<double> w) {
  SystemState s;
  s.battery = std::move(b);
  s.bits = std::move(r);
  s.gain = std::move(h);
  s.weight = std::move(w);
  return s;
}

double slot_cost(const SystemState& s, const Action& a, const SystemParams& p) {
  double c = 0.0;
  for (int i = 0; i < p.num_users; ++i) c += s.weight[i] * p.cost_fn.f(s.bits[i] - a.rate[i]);
  return c;
}

}  // namespace

TEST_CASE("single user at full charge: rate cap binds, cost 0.4") {
  SystemParams p = params_m(1);
  SystemState s = state_of({4.0}, {4.0}, {1.0}, {2.0});
  Action a = greedy_act(s, p);
  CHECK(a.power[0] == 4.0);
  CHECK(a.rate[0] == doctest::Approx(std::log(5.0)).epsilon(1e-6));
  CHECK(slot_cost(s, a, p) == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("single user with few bits left: bit ceiling binds") {
  SystemParams p = params_m(1);
  SystemState s = state_of({4.0}, {0.5}, {1.0}, {2.0});
  Action a = greedy_act(s, p);
  CHECK(a.power[0] == 4.0);
  CHECK(a.rate[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(slot_cost(s, a, p) == doctest::Approx(2.0 * std::exp(-4.0)).epsilon(1e-5));
}

TEST_CASE("single user closed form: rho = min(r, g(hB)) across a grid") {
  SystemParams p = params_m(1);
  for (double b : {0.5, 1.0, 2.5, 4.0})
    for (double r : {0.25, 1.0, 4.0})
      for (double h : {0.1, 1.0}) {
        SystemState s = state_of({b}, {r}, {h}, {2.0});
        Action a = greedy_act(s, p);
        double want = std::min(r, p.rate_fn.f(h * b));
        CAPTURE(b);
        CAPTURE(r);
        CAPTURE(h);
        CHECK(a.rate[0] == doctest::Approx(want).scale(1.0).epsilon(1e-6));
      }
}

TEST_CASE("whole battery is spent and idle users stay silent") {
  SystemParams p = params_m(3);
  p.num_users = 3;
  SystemState s = state_of({3.0, 2.0, 1.5}, {4.0, 0.0, 2.0}, {1.0, 1.0, 0.1},
                           {2.0, 2.0, 0.0});
  Action a = greedy_act(s, p);
  for (int i = 0; i < 3; ++i) CHECK(a.power[i] == s.battery[i]);
  CHECK(a.rate[1] == 0.0);  // no bits pending
  CHECK(a.rate[2] == 0.0);  // zero weight
  CHECK(a.rate[0] > 0.0);
}

TEST_CASE("drained battery transmits nothing") {
  SystemParams p = params_m(2);
  SystemState s = state_of({0.0, 4.0}, {4.0, 4.0}, {1.0, 1.0}, {2.0, 2.0});
  Action a = greedy_act(s, p);
  CHECK(a.power[0] == 0.0);
  CHECK(a.rate[0] == 0.0);
  CHECK(a.rate[1] == doctest::Approx(std::log(5.0)).epsilon(1e-6));
}

TEST_CASE("two users match a fine-grid search over the region") {
  SystemParams p = params_m(2);
  SystemState s = state_of({4.0, 2.0}, {4.0, 3.0}, {1.0, 0.1}, {2.0, 1.0});
  Action a = greedy_act(s, p);
  REQUIRE(is_rate_feasible(p.rate_fn, s.gain, a.power, a.rate, 1e-8));
  double got = slot_cost(s, a, p);

  double cap1 = p.rate_fn.f(s.gain[0] * s.battery[0]);
  double cap2 = p.rate_fn.f(s.gain[1] * s.battery[1]);
  double cap12 = p.rate_fn.f(s.gain[0] * s.battery[0] + s.gain[1] * s.battery[1]);
  double best = std::numeric_limits<double>::infinity();
  const int n = 1500;
  for (int i = 0; i <= n; ++i) {
    double r1 = std::min(cap1, s.bits[0]) * i / n;
    for (int j = 0; j <= n; ++j) {
      double r2 = std::min(cap2, s.bits[1]) * j / n;
      if (r1 + r2 > cap12) break;
      double c = s.weight[0] * p.cost_fn.f(s.bits[0] - r1) +
                 s.weight[1] * p.cost_fn.f(s.bits[1] - r2);
      if (c < best) best = c;
    }
  }
  CHECK(got <= best + 1e-4);
}

TEST_CASE("random states: feasible and never worse than staying silent") {
  SystemParams p = params_m(2);
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> ub(0.0, 4.0);
  std::uniform_int_distribution<int> uh(0, 1);
  std::uniform_int_distribution<int> uw(0, 2);
  for (int trial = 0; trial < 300; ++trial) {
    SystemState s = state_of({ub(eng), ub(eng)}, {ub(eng), ub(eng)},
                             {uh(eng) ? 1.0 : 0.1, uh(eng) ? 1.0 : 0.1},
                             {double(uw(eng)), double(uw(eng))});
    Action a = greedy_act(s, p);
    for (int i = 0; i < 2; ++i) {
      CHECK(a.power[i] == s.battery[i]);
      CHECK(a.rate[i] >= 0.0);
      CHECK(a.rate[i] <= s.bits[i] + 1e-9);
    }
    CHECK(is_rate_feasible(p.rate_fn, s.gain, a.power, a.rate, 1e-8));
    double silent = 0.0;
    for (int i = 0; i < 2; ++i) silent += s.weight[i] * p.cost_fn.f(s.bits[i]);
    CHECK(slot_cost(s, a, p) <= silent + 1e-9);
  }
}
