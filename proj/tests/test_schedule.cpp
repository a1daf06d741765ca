// Copyright 2026 The renyiplay Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "schedule.hpp"

using namespace renyiplay;

namespace {

TabularPolicy binary(double p0) {
  return TabularPolicy(ProblemSpace::uniform(2, 1, 1), std::vector<double>{std::log(p0), std::log(1.0 - p0)});
}

double alpha_at(const ScheduleSpec& spec, int t, std::optional<double> gap = std::nullopt) {
  ScheduleState st;
  st.iteration = t;
  st.last_gap = gap;
  return next_alpha(spec, st);
}

}  // namespace

TEST_CASE("fixed and geometric") {
  CHECK(alpha_at(ScheduleSpec::fixed(1.7), 0) == 1.7);
  CHECK(alpha_at(ScheduleSpec::fixed(1.7), 9) == 1.7);
  const auto g = ScheduleSpec::geometric(2.5, 0.8, 5);
  CHECK(alpha_at(g, 0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(alpha_at(g, 5) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(alpha_at(g, 1) - 1.990517) < 5e-5);  // formula gives 1.9905359
  CHECK(alpha_at(g, 1) == doctest::Approx(2.5 * std::pow(0.32, 0.2)).epsilon(1e-15));
  for (int t = 0; t < 5; ++t) CHECK(alpha_at(g, t + 1) < alpha_at(g, t));
}

TEST_CASE("gap feedback") {
  const auto s = ScheduleSpec::gap_feedback(0.5, 0.5, 3.0);
  CHECK(alpha_at(s, 0) == 3.0);
  CHECK(alpha_at(s, 1, 6.0) == 3.0);
  CHECK(alpha_at(s, 1, 1.2) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(alpha_at(s, 1, 0.0) == 1.0);
  CHECK(RenyiOrder(alpha_at(s, 1, 0.0)).is_kl_limit());
  CHECK(alpha_at(s, 1, -5.0) == 0.5);
  CHECK_THROWS_AS((void)alpha_at(s, 1), StateError);

  double prev = 0.0;
  for (double gap = -3.0; gap <= 8.0; gap += 0.01) {
    const double a = alpha_at(s, 2, gap);
    CHECK(a >= 0.5);
    CHECK(a <= 3.0);
    CHECK(a >= prev);
    prev = a;
  }

  ScheduleState st;
  CHECK(next_alpha(s, st) == 3.0);
  CHECK(st.iteration == 1);
  st.last_gap = 0.4;
  CHECK(next_alpha(s, st) == doctest::Approx(1.2));
  REQUIRE(st.alpha_history.size() == 2);
  CHECK(st.alpha_history[0] == 3.0);
}

TEST_CASE("spec validation and labels") {
  CHECK_THROWS_AS(ScheduleSpec::fixed(0.0).validate(), ConfigError);
  CHECK_THROWS_AS(ScheduleSpec::geometric(0.5, 1.0, 4).validate(), ConfigError);
  CHECK_THROWS_AS(ScheduleSpec::geometric(2.0, 1.0, 0).validate(), ConfigError);
  CHECK_THROWS_AS(ScheduleSpec::gap_feedback(0.0, 0.5, 3.0).validate(), ConfigError);
  CHECK_THROWS_AS(ScheduleSpec::gap_feedback(0.5, 3.0, 0.5).validate(), ConfigError);
  CHECK(ScheduleSpec::fixed(2.0).label() == "fixed_2");
  CHECK(ScheduleSpec::gap_feedback(0.5, 0.5, 3.0).label() == "gap_feedback");
}

TEST_CASE("gap estimation") {
  const auto data = binary(0.7);
  const auto opp = binary(0.5);
  const TargetTables target = target_from_policy(data);
  CHECK(std::abs(estimate_gap_exact(data, opp, target) - 0.169459) < 1e-6);
  // KL(data || opp) + KL(opp || data), by hand.
  const double by_hand = 0.7 * std::log(1.4) + 0.3 * std::log(0.6) + 0.5 * std::log(0.5 / 0.7) + 0.5 * std::log(0.5 / 0.3);
  CHECK(estimate_gap_exact(data, opp, target) == doctest::Approx(by_hand).epsilon(1e-13));
  CHECK(estimate_gap_exact(opp, opp, target) == 0.0);

  const std::vector<Sample> batch{{0, {0}}, {0, {1}}};
  CHECK(estimate_gap_mc(opp, opp, batch, batch) == 0.0);
  CHECK_THROWS_AS((void)estimate_gap_mc(data, opp, {}, batch), InputError);

  // Monte-Carlo estimate within 3 sigma of the exact value.
  const ProblemSpace s = ProblemSpace::uniform(3, 2, 2);
  const TabularPolicy model(s, PolicyInit::gaussian(1.0, 1));
  const TabularPolicy op(s, PolicyInit::gaussian(1.0, 2));
  const TabularPolicy annot(s, PolicyInit::gaussian(1.0, 3));
  const double exact = estimate_gap_exact(model, op, target_from_policy(annot));
  Rng rng = make_stream(17, 0);
  const std::size_t n = 10000;
  std::vector<Sample> real;
  std::vector<Sample> syn;
  std::vector<double> rr;
  std::vector<double> rs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = sample_index(s.prompt_probs, rng);
    real.push_back({x, annot.sample_one(x, rng)});
    const std::size_t x2 = sample_index(s.prompt_probs, rng);
    syn.push_back({x2, op.sample_one(x2, rng)});
    rr.push_back(model.log_prob(x, real.back().response) - op.log_prob(x, real.back().response));
    rs.push_back(model.log_prob(x2, syn.back().response) - op.log_prob(x2, syn.back().response));
  }
  auto var = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return s2 / static_cast<double>(v.size() - 1);
  };
  const double sigma = std::sqrt((var(rr) + var(rs)) / static_cast<double>(n));
  const double mc = estimate_gap_mc(model, op, real, syn);
  CHECK(std::abs(mc - exact) <= 3.0 * sigma);
}
