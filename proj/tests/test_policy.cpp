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
#include <filesystem>
#include <map>

#include "checkpoint.hpp"
#include "divergence.hpp"
#include "errors.hpp"
#include "policy.hpp"

using namespace renyiplay;

namespace {

// Independent softmax chain over the flat layout, used as oracle.
double brute_log_prob(const TabularPolicy& p, std::size_t x, const Response& y) {
  const ProblemSpace& s = p.space();
  const int V = s.vocab_size;
  std::size_t contexts = 0;
  for (int pos = 0, w = 1; pos < s.response_len; ++pos, w *= V) contexts += static_cast<std::size_t>(w);
  double total = 0.0;
  std::size_t prefix = 0;
  std::size_t level_start = 0;
  for (int pos = 0; pos < s.response_len; ++pos) {
    const std::size_t row = (x * contexts + level_start + prefix) * static_cast<std::size_t>(V);
    double z = 0.0;
    for (int v = 0; v < V; ++v) z += std::exp(p.logits()[row + static_cast<std::size_t>(v)]);
    total += p.logits()[row + static_cast<std::size_t>(y[static_cast<std::size_t>(pos)])] - std::log(z);
    level_start += static_cast<std::size_t>(std::pow(V, pos));
    prefix = prefix * static_cast<std::size_t>(V) + static_cast<std::size_t>(y[static_cast<std::size_t>(pos)]);
  }
  return total;
}

TabularPolicy random_policy(int V, int L, std::size_t prompts, std::uint64_t seed, double sd = 1.0) {
  return TabularPolicy(ProblemSpace::uniform(V, L, prompts), PolicyInit::gaussian(sd, seed));
}

}  // namespace

TEST_CASE("zeros init gives uniform conditionals") {
  const TabularPolicy p(ProblemSpace::uniform(2, 1, 3), PolicyInit::zeros());
  for (std::size_t x = 0; x < 3; ++x) {
    const auto d = p.enumerate_distribution(x);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
  const TabularPolicy q(ProblemSpace::uniform(3, 2, 1), PolicyInit::zeros());
  const auto d = q.enumerate_distribution(0);
  REQUIRE(d.size() == 9);
  for (double v : d) CHECK(std::abs(v - 1.0 / 9.0) < 1e-15);
}

TEST_CASE("gaussian init is reproducible from its seed") {
  const auto a = random_policy(2, 1, 1, 7);
  const auto b = random_policy(2, 1, 1, 7);
  CHECK(a == b);
  CHECK_FALSE(a == random_policy(2, 1, 1, 8));
}

TEST_CASE("space validation") {
  ProblemSpace s = ProblemSpace::uniform(4, 9, 1);  // 4^9 = 262144 > cap
  try {
    s.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("V^L = 4^9") != std::string::npos);
  }
  CHECK_THROWS_AS(TabularPolicy(s, PolicyInit::zeros()), ConfigError);
  ProblemSpace bad = ProblemSpace::uniform(2, 1, 2);
  bad.prompt_probs = {0.5, 0.5 + 1e-9};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ProblemSpace::uniform(1, 1, 1);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ProblemSpace::uniform(2, 0, 1);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ProblemSpace::uniform(2, 1, 2);
  bad.prompts = {"a", "a"};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("log_prob examples") {
  const TabularPolicy u(ProblemSpace::uniform(2, 2, 1), PolicyInit::zeros());
  CHECK(u.log_prob(0, Response{1, 0}) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  CHECK(std::abs(u.log_prob(0, Response{0, 1}) - (-1.386294)) < 1e-6);

  const TabularPolicy one(ProblemSpace::uniform(2, 1, 1), std::vector<double>{std::log(3.0), 0.0});
  CHECK(std::abs(one.log_prob(0, Response{0}) - (-0.287682)) < 1e-6);
  CHECK(one.log_prob(0, Response{0}) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
}

TEST_CASE("log_prob matches enumeration and the brute-force chain") {
  Rng rng = make_stream(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_policy(3, 3, 2, 100 + static_cast<std::uint64_t>(trial), 2.0);
    const std::size_t x = static_cast<std::size_t>(trial % 2);
    const std::size_t idx = static_cast<std::size_t>(uniform01(rng) * 27.0);
    const Response y = decode_response(p.space(), idx);
    const double lp = p.log_prob(x, y);
    CHECK(std::abs(lp - std::log(p.enumerate_distribution(x)[idx])) < 1e-12);
    CHECK(std::abs(lp - brute_log_prob(p, x, y)) < 1e-12);
    CHECK(encode_response(p.space(), y) == idx);
  }
}

TEST_CASE("log_prob input errors") {
  const auto p = random_policy(3, 2, 2, 1);
  CHECK_THROWS_AS((void)p.log_prob(2, Response{0, 0}), InputError);
  CHECK_THROWS_AS((void)p.log_prob(0, Response{0}), InputError);
  CHECK_THROWS_AS((void)p.log_prob(0, Response{0, 3}), InputError);
  CHECK_THROWS_AS((void)p.space().prompt_index("nope"), InputError);
  CHECK(p.space().prompt_index("p1") == 1);
}

TEST_CASE("enumerate_distribution") {
  const TabularPolicy u(ProblemSpace::uniform(2, 2, 1), PolicyInit::zeros());
  for (double v : u.enumerate_distribution(0)) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

  // Logits that ignore the prefix: the joint is the outer product of marginals.
  const ProblemSpace s = ProblemSpace::uniform(3, 2, 1);
  const std::vector<double> pos0{0.3, -1.0, 0.7};
  const std::vector<double> pos1{1.1, 0.2, -0.4};
  std::vector<double> logits = pos0;
  for (int k = 0; k < 3; ++k) logits.insert(logits.end(), pos1.begin(), pos1.end());
  const TabularPolicy f(s, logits);
  auto soft = [](const std::vector<double>& l) {
    std::vector<double> out(l.size());
    double z = 0.0;
    for (double v : l) z += std::exp(v);
    for (std::size_t i = 0; i < l.size(); ++i) out[i] = std::exp(l[i]) / z;
    return out;
  };
  const auto m0 = soft(pos0);
  const auto m1 = soft(pos1);
  const auto d = f.enumerate_distribution(0);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(d[a * 3 + b] - m0[a] * m1[b]) < 1e-15);
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = random_policy(4, 3, 2, seed, 3.0);
    for (std::size_t x = 0; x < 2; ++x) {
      double total = 0.0;
      for (std::size_t i = 0; i < p.space().response_count(); ++i) {
        total += std::exp(p.log_prob(x, decode_response(p.space(), i)));
      }
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("sampling") {
  const TabularPolicy u(ProblemSpace::uniform(2, 1, 1), PolicyInit::zeros());
  Rng rng = make_stream(5, 2);
  const auto samples = u.sample(0, rng, 100000);
  std::size_t zeros = 0;
  for (const Response& r : samples) zeros += r[0] == 0 ? 1 : 0;
  const double freq = static_cast<double>(zeros) / 100000.0;
  CHECK(std::abs(freq - 0.5) <= 0.01);

  std::vector<double> logits(u.parameter_count(), 0.0);
  logits[1] = 50.0;
  const TabularPolicy det(u.space(), logits);
  for (const Response& r : det.sample(0, rng, 1000)) CHECK(r[0] == 1);

  const auto p = random_policy(3, 2, 2, 9);
  Rng a = make_stream(42, 2);
  Rng b = make_stream(42, 2);
  CHECK(p.sample(1, a, 50) == p.sample(1, b, 50));
  CHECK_THROWS_AS((void)p.sample(0, a, 0), InputError);
}

TEST_CASE("sampling passes chi-square goodness of fit") {
  // Critical values of the chi-square distribution at 1 - 1e-4.
  const std::map<std::size_t, double> critical{{3, 21.107513466160444}, {7, 29.87750390922517},
                                               {15, 44.26322494417528}};
  struct Case {
    int V, L;
  };
  for (const Case c : {Case{4, 1}, Case{2, 3}, Case{4, 2}}) {
    const auto p = random_policy(c.V, c.L, 1, 77 + static_cast<std::uint64_t>(c.V * 10 + c.L));
    const auto expected = p.enumerate_distribution(0);
    Rng rng = make_stream(123, static_cast<std::uint64_t>(c.V * 10 + c.L));
    const std::size_t n = 100000;
    std::vector<double> counts(expected.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[encode_response(p.space(), p.sample_one(0, rng))] += 1.0;
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double e = expected[i] * static_cast<double>(n);
      stat += (counts[i] - e) * (counts[i] - e) / e;
    }
    CAPTURE(c.V);
    CAPTURE(c.L);
    CHECK(stat < critical.at(counts.size() - 1));
  }
}

TEST_CASE("grad_log_prob") {
  const TabularPolicy u(ProblemSpace::uniform(2, 1, 1), PolicyInit::zeros());
  const auto g = u.grad_log_prob(0, Response{0});
  REQUIRE(g.context_offsets.size() == 1);
  CHECK(g.partials[0] == doctest::Approx(0.5));
  CHECK(g.partials[1] == doctest::Approx(-0.5));

  Rng rng = make_stream(3, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_policy(3, 2, 2, 500 + static_cast<std::uint64_t>(trial), 1.5);
    const std::size_t x = static_cast<std::size_t>(trial % 2);
    const Response y = p.sample_one(x, rng);
    const auto lg = p.grad_log_prob(x, y);
    CHECK(lg.context_offsets.size() == 2);
    for (std::size_t c = 0; c < lg.context_offsets.size(); ++c) {
      double s = 0.0;
      for (int v = 0; v < 3; ++v) s += lg.partials[c * 3 + static_cast<std::size_t>(v)];
      CHECK(std::abs(s) < 1e-15);
    }
    std::vector<double> dense(p.parameter_count(), 0.0);
    lg.accumulate_into(dense, 1.0);
    const ScalarObjective f = [&](std::span<const double> th) {
      return TabularPolicy(p.space(), std::vector<double>(th.begin(), th.end())).log_prob(x, y);
    };
    const auto fd = finite_diff_gradient(f, p.logits(), 1e-5);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      diff = std::max(diff, std::abs(fd[i] - dense[i]));
      scale = std::max(scale, std::abs(fd[i]));
      // Exact sparsity: coordinates outside visited contexts are zero.
      bool visited = false;
      for (std::size_t off : lg.context_offsets) visited = visited || (i >= off && i < off + 3);
      if (!visited) CHECK(dense[i] == 0.0);
    }
    CHECK(diff <= 1e-6);
    worst = std::max(worst, diff / scale);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("apply_update") {
  TabularPolicy p(ProblemSpace::uniform(2, 1, 1), PolicyInit::zeros());
  OptimizerState st;
  std::vector<double> g{2.0, 0.0};
  apply_update(p, g, st, StepRule::plain(0.1));
  CHECK(p.logits()[0] == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(p.logits()[1] == 0.0);

  // Adaptive first step with g = 1: -lr g / sqrt((1 - rho) g^2 + eps).
  TabularPolicy a(ProblemSpace::uniform(2, 1, 1), PolicyInit::zeros());
  OptimizerState sa;
  apply_update(a, std::vector<double>{1.0, 0.0}, sa, StepRule::adaptive(0.1, 0.9, 1e-8));
  const double expected = -0.1 / std::sqrt(0.1 + 1e-8);
  CHECK(std::abs(a.logits()[0] - expected) < 1e-15);
  CHECK(std::abs(a.logits()[0] - (-0.316226)) < 1e-5);
  CHECK(a.logits()[1] == 0.0);
  const double ms = sa.mean_square[0];

  // Zero gradient: policy unchanged, accumulators only decay.
  const auto before = a;
  apply_update(a, std::vector<double>{0.0, 0.0}, sa, StepRule::adaptive(0.1, 0.9, 1e-8));
  CHECK(a == before);
  CHECK(sa.mean_square[0] == doctest::Approx(0.9 * ms));

  // Non-finite gradient names the coordinate and leaves the policy alone.
  try {
    apply_update(a, std::vector<double>{0.5, std::nan("")}, sa, StepRule::plain(0.1));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
  CHECK(a == before);
  CHECK_THROWS_AS(apply_update(a, std::vector<double>{1.0}, sa, StepRule::plain(0.1)), InputError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto p = random_policy(3, 3, 2, 2026, 5.0);
  const Json doc = policy_to_json(p, "abc");
  CHECK(doc["format_version"] == 1);
  CHECK(doc["logits"].size() == 2);
  CHECK(doc["logits"][0].size() == 3);
  CHECK(doc["logits"][0][2].size() == 9);
  const TabularPolicy back = policy_from_json(Json::parse(dump_json(doc)));
  CHECK(back == p);
  const auto path = std::filesystem::temp_directory_path() / "renyiplay_ckpt_test.json";
  save_policy(path, p, "abc");
  CHECK(load_policy(path) == p);
  std::filesystem::remove(path);

  Json broken = doc;
  broken["logits"][0][1].erase(0);
  CHECK_THROWS_AS((void)policy_from_json(broken), InputError);
  broken = doc;
  broken["format_version"] = 2;
  CHECK_THROWS_AS((void)policy_from_json(broken), InputError);
}
