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

#include "gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "divergence.hpp"
#include "errors.hpp"
#include "loss.hpp"

namespace renyiplay {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Instance {
  TabularPolicy policy;
  TabularPolicy opponent;
  TargetTables target;
  std::vector<Sample> real;
  std::vector<Sample> syn;
  std::vector<PairedSample> pairs;
};

ProblemSpace random_space(const GradcheckSpec& spec, Rng& rng) {
  ProblemSpace s = ProblemSpace::uniform(spec.vocab_size, spec.response_len, spec.num_prompts);
  double total = 0.0;
  for (double& q : s.prompt_probs) {
    q = 0.2 + uniform01(rng);
    total += q;
  }
  for (double& q : s.prompt_probs) q /= total;
  // Renormalise the last entry so the sum is 1 to the last bit.
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < s.prompt_probs.size(); ++i) head += s.prompt_probs[i];
  s.prompt_probs.back() = 1.0 - head;
  return s;
}

Instance make_instance(const GradcheckSpec& spec, Rng& rng) {
  const ProblemSpace space = random_space(spec, rng);
  TabularPolicy policy(space, PolicyInit::gaussian(1.0, rng()));
  TabularPolicy opponent(space, PolicyInit::gaussian(1.0, rng()));
  const TabularPolicy annotator(space, PolicyInit::gaussian(1.0, rng()));
  Instance inst{policy, opponent, target_from_policy(annotator), {}, {}, {}};
  for (std::size_t i = 0; i < spec.batch_size; ++i) {
    const std::size_t x = sample_index(space.prompt_probs, rng);
    Sample r{x, annotator.sample_one(x, rng)};
    Sample s{x, opponent.sample_one(x, rng)};
    inst.pairs.push_back({x, r.response, s.response});
    inst.real.push_back(std::move(r));
    inst.syn.push_back(std::move(s));
  }
  return inst;
}

struct Evaluator {
  std::function<double(const TabularPolicy&)> loss;
  std::function<std::vector<double>(const TabularPolicy&)> gradient;
};

Evaluator make_evaluator(const std::string& method, double alpha, bool exact, const Instance& inst) {
  if (method == "iris") {
    if (exact) {
      return {[&, alpha](const TabularPolicy& p) { return iris_exact(p, inst.opponent, inst.target, alpha, false).loss.total; },
              [&, alpha](const TabularPolicy& p) { return iris_exact(p, inst.opponent, inst.target, alpha).gradient.values; }};
    }
    return {[&, alpha](const TabularPolicy& p) { return iris_mc(p, inst.opponent, inst.real, inst.syn, alpha, false).loss.total; },
            [&, alpha](const TabularPolicy& p) { return iris_mc(p, inst.opponent, inst.real, inst.syn, alpha).gradient.values; }};
  }
  if (method == "spin") {
    if (exact) {
      return {[&](const TabularPolicy& p) { return spin_exact(p, inst.opponent, inst.target, false).loss; },
              [&](const TabularPolicy& p) { return spin_exact(p, inst.opponent, inst.target).gradient.values; }};
    }
    return {[&](const TabularPolicy& p) { return spin_mc(p, inst.opponent, inst.pairs, false).loss; },
            [&](const TabularPolicy& p) { return spin_mc(p, inst.opponent, inst.pairs).gradient.values; }};
  }
  if (exact) {
    return {[&](const TabularPolicy& p) { return sft_exact(p, inst.target, false).loss; },
            [&](const TabularPolicy& p) { return sft_exact(p, inst.target).gradient.values; }};
  }
  return {[&](const TabularPolicy& p) { return sft_mc(p, inst.real, false).loss; },
          [&](const TabularPolicy& p) { return sft_mc(p, inst.real).gradient.values; }};
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string GradcheckCell::label() const {
  if (method == "iris") return "iris(alpha=" + format_g(alpha) + ")/" + mode;
  return method + "/" + mode;
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  return diff / std::max(scale, 1e-8);
}

GradcheckReport run_gradcheck(const GradcheckSpec& spec, bool corrupt_gradient) {
  if (spec.instances < 1) throw ConfigError("gradcheck.instances: empty grid (need >= 1)");
  if (spec.methods.empty()) throw ConfigError("gradcheck.methods: empty grid");
  if (spec.modes.empty()) throw ConfigError("gradcheck.modes: empty grid");
  if (!(spec.step > 0.0)) throw ConfigError("gradcheck.h: must be > 0");
  if (!(spec.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance: must be > 0");
  if (spec.batch_size < 1) throw ConfigError("gradcheck.batch_size: must be >= 1");
  ProblemSpace::uniform(spec.vocab_size, spec.response_len, spec.num_prompts).validate();

  std::vector<GradcheckCell> cells;
  for (const std::string& method : spec.methods) {
    if (method != "iris" && method != "spin" && method != "sft") {
      throw ConfigError("gradcheck.methods: unknown method '" + method + "'");
    }
    for (const std::string& mode : spec.modes) {
      if (mode != "exact" && mode != "mc") throw ConfigError("gradcheck.modes: unknown mode '" + mode + "'");
      if (method == "iris") {
        if (spec.alphas.empty()) throw ConfigError("gradcheck.alphas: empty grid");
        for (double a : spec.alphas) {
          RenyiOrder check(a);
          cells.push_back({method, a, mode, 0, 0.0, false});
        }
      } else {
        cells.push_back({method, kNaN, mode, 0, 0.0, false});
      }
    }
  }

  Rng rng = make_stream(spec.seed, 0);
  for (GradcheckCell& cell : cells) {
    for (int n = 0; n < spec.instances; ++n) {
      const Instance inst = make_instance(spec, rng);
      const Evaluator ev = make_evaluator(cell.method, cell.alpha, cell.mode == "exact", inst);
      std::vector<double> analytic = ev.gradient(inst.policy);
      if (corrupt_gradient) analytic[0] += 1e-2 * (1.0 + std::abs(analytic[0]));
      const ProblemSpace& space = inst.policy.space();
      const ScalarObjective objective = [&](std::span<const double> params) {
        return ev.loss(TabularPolicy(space, std::vector<double>(params.begin(), params.end())));
      };
      const std::vector<double> numeric = finite_diff_gradient(objective, inst.policy.logits(), spec.step);
      cell.max_rel_error = std::max(cell.max_rel_error, relative_error(analytic, numeric));
      ++cell.instances;
    }
    cell.passed = cell.max_rel_error <= spec.tolerance;
  }

  GradcheckReport report{cells, spec.tolerance, true, 0};
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    report.passed = report.passed && report.cells[i].passed;
    if (report.cells[i].max_rel_error > report.cells[report.worst].max_rel_error) report.worst = i;
  }
  return report;
}

Json gradcheck_to_report_json(const GradcheckReport& report) {
  Json cells = Json::array();
  for (const GradcheckCell& c : report.cells) {
    cells.push_back({{"cell", c.label()},
                     {"method", c.method},
                     {"alpha", std::isnan(c.alpha) ? Json() : Json(c.alpha)},
                     {"mode", c.mode},
                     {"instances", c.instances},
                     {"max_rel_error", c.max_rel_error},
                     {"passed", c.passed}});
  }
  return {{"tolerance", report.tolerance},
          {"passed", report.passed},
          {"worst_cell", report.cells.empty() ? Json() : Json(report.cells[report.worst].label())},
          {"cells", cells}};
}

}  // namespace renyiplay
