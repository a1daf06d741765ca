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

#include "schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace renyiplay {

ScheduleSpec ScheduleSpec::fixed(double alpha) {
  ScheduleSpec s;
  s.kind = Kind::kFixed;
  s.alpha = alpha;
  return s;
}

ScheduleSpec ScheduleSpec::geometric(double alpha_max, double alpha_min, int horizon) {
  ScheduleSpec s;
  s.kind = Kind::kGeometric;
  s.alpha_max = alpha_max;
  s.alpha_min = alpha_min;
  s.horizon = horizon;
  return s;
}

ScheduleSpec ScheduleSpec::gap_feedback(double gain, double alpha_min, double alpha_max) {
  ScheduleSpec s;
  s.kind = Kind::kGapFeedback;
  s.gain = gain;
  s.alpha_min = alpha_min;
  s.alpha_max = alpha_max;
  return s;
}

void ScheduleSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError(std::string("schedule.") + name + " must be > 0");
  };
  switch (kind) {
    case Kind::kFixed:
      positive(alpha, "alpha");
      return;
    case Kind::kGeometric:
      positive(alpha_min, "alpha_min");
      positive(alpha_max, "alpha_max");
      if (alpha_min > alpha_max) throw ConfigError("schedule.alpha_min must not exceed schedule.alpha_max");
      if (horizon < 1) throw ConfigError("schedule.horizon must be >= 1");
      return;
    case Kind::kGapFeedback:
      positive(alpha_min, "alpha_min");
      positive(alpha_max, "alpha_max");
      positive(gain, "c");
      if (alpha_min > alpha_max) throw ConfigError("schedule.alpha_min must not exceed schedule.alpha_max");
      return;
  }
}

std::string ScheduleSpec::label() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kFixed: out << "fixed_" << alpha; break;
    case Kind::kGeometric: out << "geometric"; break;
    case Kind::kGapFeedback: out << "gap_feedback"; break;
  }
  return out.str();
}

double next_alpha(const ScheduleSpec& spec, ScheduleState& state) {
  double alpha = 0.0;
  const int t = state.iteration;
  switch (spec.kind) {
    case ScheduleSpec::Kind::kFixed:
      alpha = spec.alpha;
      break;
    case ScheduleSpec::Kind::kGeometric:
      alpha = spec.alpha_max *
              std::pow(spec.alpha_min / spec.alpha_max, static_cast<double>(t) / static_cast<double>(spec.horizon));
      break;
    case ScheduleSpec::Kind::kGapFeedback:
      // At t = 0 the model still equals its opponent, so the gap is
      // identically zero; the schedule starts from the top of its range.
      if (t == 0) {
        alpha = spec.alpha_max;
      } else {
        if (!state.last_gap) throw StateError("gap_feedback schedule at iteration " + std::to_string(t) + " has no gap estimate");
        alpha = std::clamp(1.0 + spec.gain * *state.last_gap, spec.alpha_min, spec.alpha_max);
      }
      break;
  }
  state.alpha_history.push_back(alpha);
  ++state.iteration;
  return alpha;
}

double estimate_gap_mc(const TabularPolicy& model, const TabularPolicy& opponent, std::span<const Sample> real_batch,
                       std::span<const Sample> syn_batch) {
  if (real_batch.empty() || syn_batch.empty()) throw InputError("gap estimate needs non-empty batches");
  auto mean_reward = [&](std::span<const Sample> batch) {
    double s = 0.0;
    for (const Sample& x : batch) s += model.log_prob(x.prompt, x.response) - opponent.log_prob(x.prompt, x.response);
    return s / static_cast<double>(batch.size());
  };
  return mean_reward(real_batch) - mean_reward(syn_batch);
}

double estimate_gap_exact(const TabularPolicy& model, const TabularPolicy& opponent, const TargetTables& target) {
  if (!(model.space() == opponent.space())) throw InputError("model and opponent are defined over different spaces");
  const ProblemSpace& space = model.space();
  if (target.per_prompt.size() != space.num_prompts()) throw InputError("target tables do not match the prompt set");
  double gap = 0.0;
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    const double qx = space.prompt_probs[x];
    if (qx == 0.0) continue;
    const std::vector<double> log_m = model.log_distribution(x);
    const std::vector<double> log_o = opponent.log_distribution(x);
    const std::vector<double>& data = target.per_prompt[x];
    for (std::size_t y = 0; y < log_m.size(); ++y) {
      const double r = log_m[y] - log_o[y];
      if (data[y] > 0.0) gap += qx * data[y] * r;
      gap -= qx * std::exp(log_o[y]) * r;
    }
  }
  return gap;
}

}  // namespace renyiplay
