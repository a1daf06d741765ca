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

#ifndef RENYIPLAY_SCHEDULE_HPP
#define RENYIPLAY_SCHEDULE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loss.hpp"
#include "policy.hpp"

namespace renyiplay {

/// How the Renyi order is chosen at each self-play iteration.
struct ScheduleSpec {
  enum class Kind { kFixed, kGeometric, kGapFeedback };
  Kind kind = Kind::kFixed;
  double alpha = 2.0;       // fixed
  double alpha_min = 0.5;   // geometric, gap_feedback
  double alpha_max = 3.0;   // geometric, gap_feedback
  int horizon = 1;          // geometric: iterations over which alpha_max decays to alpha_min
  double gain = 0.5;        // gap_feedback: alpha_t = 1 + gain * gap

  static ScheduleSpec fixed(double alpha);
  static ScheduleSpec geometric(double alpha_max, double alpha_min, int horizon);
  static ScheduleSpec gap_feedback(double gain, double alpha_min, double alpha_max);

  /// Throws ConfigError on non-positive orders, alpha_min > alpha_max,
  /// gain <= 0 or horizon < 1.
  void validate() const;
  /// Short human-readable name, e.g. "fixed_2" or "gap_feedback".
  [[nodiscard]] std::string label() const;

  bool operator==(const ScheduleSpec&) const = default;
};

struct ScheduleState {
  int iteration = 0;
  /// Gap estimate feeding the next gap_feedback decision.
  std::optional<double> last_gap;
  std::vector<double> alpha_history;
};

/// alpha for iteration state.iteration; appends it to the history and
/// advances the iteration counter.
///   fixed        -> alpha
///   geometric    -> alpha_max (alpha_min / alpha_max)^(t / horizon)
///   gap_feedback -> alpha_max at t = 0, else clamp(1 + gain * gap, alpha_min, alpha_max)
/// Throws StateError when gap_feedback needs a gap and none is set.
double next_alpha(const ScheduleSpec& spec, ScheduleState& state);

/// Mean reward on real data minus mean reward on synthetic data, with
/// r = log model - log opponent. Batch means.
double estimate_gap_mc(const TabularPolicy& model, const TabularPolicy& opponent, std::span<const Sample> real_batch,
                       std::span<const Sample> syn_batch);

/// Exact gap: E_target[r] - E_opponent[r], q-averaged over prompts.
double estimate_gap_exact(const TabularPolicy& model, const TabularPolicy& opponent, const TargetTables& target);

}  // namespace renyiplay

#endif  // RENYIPLAY_SCHEDULE_HPP
