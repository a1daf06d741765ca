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

#ifndef RENYIPLAY_ENGINE_HPP
#define RENYIPLAY_ENGINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "loss.hpp"
#include "policy.hpp"
#include "schedule.hpp"

namespace renyiplay {

/// Divergences from the annotator to a policy, per prompt and q-averaged.
struct DivergenceTable {
  std::vector<double> alphas;
  double kl = 0.0;
  /// D_alpha(p_data || policy) per entry of alphas.
  std::vector<double> renyi;
  std::vector<double> kl_per_prompt;
  /// [prompt][alpha index]
  std::vector<std::vector<double>> renyi_per_prompt;
};

DivergenceTable evaluate_checkpoint(const TabularPolicy& policy, const TabularPolicy& annotator,
                                    const std::vector<double>& eval_alphas);

/// One row of training telemetry. Per-step rows carry the loss evaluated
/// before the update and divergences after it. Summary rows (epoch and
/// step == -1) describe the policy at the start of `iteration` and leave
/// the loss columns NaN.
struct MetricsRecord {
  int iteration = 0;
  int epoch = 0;
  int step = 0;
  double alpha = 0.0;
  double loss_total = 0.0;
  double term_real = 0.0;
  double term_syn = 0.0;
  double mean_reward_real = 0.0;
  double mean_reward_syn = 0.0;
  double gap = 0.0;
  double grad_norm = 0.0;
  double kl_to_data = 0.0;
  std::vector<double> renyi_to_data;
  double wall_ms = 0.0;

  [[nodiscard]] bool is_summary() const { return epoch < 0; }
};

std::string metrics_header(const std::vector<double>& eval_alphas);
/// Comma-separated values with 12 significant digits.
std::string format_metrics_row(const MetricsRecord& record);

/// Frozen annotator and the fixed annotated dataset drawn from it.
TabularPolicy make_annotator(const ExperimentConfig& config);
Dataset draw_annotated(const TabularPolicy& annotator, std::size_t n, Rng& rng);
TabularPolicy make_initial_policy(const ExperimentConfig& config, const TabularPolicy& annotator);

/// `n_per_prompt` fresh responses from the opponent for every annotated
/// record, in record order.
Dataset regenerate_synthetic(const TabularPolicy& opponent, const Dataset& annotated, int n_per_prompt, int iteration,
                             Rng& rng);

/// Mutable state of one run. The trainer is its only writer.
struct RunState {
  int iteration = 0;
  TabularPolicy main;
  TabularPolicy opponent;
  ScheduleState schedule;
  OptimizerState optimizer;
  Rng generation_rng;
  Rng shuffle_rng;
  /// Synthetic data drawn from \`opponent\` for the current iteration.
  Dataset synthetic;
};

struct RunObserver {
  std::function<void(const MetricsRecord&)> on_record;
  /// Called with k and theta_k for k = 0 .. iterations.
  std::function<void(int, const TabularPolicy&)> on_checkpoint;
};

struct RunResult {
  TabularPolicy annotator;
  std::vector<MetricsRecord> metrics;
  std::vector<TabularPolicy> checkpoints;
  std::vector<DivergenceTable> divergence_by_iteration;
  std::vector<double> alpha_history;
  std::vector<double> gap_history;
  int steps_per_iteration = 0;
};

/// Algorithm 1 on a tabular problem: freeze the opponent, regenerate
/// synthetic data, choose alpha, then epochs x ceil(n / batch_size)
/// optimizer steps on the method's loss.
class Trainer {
 public:
  explicit Trainer(ExperimentConfig config);

  [[nodiscard]] const ExperimentConfig& config() const { return config_; }
  [[nodiscard]] const TabularPolicy& annotator() const { return annotator_; }
  /// Annotated dataset, drawn once from the annotator with the data stream.
  [[nodiscard]] const Dataset& annotated() const { return annotated_; }
  [[nodiscard]] int steps_per_epoch() const;

  [[nodiscard]] RunState initial_state() const;

  /// One self-play iteration; advances state.iteration by one. Throws
  /// NumericError with a JSON diagnostic when a loss or gradient is not
  /// finite.
  void run_iteration(RunState& state, const RunObserver& observer, RunResult* result = nullptr) const;

  /// A summary row for the policy currently held in `state.main`.
  [[nodiscard]] MetricsRecord summary_record(const RunState& state, double alpha) const;

 private:
  struct StepOutcome;
  StepOutcome evaluate_step(const RunState& state, std::span<const std::size_t> batch, double alpha) const;
  [[nodiscard]] std::vector<std::size_t> permutation(Rng& rng) const;

  ExperimentConfig config_;
  TabularPolicy annotator_;
  Dataset annotated_;
  std::optional<TargetTables> exact_target_;
};

RunResult run_selfplay(const ExperimentConfig& config, const RunObserver& observer = {});

/// Shorthand for the final q-averaged KL(p_data || p_theta_T).
double final_kl(const RunResult& result);

}  // namespace renyiplay

#endif  // RENYIPLAY_ENGINE_HPP
