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

#ifndef RENYIPLAY_LOSS_HPP
#define RENYIPLAY_LOSS_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "divergence.hpp"
#include "policy.hpp"

namespace renyiplay {

/// Orders with |alpha - 1| below this are trained with the KL-limit loss.
/// Looser than the oracle's switchover; the continuity property bounds the
/// difference across the seam.
inline constexpr double kLossOrderTolerance = 1e-3;

enum class Regime { kHellinger, kSubKl, kKlLimit, kIntermediate, kChi2, kSuperChi2 };

std::string_view regime_name(Regime regime);

/// Renyi order alpha > 0 with its divergence regime.
class RenyiOrder {
 public:
  /// Throws ConfigError unless alpha is finite and positive.
  explicit RenyiOrder(double alpha);

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] Regime regime() const;
  [[nodiscard]] bool is_kl_limit() const { return regime() == Regime::kKlLimit; }

 private:
  double alpha_;
};

/// One stabilized exponential-tilting pass: the tilted risk of `values`
/// under `probs` at order s, and the normalized weights
/// probs_i e^{s v_i} / sum_j probs_j e^{s v_j} from the same maximum.
struct TiltedTerm {
  double value = 0.0;
  std::vector<double> weights;
};

/// Orders below `order_tolerance` in magnitude take the s -> 0 limit: the
/// plain expectation, with weights equal to `probs`.
TiltedTerm tilt(std::span<const double> values, std::span<const double> probs, double order,
                double order_tolerance = kOracleOrderTolerance);

/// (1/s) log sum probs e^{s values}. Throws InputError for invalid probs.
double tilted_risk(std::span<const double> values, std::span<const double> probs, double order);

/// Self-normalized weights proportional to probs_i e^{order * rewards_i}.
std::vector<double> importance_weights(std::span<const double> rewards, double order,
                                       std::span<const double> probs);

/// One (prompt, response) record.
struct Sample {
  std::size_t prompt = 0;
  Response response;
  bool operator==(const Sample&) const = default;
};

struct Dataset {
  enum class Origin { kAnnotated, kSynthetic };
  std::vector<Sample> pairs;
  Origin origin = Origin::kAnnotated;
  int iteration = 0;  // meaningful for synthetic data
  std::uint64_t draw_seed = 0;

  /// Throws InputError when a record does not fit the space.
  void validate(const ProblemSpace& space) const;
  bool operator==(const Dataset&) const = default;
};

/// Per-prompt probability tables over responses (lexicographic). The
/// exact-mode stand-in for an expectation under the annotated data.
struct TargetTables {
  std::vector<std::vector<double>> per_prompt;
};

TargetTables target_from_policy(const TabularPolicy& annotator);
/// Empirical response frequencies per prompt. Prompts with positive q(x)
/// must each have at least one record.
TargetTables target_from_dataset(const ProblemSpace& space, const Dataset& data);

enum class EstimationMode { kExact, kMonteCarlo };

std::string_view mode_name(EstimationMode mode);

struct LossBreakdown {
  double total = 0.0;
  double term_real = 0.0;
  double term_syn = 0.0;
  std::vector<double> rewards_real;
  std::vector<double> rewards_syn;
  std::vector<double> weights_real;
  std::vector<double> weights_syn;
  EstimationMode mode = EstimationMode::kExact;
  double alpha_used = 0.0;

  /// Expected reward under the real / synthetic sampling distributions.
  double mean_reward_real = 0.0;
  double mean_reward_syn = 0.0;
};

/// Dense gradient over every policy logit.
struct ParameterGradient {
  std::vector<double> values;

  [[nodiscard]] double norm() const { return l2_norm(values); }
};

struct LossAndGradient {
  LossBreakdown loss;
  ParameterGradient gradient;
};

/// Mini-batch objective. Samples from all prompts are pooled into one
/// empirical expectation per term.
LossAndGradient iris_mc(const TabularPolicy& policy, const TabularPolicy& opponent,
                        std::span<const Sample> real_batch, std::span<const Sample> syn_batch, double alpha,
                        bool with_gradient = true);

LossBreakdown iris_loss_mc(const TabularPolicy& policy, const TabularPolicy& opponent,
                           std::span<const Sample> real_batch, std::span<const Sample> syn_batch, double alpha);

/// Enumerated objective: per prompt, term one is an expectation under
/// `target` and term two under the opponent; per-prompt values are then
/// averaged under q(x).
LossAndGradient iris_exact(const TabularPolicy& policy, const TabularPolicy& opponent, const TargetTables& target,
                           double alpha, bool with_gradient = true);

LossBreakdown iris_loss_exact(const TabularPolicy& policy, const TabularPolicy& opponent,
                              const TabularPolicy& annotator, double alpha);

/// -(1/alpha) sum_x q(x) D_alpha(p_data || p_opponent): the value of the
/// exact objective at p_theta = p_data. At the KL limit this is the
/// continuous extension -KL(p_data || p_opponent).
double optimal_value_reference(const TabularPolicy& annotator, const TabularPolicy& opponent, double alpha);

/// An annotated response paired with a synthetic one for the same prompt.
struct PairedSample {
  std::size_t prompt = 0;
  Response real;
  Response synthetic;
};

struct SpinResult {
  double loss = 0.0;
  ParameterGradient gradient;
  double mean_reward_real = 0.0;
  double mean_reward_syn = 0.0;
};

/// Mean logistic loss log(1 + e^{-(r(y) - r(y'))}) over the pairs.
SpinResult spin_mc(const TabularPolicy& policy, const TabularPolicy& opponent, std::span<const PairedSample> pairs,
                   bool with_gradient = true);

/// Paired expectation with y ~ target and y' ~ opponent drawn independently.
SpinResult spin_exact(const TabularPolicy& policy, const TabularPolicy& opponent, const TargetTables& target,
                      bool with_gradient = true);

struct SftResult {
  double loss = 0.0;
  ParameterGradient gradient;
};

/// Negative mean log-likelihood of the annotated batch.
SftResult sft_mc(const TabularPolicy& policy, std::span<const Sample> real_batch, bool with_gradient = true);
/// Cross-entropy of the policy against the target tables, q-averaged.
SftResult sft_exact(const TabularPolicy& policy, const TargetTables& target, bool with_gradient = true);

}  // namespace renyiplay

#endif  // RENYIPLAY_LOSS_HPP
