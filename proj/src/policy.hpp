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

#ifndef RENYIPLAY_POLICY_HPP
#define RENYIPLAY_POLICY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "numeric.hpp"

namespace renyiplay {

inline constexpr std::size_t kDefaultEnumerationCap = 65536;

/// Finite prompt set with prompt probabilities q(x), and fixed-length
/// responses over tokens 0..vocab_size-1.
struct ProblemSpace {
  int vocab_size = 2;
  int response_len = 1;
  std::vector<std::string> prompts;
  std::vector<double> prompt_probs;
  std::size_t enumeration_cap = kDefaultEnumerationCap;

  /// Space with `num_prompts` prompts named p0, p1, ... and uniform q.
  static ProblemSpace uniform(int vocab_size, int response_len, std::size_t num_prompts);

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  /// V^L. Only meaningful after validate().
  [[nodiscard]] std::size_t response_count() const;
  /// Number of (position, prefix) contexts per prompt: sum of V^pos for pos < L.
  [[nodiscard]] std::size_t contexts_per_prompt() const;
  [[nodiscard]] std::size_t num_prompts() const { return prompts.size(); }

  /// Throws InputError for an unknown name.
  [[nodiscard]] std::size_t prompt_index(std::string_view name) const;

  bool operator==(const ProblemSpace&) const = default;
};

using Response = std::vector<int>;

/// Lexicographic index of a response (first token most significant).
std::size_t encode_response(const ProblemSpace& space, std::span<const int> response);
Response decode_response(const ProblemSpace& space, std::size_t index);

struct PolicyInit {
  enum class Kind { kZeros, kGaussian };
  Kind kind = Kind::kZeros;
  double stddev = 0.0;
  std::uint64_t seed = 0;

  static PolicyInit zeros() { return {}; }
  static PolicyInit gaussian(double stddev, std::uint64_t seed) {
    return {Kind::kGaussian, stddev, seed};
  }
};

/// Partial derivatives of log p(y|x) with respect to the logits of the L
/// contexts visited by y. All other coordinates are exactly zero.
struct LogProbGradient {
  int vocab_size = 0;
  /// Offset of the first logit of each visited context, in position order.
  std::vector<std::size_t> context_offsets;
  /// vocab_size partials per visited context.
  std::vector<double> partials;

  /// dense[offset + k] += scale * partial, for every stored coordinate.
  void accumulate_into(std::span<double> dense, double scale) const;
};

/// Prefix-conditioned categorical policy p(y|x) with one logit row per
/// (prompt, position, prefix). Read-only operations are safe to share
/// across threads.
class TabularPolicy {
 public:
  TabularPolicy(ProblemSpace space, const PolicyInit& init);
  /// Takes ownership of a flat logit table in (prompt, context, token) order.
  TabularPolicy(ProblemSpace space, std::vector<double> logits);

  [[nodiscard]] const ProblemSpace& space() const { return space_; }
  [[nodiscard]] std::size_t parameter_count() const { return logits_.size(); }
  [[nodiscard]] std::span<const double> logits() const { return logits_; }
  [[nodiscard]] std::span<double> mutable_logits() { return logits_; }

  /// Offset of the logit row for the context (prompt, prefix).
  [[nodiscard]] std::size_t context_offset(std::size_t prompt, std::span<const int> prefix) const;

  [[nodiscard]] double log_prob(std::size_t prompt, std::span<const int> response) const;

  /// log p(y|x) for every response, lexicographic order.
  [[nodiscard]] std::vector<double> log_distribution(std::size_t prompt) const;
  /// p(y|x) for every response, lexicographic order.
  [[nodiscard]] std::vector<double> enumerate_distribution(std::size_t prompt) const;

  [[nodiscard]] Response sample_one(std::size_t prompt, Rng& rng) const;
  [[nodiscard]] std::vector<Response> sample(std::size_t prompt, Rng& rng, std::size_t n) const;

  [[nodiscard]] LogProbGradient grad_log_prob(std::size_t prompt, std::span<const int> response) const;

  bool operator==(const TabularPolicy&) const = default;

 private:
  void check_prompt(std::size_t prompt) const;
  void check_response(std::span<const int> response) const;

  ProblemSpace space_;
  std::vector<double> logits_;
};

/// Plain gradient descent or the RMS-normalized adaptive rule.
struct StepRule {
  enum class Kind { kPlain, kAdaptive };
  Kind kind = Kind::kPlain;
  double learning_rate = 0.1;
  double decay = 0.9;
  double epsilon = 1e-8;

  static StepRule plain(double lr) { return {Kind::kPlain, lr, 0.9, 1e-8}; }
  static StepRule adaptive(double lr, double decay, double epsilon) {
    return {Kind::kAdaptive, lr, decay, epsilon};
  }
  bool operator==(const StepRule&) const = default;
};

/// Running mean of squared gradients for the adaptive rule.
struct OptimizerState {
  std::vector<double> mean_square;
  bool operator==(const OptimizerState&) const = default;
};

/// theta <- theta - step(gradient). Throws NumericError naming the first
/// non-finite coordinate; the policy and state are untouched in that case.
void apply_update(TabularPolicy& policy, std::span<const double> gradient, OptimizerState& state,
                  const StepRule& rule);

}  // namespace renyiplay

#endif  // RENYIPLAY_POLICY_HPP
