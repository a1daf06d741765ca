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

#include "loss.hpp"

#include <cmath>

#include "errors.hpp"
#include "numeric.hpp"

namespace renyiplay {

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::kHellinger: return "hellinger";
    case Regime::kSubKl: return "sub_kl";
    case Regime::kKlLimit: return "kl_limit";
    case Regime::kIntermediate: return "intermediate";
    case Regime::kChi2: return "chi2";
    case Regime::kSuperChi2: return "super_chi2";
  }
  return "unknown";
}

std::string_view mode_name(EstimationMode mode) {
  return mode == EstimationMode::kExact ? "exact" : "monte_carlo";
}

RenyiOrder::RenyiOrder(double alpha) : alpha_(alpha) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    throw ConfigError("Renyi order must be finite and > 0, got " + std::to_string(alpha));
  }
}

Regime RenyiOrder::regime() const {
  if (std::abs(alpha_ - 1.0) < kLossOrderTolerance) return Regime::kKlLimit;
  if (std::abs(alpha_ - 0.5) < kLossOrderTolerance) return Regime::kHellinger;
  if (std::abs(alpha_ - 2.0) < kLossOrderTolerance) return Regime::kChi2;
  if (alpha_ < 1.0) return Regime::kSubKl;
  return alpha_ < 2.0 ? Regime::kIntermediate : Regime::kSuperChi2;
}

namespace {

void check_probs(std::span<const double> values, std::span<const double> probs) {
  if (values.size() != probs.size()) throw InputError("values and probabilities differ in length");
  if (values.empty()) throw InputError("tilted risk of an empty sample");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("probabilities do not sum to 1");
}

}  // namespace

TiltedTerm tilt(std::span<const double> values, std::span<const double> probs, double order,
                double order_tolerance) {
  check_probs(values, probs);
  TiltedTerm out;
  out.weights.resize(values.size());
  if (std::abs(order) < order_tolerance) {
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (probs[i] > 0.0) mean += probs[i] * values[i];
      out.weights[i] = probs[i];
    }
    out.value = mean;
    return out;
  }
  // a_i = log p_i + s v_i; shared maximum for the risk and the weights.
  double m = kNegInf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] > 0.0) m = std::max(m, std::log(probs[i]) + order * values[i]);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.weights[i] = probs[i] > 0.0 ? std::exp(std::log(probs[i]) + order * values[i] - m) : 0.0;
    s += out.weights[i];
  }
  for (double& w : out.weights) w /= s;
  out.value = (m + std::log(s)) / order;
  return out;
}

double tilted_risk(std::span<const double> values, std::span<const double> probs, double order) {
  return tilt(values, probs, order).value;
}

std::vector<double> importance_weights(std::span<const double> rewards, double order,
                                       std::span<const double> probs) {
  return tilt(rewards, probs, order).weights;
}

void Dataset::validate(const ProblemSpace& space) const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Sample& s = pairs[i];
    if (s.prompt >= space.num_prompts()) throw InputError("record " + std::to_string(i) + " has an unknown prompt");
    if (s.response.size() != static_cast<std::size_t>(space.response_len)) {
      throw InputError("record " + std::to_string(i) + " has a response of the wrong length");
    }
    for (int tok : s.response) {
      if (tok < 0 || tok >= space.vocab_size) {
        throw InputError("record " + std::to_string(i) + " has a token outside the vocabulary");
      }
    }
  }
}

TargetTables target_from_policy(const TabularPolicy& annotator) {
  TargetTables t;
  for (std::size_t x = 0; x < annotator.space().num_prompts(); ++x) {
    t.per_prompt.push_back(annotator.enumerate_distribution(x));
  }
  return t;
}

TargetTables target_from_dataset(const ProblemSpace& space, const Dataset& data) {
  data.validate(space);
  TargetTables t;
  t.per_prompt.assign(space.num_prompts(), std::vector<double>(space.response_count(), 0.0));
  std::vector<std::size_t> counts(space.num_prompts(), 0);
  for (const Sample& s : data.pairs) {
    t.per_prompt[s.prompt][encode_response(space, s.response)] += 1.0;
    ++counts[s.prompt];
  }
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    if (counts[x] == 0) {
      if (space.prompt_probs[x] > 0.0) {
        throw ConfigError("prompt '" + space.prompts[x] + "' has no annotated records");
      }
      continue;
    }
    for (double& p : t.per_prompt[x]) p /= static_cast<double>(counts[x]);
  }
  return t;
}

namespace {

void check_pair_space(const TabularPolicy& policy, const TabularPolicy& opponent) {
  if (!(policy.space() == opponent.space())) {
    throw InputError("policy and opponent are defined over different problem spaces");
  }
}

void check_target(const ProblemSpace& space, const TargetTables& target) {
  if (target.per_prompt.size() != space.num_prompts()) throw InputError("target tables do not match the prompt set");
  for (const auto& table : target.per_prompt) {
    if (table.size() != space.response_count()) throw InputError("target table has the wrong number of responses");
  }
}

std::vector<double> rewards_of(const TabularPolicy& policy, const TabularPolicy& opponent,
                               std::span<const Sample> batch) {
  std::vector<double> r;
  r.reserve(batch.size());
  for (const Sample& s : batch) r.push_back(policy.log_prob(s.prompt, s.response) - opponent.log_prob(s.prompt, s.response));
  return r;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Orders of the two tilted terms and whether the KL-limit form applies.
struct TermOrders {
  double real;
  double syn;
};

TermOrders term_orders(const RenyiOrder& order) {
  if (order.is_kl_limit()) return {0.0, 1.0};
  return {order.alpha() - 1.0, order.alpha()};
}

// -(1/(alpha-1)) log E[e^{(alpha-1) r}] is the negated tilted risk at
// order alpha-1; the KL limit uses the plain mean.
double real_term(const TiltedTerm& t) { return -t.value; }
// (1/alpha) log E[e^{alpha r}]; at the KL limit log E[e^{r}].
double syn_term(const TiltedTerm& t) { return t.value; }

}  // namespace

LossAndGradient iris_mc(const TabularPolicy& policy, const TabularPolicy& opponent,
                        std::span<const Sample> real_batch, std::span<const Sample> syn_batch, double alpha,
                        bool with_gradient) {
  check_pair_space(policy, opponent);
  if (real_batch.empty() || syn_batch.empty()) throw InputError("IRIS mini-batch terms need non-empty batches");
  const RenyiOrder order(alpha);
  const TermOrders orders = term_orders(order);

  LossAndGradient out;
  LossBreakdown& lb = out.loss;
  lb.mode = EstimationMode::kMonteCarlo;
  lb.alpha_used = alpha;
  lb.rewards_real = rewards_of(policy, opponent, real_batch);
  lb.rewards_syn = rewards_of(policy, opponent, syn_batch);
  const std::vector<double> uniform_real(real_batch.size(), 1.0 / static_cast<double>(real_batch.size()));
  const std::vector<double> uniform_syn(syn_batch.size(), 1.0 / static_cast<double>(syn_batch.size()));

  TiltedTerm real = tilt(lb.rewards_real, uniform_real, orders.real);
  TiltedTerm syn = tilt(lb.rewards_syn, uniform_syn, orders.syn);
  lb.term_real = real_term(real);
  lb.term_syn = syn_term(syn);
  lb.total = lb.term_real + lb.term_syn;
  lb.weights_real = std::move(real.weights);
  lb.weights_syn = std::move(syn.weights);
  lb.mean_reward_real = mean(lb.rewards_real);
  lb.mean_reward_syn = mean(lb.rewards_syn);

  if (with_gradient) {
    out.gradient.values.assign(policy.parameter_count(), 0.0);
    for (std::size_t i = 0; i < real_batch.size(); ++i) {
      policy.grad_log_prob(real_batch[i].prompt, real_batch[i].response)
          .accumulate_into(out.gradient.values, -lb.weights_real[i]);
    }
    for (std::size_t i = 0; i < syn_batch.size(); ++i) {
      policy.grad_log_prob(syn_batch[i].prompt, syn_batch[i].response)
          .accumulate_into(out.gradient.values, lb.weights_syn[i]);
    }
  }
  return out;
}

LossBreakdown iris_loss_mc(const TabularPolicy& policy, const TabularPolicy& opponent,
                           std::span<const Sample> real_batch, std::span<const Sample> syn_batch, double alpha) {
  return iris_mc(policy, opponent, real_batch, syn_batch, alpha, false).loss;
}

LossAndGradient iris_exact(const TabularPolicy& policy, const TabularPolicy& opponent, const TargetTables& target,
                           double alpha, bool with_gradient) {
  check_pair_space(policy, opponent);
  const ProblemSpace& space = policy.space();
  check_target(space, target);
  const RenyiOrder order(alpha);
  const TermOrders orders = term_orders(order);
  const std::size_t n = space.response_count();

  LossAndGradient out;
  LossBreakdown& lb = out.loss;
  lb.mode = EstimationMode::kExact;
  lb.alpha_used = alpha;
  if (with_gradient) out.gradient.values.assign(policy.parameter_count(), 0.0);

  std::vector<double> rewards(n);
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    const double qx = space.prompt_probs[x];
    const std::vector<double> log_p = policy.log_distribution(x);
    const std::vector<double> log_opp = opponent.log_distribution(x);
    std::vector<double> opp_probs(n);
    for (std::size_t y = 0; y < n; ++y) {
      rewards[y] = log_p[y] - log_opp[y];
      opp_probs[y] = std::exp(log_opp[y]);
    }
    lb.rewards_real.insert(lb.rewards_real.end(), rewards.begin(), rewards.end());
    lb.rewards_syn.insert(lb.rewards_syn.end(), rewards.begin(), rewards.end());
    if (qx == 0.0) {
      lb.weights_real.insert(lb.weights_real.end(), n, 0.0);
      lb.weights_syn.insert(lb.weights_syn.end(), n, 0.0);
      continue;
    }
    const std::vector<double>& data_probs = target.per_prompt[x];
    const TiltedTerm real = tilt(rewards, data_probs, orders.real);
    const TiltedTerm syn = tilt(rewards, opp_probs, orders.syn);
    lb.term_real += qx * real_term(real);
    lb.term_syn += qx * syn_term(syn);
    for (std::size_t y = 0; y < n; ++y) {
      lb.weights_real.push_back(qx * real.weights[y]);
      lb.weights_syn.push_back(qx * syn.weights[y]);
      lb.mean_reward_real += qx * data_probs[y] * (data_probs[y] > 0.0 ? rewards[y] : 0.0);
      lb.mean_reward_syn += qx * opp_probs[y] * rewards[y];
    }
    if (with_gradient) {
      for (std::size_t y = 0; y < n; ++y) {
        const double coeff = qx * (syn.weights[y] - real.weights[y]);
        if (coeff == 0.0) continue;
        policy.grad_log_prob(x, decode_response(space, y)).accumulate_into(out.gradient.values, coeff);
      }
    }
  }
  lb.total = lb.term_real + lb.term_syn;
  return out;
}

LossBreakdown iris_loss_exact(const TabularPolicy& policy, const TabularPolicy& opponent,
                              const TabularPolicy& annotator, double alpha) {
  if (!(annotator.space() == policy.space())) throw InputError("annotator is defined over a different problem space");
  return iris_exact(policy, opponent, target_from_policy(annotator), alpha, false).loss;
}

double optimal_value_reference(const TabularPolicy& annotator, const TabularPolicy& opponent, double alpha) {
  const RenyiOrder order(alpha);
  if (order.is_kl_limit()) return -conditional_kl(annotator, opponent);
  return -conditional_divergence(annotator, opponent, alpha) / alpha;
}

SpinResult spin_mc(const TabularPolicy& policy, const TabularPolicy& opponent, std::span<const PairedSample> pairs,
                   bool with_gradient) {
  check_pair_space(policy, opponent);
  if (pairs.empty()) throw InputError("SPIN loss of an empty batch");
  SpinResult out;
  if (with_gradient) out.gradient.values.assign(policy.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (const PairedSample& p : pairs) {
    const double r_real = policy.log_prob(p.prompt, p.real) - opponent.log_prob(p.prompt, p.real);
    const double r_syn = policy.log_prob(p.prompt, p.synthetic) - opponent.log_prob(p.prompt, p.synthetic);
    const double gap = r_real - r_syn;
    out.loss += inv_n * softplus_neg(gap);
    out.mean_reward_real += inv_n * r_real;
    out.mean_reward_syn += inv_n * r_syn;
    if (with_gradient) {
      // d/dtheta log(1 + e^{-gap}) = -sigmoid(-gap) (grad r_real - grad r_syn).
      const double s = inv_n * sigmoid(-gap);
      policy.grad_log_prob(p.prompt, p.synthetic).accumulate_into(out.gradient.values, s);
      policy.grad_log_prob(p.prompt, p.real).accumulate_into(out.gradient.values, -s);
    }
  }
  return out;
}

SpinResult spin_exact(const TabularPolicy& policy, const TabularPolicy& opponent, const TargetTables& target,
                      bool with_gradient) {
  check_pair_space(policy, opponent);
  const ProblemSpace& space = policy.space();
  check_target(space, target);
  const std::size_t n = space.response_count();
  SpinResult out;
  if (with_gradient) out.gradient.values.assign(policy.parameter_count(), 0.0);
  std::vector<double> rewards(n);
  std::vector<double> coeff(n);
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    const double qx = space.prompt_probs[x];
    if (qx == 0.0) continue;
    const std::vector<double> log_p = policy.log_distribution(x);
    const std::vector<double> log_opp = opponent.log_distribution(x);
    for (std::size_t y = 0; y < n; ++y) rewards[y] = log_p[y] - log_opp[y];
    const std::vector<double>& data = target.per_prompt[x];
    std::fill(coeff.begin(), coeff.end(), 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      if (data[y] == 0.0) continue;
      out.mean_reward_real += qx * data[y] * rewards[y];
      for (std::size_t ys = 0; ys < n; ++ys) {
        const double w = qx * data[y] * std::exp(log_opp[ys]);
        const double gap = rewards[y] - rewards[ys];
        out.loss += w * softplus_neg(gap);
        const double s = w * sigmoid(-gap);
        coeff[ys] += s;
        coeff[y] -= s;
      }
    }
    for (std::size_t y = 0; y < n; ++y) out.mean_reward_syn += qx * std::exp(log_opp[y]) * rewards[y];
    if (with_gradient) {
      for (std::size_t y = 0; y < n; ++y) {
        if (coeff[y] == 0.0) continue;
        policy.grad_log_prob(x, decode_response(space, y)).accumulate_into(out.gradient.values, coeff[y]);
      }
    }
  }
  return out;
}

SftResult sft_mc(const TabularPolicy& policy, std::span<const Sample> real_batch, bool with_gradient) {
  if (real_batch.empty()) throw InputError("SFT loss of an empty batch");
  SftResult out;
  if (with_gradient) out.gradient.values.assign(policy.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(real_batch.size());
  for (const Sample& s : real_batch) {
    out.loss -= inv_n * policy.log_prob(s.prompt, s.response);
    if (with_gradient) policy.grad_log_prob(s.prompt, s.response).accumulate_into(out.gradient.values, -inv_n);
  }
  return out;
}

SftResult sft_exact(const TabularPolicy& policy, const TargetTables& target, bool with_gradient) {
  const ProblemSpace& space = policy.space();
  check_target(space, target);
  SftResult out;
  if (with_gradient) out.gradient.values.assign(policy.parameter_count(), 0.0);
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    const double qx = space.prompt_probs[x];
    if (qx == 0.0) continue;
    const std::vector<double> log_p = policy.log_distribution(x);
    const std::vector<double>& data = target.per_prompt[x];
    for (std::size_t y = 0; y < log_p.size(); ++y) {
      if (data[y] == 0.0) continue;
      out.loss -= qx * data[y] * log_p[y];
      if (with_gradient) {
        policy.grad_log_prob(x, decode_response(space, y)).accumulate_into(out.gradient.values, -qx * data[y]);
      }
    }
  }
  return out;
}

}  // namespace renyiplay
