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

#include "policy.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "errors.hpp"

namespace renyiplay {

namespace {

std::size_t int_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

ProblemSpace ProblemSpace::uniform(int vocab_size, int response_len, std::size_t num_prompts) {
  ProblemSpace s;
  s.vocab_size = vocab_size;
  s.response_len = response_len;
  for (std::size_t i = 0; i < num_prompts; ++i) {
    s.prompts.push_back("p" + std::to_string(i));
    s.prompt_probs.push_back(1.0 / static_cast<double>(num_prompts));
  }
  return s;
}

void ProblemSpace::validate() const {
  if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2, got " + std::to_string(vocab_size));
  if (response_len < 1) {
    throw ConfigError("response_len must be >= 1, got " + std::to_string(response_len));
  }
  // V^L with an overflow-safe comparison against the cap.
  std::size_t count = 1;
  for (int i = 0; i < response_len; ++i) {
    if (count > enumeration_cap / static_cast<std::size_t>(vocab_size)) {
      std::ostringstream msg;
      msg << "response space V^L = " << vocab_size << "^" << response_len
          << " exceeds the enumeration cap " << enumeration_cap;
      throw ConfigError(msg.str());
    }
    count *= static_cast<std::size_t>(vocab_size);
  }
  if (prompts.empty()) throw ConfigError("at least one prompt is required");
  if (prompt_probs.size() != prompts.size()) {
    throw ConfigError("prompt_probs has " + std::to_string(prompt_probs.size()) +
                      " entries for " + std::to_string(prompts.size()) + " prompts");
  }
  double total = 0.0;
  for (double q : prompt_probs) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("prompt_probs entries must be finite and >= 0");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "prompt_probs must sum to 1, got " << total;
    throw ConfigError(msg.str());
  }
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    for (std::size_t j = i + 1; j < prompts.size(); ++j) {
      if (prompts[i] == prompts[j]) throw ConfigError("duplicate prompt '" + prompts[i] + "'");
    }
  }
}

std::size_t ProblemSpace::response_count() const {
  return int_pow(static_cast<std::size_t>(vocab_size), response_len);
}

std::size_t ProblemSpace::contexts_per_prompt() const {
  std::size_t total = 0;
  for (int pos = 0; pos < response_len; ++pos) total += int_pow(static_cast<std::size_t>(vocab_size), pos);
  return total;
}

std::size_t ProblemSpace::prompt_index(std::string_view name) const {
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (prompts[i] == name) return i;
  }
  throw InputError("unknown prompt '" + std::string(name) + "'");
}

std::size_t encode_response(const ProblemSpace& space, std::span<const int> response) {
  std::size_t idx = 0;
  for (int tok : response) idx = idx * static_cast<std::size_t>(space.vocab_size) + static_cast<std::size_t>(tok);
  return idx;
}

Response decode_response(const ProblemSpace& space, std::size_t index) {
  Response r(static_cast<std::size_t>(space.response_len));
  const auto v = static_cast<std::size_t>(space.vocab_size);
  for (std::size_t pos = r.size(); pos-- > 0;) {
    r[pos] = static_cast<int>(index % v);
    index /= v;
  }
  return r;
}

void LogProbGradient::accumulate_into(std::span<double> dense, double scale) const {
  const auto v = static_cast<std::size_t>(vocab_size);
  for (std::size_t c = 0; c < context_offsets.size(); ++c) {
    const std::size_t off = context_offsets[c];
    for (std::size_t k = 0; k < v; ++k) dense[off + k] += scale * partials[c * v + k];
  }
}

TabularPolicy::TabularPolicy(ProblemSpace space, const PolicyInit& init) : space_(std::move(space)) {
  space_.validate();
  logits_.assign(space_.num_prompts() * space_.contexts_per_prompt() * static_cast<std::size_t>(space_.vocab_size),
                 0.0);
  if (init.kind == PolicyInit::Kind::kGaussian) {
    if (!(init.stddev >= 0.0)) throw ConfigError("gaussian init stddev must be >= 0");
    Rng rng(init.seed);
    std::normal_distribution<double> normal(0.0, init.stddev);
    for (double& x : logits_) x = normal(rng);
  }
}

TabularPolicy::TabularPolicy(ProblemSpace space, std::vector<double> logits)
    : space_(std::move(space)), logits_(std::move(logits)) {
  space_.validate();
  const std::size_t expected =
      space_.num_prompts() * space_.contexts_per_prompt() * static_cast<std::size_t>(space_.vocab_size);
  if (logits_.size() != expected) {
    throw ConfigError("logit table has " + std::to_string(logits_.size()) + " entries, expected " +
                      std::to_string(expected));
  }
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    if (!std::isfinite(logits_[i])) throw ConfigError("logit " + std::to_string(i) + " is not finite");
  }
}

void TabularPolicy::check_prompt(std::size_t prompt) const {
  if (prompt >= space_.num_prompts()) {
    throw InputError("prompt index " + std::to_string(prompt) + " out of range (" +
                     std::to_string(space_.num_prompts()) + " prompts)");
  }
}

void TabularPolicy::check_response(std::span<const int> response) const {
  if (response.size() != static_cast<std::size_t>(space_.response_len)) {
    throw InputError("response has length " + std::to_string(response.size()) + ", expected " +
                     std::to_string(space_.response_len));
  }
  for (int tok : response) {
    if (tok < 0 || tok >= space_.vocab_size) {
      throw InputError("token " + std::to_string(tok) + " outside vocabulary of size " +
                       std::to_string(space_.vocab_size));
    }
  }
}

std::size_t TabularPolicy::context_offset(std::size_t prompt, std::span<const int> prefix) const {
  const auto v = static_cast<std::size_t>(space_.vocab_size);
  // Contexts at position pos start after (V^pos - 1) / (V - 1) shallower ones.
  std::size_t level_start = 0;
  std::size_t level_size = 1;
  for (std::size_t pos = 0; pos < prefix.size(); ++pos) {
    level_start += level_size;
    level_size *= v;
  }
  std::size_t prefix_index = 0;
  for (int tok : prefix) prefix_index = prefix_index * v + static_cast<std::size_t>(tok);
  return ((prompt * space_.contexts_per_prompt()) + level_start + prefix_index) * v;
}

double TabularPolicy::log_prob(std::size_t prompt, std::span<const int> response) const {
  check_prompt(prompt);
  check_response(response);
  const auto v = static_cast<std::size_t>(space_.vocab_size);
  double total = 0.0;
  for (std::size_t pos = 0; pos < response.size(); ++pos) {
    const std::span<const double> row(logits_.data() + context_offset(prompt, response.first(pos)), v);
    total += row[static_cast<std::size_t>(response[pos])] - log_sum_exp(row);
  }
  return total;
}

std::vector<double> TabularPolicy::log_distribution(std::size_t prompt) const {
  check_prompt(prompt);
  const auto v = static_cast<std::size_t>(space_.vocab_size);
  const std::size_t base = prompt * space_.contexts_per_prompt() * v;
  // Level-by-level expansion: entry prefix * V + token of the next level is
  // the prefix's log-probability plus the conditional at that context.
  std::vector<double> current{0.0};
  std::vector<double> row(v);
  std::size_t level_start = 0;
  for (int pos = 0; pos < space_.response_len; ++pos) {
    std::vector<double> next(current.size() * v);
    for (std::size_t prefix = 0; prefix < current.size(); ++prefix) {
      const std::span<const double> logits(logits_.data() + base + (level_start + prefix) * v, v);
      log_softmax(logits, row);
      for (std::size_t k = 0; k < v; ++k) next[prefix * v + k] = current[prefix] + row[k];
    }
    level_start += current.size();
    current = std::move(next);
  }
  return current;
}

std::vector<double> TabularPolicy::enumerate_distribution(std::size_t prompt) const {
  std::vector<double> probs = log_distribution(prompt);
  for (double& p : probs) p = std::exp(p);
  return probs;
}

Response TabularPolicy::sample_one(std::size_t prompt, Rng& rng) const {
  check_prompt(prompt);
  const auto v = static_cast<std::size_t>(space_.vocab_size);
  Response out;
  out.reserve(static_cast<std::size_t>(space_.response_len));
  std::vector<double> probs(v);
  for (int pos = 0; pos < space_.response_len; ++pos) {
    const std::span<const double> row(logits_.data() + context_offset(prompt, out), v);
    softmax(row, probs);
    out.push_back(static_cast<int>(sample_index(probs, rng)));
  }
  return out;
}

std::vector<Response> TabularPolicy::sample(std::size_t prompt, Rng& rng, std::size_t n) const {
  if (n == 0) throw InputError("sample count must be >= 1");
  std::vector<Response> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(prompt, rng));
  return out;
}

LogProbGradient TabularPolicy::grad_log_prob(std::size_t prompt, std::span<const int> response) const {
  check_prompt(prompt);
  check_response(response);
  const auto v = static_cast<std::size_t>(space_.vocab_size);
  LogProbGradient g;
  g.vocab_size = space_.vocab_size;
  g.context_offsets.reserve(response.size());
  g.partials.resize(response.size() * v);
  for (std::size_t pos = 0; pos < response.size(); ++pos) {
    const std::size_t off = context_offset(prompt, response.first(pos));
    g.context_offsets.push_back(off);
    const std::span<double> part(g.partials.data() + pos * v, v);
    softmax(std::span<const double>(logits_.data() + off, v), part);
    for (double& p : part) p = -p;
    part[static_cast<std::size_t>(response[pos])] += 1.0;
  }
  return g;
}

void apply_update(TabularPolicy& policy, std::span<const double> gradient, OptimizerState& state,
                  const StepRule& rule) {
  auto theta = policy.mutable_logits();
  if (gradient.size() != theta.size()) {
    throw InputError("gradient has " + std::to_string(gradient.size()) + " coordinates, policy has " +
                     std::to_string(theta.size()));
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!std::isfinite(gradient[i])) {
      throw NumericError("non-finite gradient at coordinate " + std::to_string(i));
    }
  }
  if (rule.kind == StepRule::Kind::kPlain) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= rule.learning_rate * gradient[i];
    return;
  }
  if (state.mean_square.size() != theta.size()) state.mean_square.assign(theta.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double& ms = state.mean_square[i];
    ms = rule.decay * ms + (1.0 - rule.decay) * gradient[i] * gradient[i];
    theta[i] -= rule.learning_rate * gradient[i] / std::sqrt(ms + rule.epsilon);
  }
}

}  // namespace renyiplay
