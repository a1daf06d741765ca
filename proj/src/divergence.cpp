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

#include "divergence.hpp"

#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "numeric.hpp"

namespace renyiplay {

namespace {

void check_pair(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.size() != q.size()) {
    throw InputError("distributions have different outcome counts (" + std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()) + ")");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] <= 0.0) {
      throw DomainError("support violation at outcome " + std::to_string(i) +
                        ": second distribution vanishes where the first does not");
    }
  }
}

bool identical(const FiniteDistribution& p, const FiniteDistribution& q) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != q[i]) return false;
  }
  return true;
}

// log sum_i p_i^alpha q_i^(1-alpha) over the support of p.
double log_power_mean(const FiniteDistribution& p, const FiniteDistribution& q, double alpha) {
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    terms.push_back(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
  }
  return log_sum_exp(terms);
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("distribution is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!std::isfinite(probs_[i]) || probs_[i] < 0.0) {
      throw InputError("probability " + std::to_string(i) + " is negative or not finite");
    }
    total += probs_[i];
  }
  if (std::abs(total - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total << ", expected 1";
    throw InputError(msg.str());
  }
}

double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("Renyi order must be finite and > 0");
  check_pair(p, q);
  if (identical(p, q)) return 0.0;
  if (std::abs(alpha - 1.0) < kOracleOrderTolerance) return kl(p, q);
  return log_power_mean(p, q, alpha) / (alpha - 1.0);
}

double kl(const FiniteDistribution& p, const FiniteDistribution& q) {
  check_pair(p, q);
  if (identical(p, q)) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return total;
}

double chi2(const FiniteDistribution& p, const FiniteDistribution& q) {
  check_pair(p, q);
  // sum (p - q)^2 / q equals sum p^2 / q - 1 for normalized inputs and
  // does not cancel near p == q.
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] <= 0.0) continue;
    const double d = p[i] - q[i];
    total += d * d / q[i];
  }
  return total;
}

double bhattacharyya(const FiniteDistribution& p, const FiniteDistribution& q) {
  check_pair(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) total += std::exp(0.5 * (std::log(p[i]) + std::log(q[i])));
  }
  return total;
}

double hellinger_sq(const FiniteDistribution& p, const FiniteDistribution& q) {
  // sum (sqrt p - sqrt q)^2 / 2 is symmetric by construction and equals
  // 1 - bhattacharyya for normalized inputs.
  check_pair(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    total += d * d;
  }
  return 0.5 * total;
}

namespace {

void check_same_space(const TabularPolicy& a, const TabularPolicy& b) {
  if (!(a.space() == b.space())) throw InputError("policies are defined over different problem spaces");
}

template <class PerPrompt>
double prompt_average(const TabularPolicy& a, const TabularPolicy& b, PerPrompt&& per_prompt) {
  check_same_space(a, b);
  const auto& q = a.space().prompt_probs;
  double total = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q[x] == 0.0) continue;
    total += q[x] * per_prompt(FiniteDistribution(a.enumerate_distribution(x)),
                               FiniteDistribution(b.enumerate_distribution(x)));
  }
  return total;
}

}  // namespace

double conditional_divergence(const TabularPolicy& a, const TabularPolicy& b, double alpha) {
  return prompt_average(a, b, [alpha](const FiniteDistribution& p, const FiniteDistribution& q) {
    return renyi_divergence(p, q, alpha);
  });
}

double conditional_kl(const TabularPolicy& a, const TabularPolicy& b) {
  return prompt_average(a, b, [](const FiniteDistribution& p, const FiniteDistribution& q) { return kl(p, q); });
}

HolderTriple holder_triple(const FiniteDistribution& p_data, const FiniteDistribution& p_theta,
                           const FiniteDistribution& p_opponent, double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0) throw InputError("Hoelder triple needs alpha > 0 and alpha != 1");
  check_pair(p_data, p_opponent);
  check_pair(p_theta, p_opponent);
  check_pair(p_data, p_theta);
  check_pair(p_theta, p_data);
  std::vector<double> log_a;
  std::vector<double> log_b;
  std::vector<double> log_m;
  for (std::size_t i = 0; i < p_data.size(); ++i) {
    if (p_opponent[i] <= 0.0) continue;
    const double log_rho = std::log(p_theta[i]) - std::log(p_opponent[i]);
    if (p_data[i] > 0.0) {
      log_a.push_back(std::log(p_data[i]) + (alpha - 1.0) * log_rho);
      log_m.push_back(alpha * std::log(p_data[i]) + (1.0 - alpha) * std::log(p_opponent[i]));
    }
    log_b.push_back(std::log(p_opponent[i]) + alpha * log_rho);
  }
  return {std::exp(log_sum_exp(log_a)), std::exp(log_sum_exp(log_b)), std::exp(log_sum_exp(log_m))};
}

std::vector<double> finite_diff_gradient(const ScalarObjective& objective, std::span<const double> params,
                                         double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be > 0");
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = objective(x);
    x[i] = saved - h;
    const double down = objective(x);
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("objective not finite around coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace renyiplay
