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

#ifndef RENYIPLAY_DIVERGENCE_HPP
#define RENYIPLAY_DIVERGENCE_HPP

#include <functional>
#include <span>
#include <vector>

#include "policy.hpp"

namespace renyiplay {

/// Orders closer than this to 1 are evaluated as KL inside the oracle.
inline constexpr double kOracleOrderTolerance = 1e-6;

/// Probability vector over a finite outcome set. Validated on construction:
/// entries non-negative and finite, total within 1e-10 of 1.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<double> probs);

  [[nodiscard]] std::span<const double> probs() const { return probs_; }
  [[nodiscard]] std::size_t size() const { return probs_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

/// D_alpha(p||q) = log(sum p^alpha q^(1-alpha)) / (alpha - 1), in nats.
/// Falls back to kl(p, q) when |alpha - 1| < kOracleOrderTolerance.
/// Throws DomainError when q vanishes on an outcome where p does not.
double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q, double alpha);

double kl(const FiniteDistribution& p, const FiniteDistribution& q);
double chi2(const FiniteDistribution& p, const FiniteDistribution& q);
double bhattacharyya(const FiniteDistribution& p, const FiniteDistribution& q);
double hellinger_sq(const FiniteDistribution& p, const FiniteDistribution& q);

/// Prompt-averaged divergence: sum_x q(x) D_alpha(a(.|x) || b(.|x)).
double conditional_divergence(const TabularPolicy& a, const TabularPolicy& b, double alpha);
/// Prompt-averaged KL(a || b).
double conditional_kl(const TabularPolicy& a, const TabularPolicy& b);

/// Quantities of the Hoelder argument behind the global-minimum property.
/// With rho = p_theta / p_opponent:
///   a = E_data[rho^(alpha-1)], b = E_opponent[rho^alpha],
///   m = sum p_data^alpha p_opponent^(1-alpha).
/// For alpha > 1 they satisfy a^alpha <= m * b^(alpha-1). For 0 < alpha < 1
/// the reverse Hoelder inequality gives a^alpha >= m * b^(alpha-1) instead.
struct HolderTriple {
  double a = 0.0;
  double b = 0.0;
  double m = 0.0;
};

HolderTriple holder_triple(const FiniteDistribution& p_data, const FiniteDistribution& p_theta,
                           const FiniteDistribution& p_opponent, double alpha);

using ScalarObjective = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
/// coordinate. Throws NumericError naming the coordinate when an
/// evaluation is not finite.
std::vector<double> finite_diff_gradient(const ScalarObjective& objective, std::span<const double> params,
                                         double h);

}  // namespace renyiplay

#endif  // RENYIPLAY_DIVERGENCE_HPP
