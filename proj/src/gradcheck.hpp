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

#ifndef RENYIPLAY_GRADCHECK_HPP
#define RENYIPLAY_GRADCHECK_HPP

#include <string>
#include <vector>

#include "config.hpp"

namespace renyiplay {

struct GradcheckCell {
  std::string method;  // "iris", "spin" or "sft"
  double alpha = 0.0;  // NaN for baselines
  std::string mode;    // "exact" or "mc"
  int instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;

  [[nodiscard]] std::string label() const;
};

struct GradcheckReport {
  std::vector<GradcheckCell> cells;
  double tolerance = 0.0;
  bool passed = false;
  /// Index of the cell with the largest error.
  std::size_t worst = 0;
};

/// ||analytic - numeric||_inf / max(||numeric||_inf, 1e-8).
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

/// Throws ConfigError for an empty grid or an unknown method/mode name.
/// With corrupt_gradient set, the analytic gradient is perturbed before the
/// comparison (negative control for the harness itself).
GradcheckReport run_gradcheck(const GradcheckSpec& spec, bool corrupt_gradient = false);

Json gradcheck_to_report_json(const GradcheckReport& report);

}  // namespace renyiplay

#endif  // RENYIPLAY_GRADCHECK_HPP
