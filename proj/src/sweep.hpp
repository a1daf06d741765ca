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

#ifndef RENYIPLAY_SWEEP_HPP
#define RENYIPLAY_SWEEP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace renyiplay {

struct SweepRun {
  std::uint64_t seed = 0;
  /// KL(p_data || theta_k), k = 0 .. T.
  std::vector<double> kl_by_iteration;
  std::vector<double> alpha_history;
  std::vector<double> gap_history;
};

struct SweepEntryResult {
  MethodSpec method;
  std::string label;
  std::vector<SweepRun> runs;
  std::vector<double> median_kl_by_iteration;
  double median_final_kl = 0.0;
};

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SweepEntryResult> entries;
};

/// Seed pairing: every entry sees run_seed = s and annotator_seed =
/// base.annotator_seed + s, hence the same annotator and dataset draws.
ExperimentConfig paired_config(const ExperimentConfig& base, const MethodSpec& method, std::uint64_t seed);

double median(std::vector<double> values);

using SweepProgress = std::function<void(const std::string& label, std::uint64_t seed)>;

SweepResult run_sweep(const ExperimentConfig& base, const SweepProgress& progress = {});

/// One row per entry: label, median KL per iteration, median final KL.
std::string sweep_summary_csv(const SweepResult& result);
/// One row per (entry, seed, iteration).
std::string sweep_detail_csv(const SweepResult& result);
Json sweep_report_json(const SweepResult& result);

}  // namespace renyiplay

#endif  // RENYIPLAY_SWEEP_HPP
