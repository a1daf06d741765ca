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

#ifndef RENYIPLAY_CONFIG_HPP
#define RENYIPLAY_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loss.hpp"
#include "policy.hpp"
#include "schedule.hpp"

namespace renyiplay {

using Json = nlohmann::json;

struct MethodSpec {
  enum class Kind { kIris, kSpin, kSft };
  Kind kind = Kind::kIris;
  ScheduleSpec schedule = ScheduleSpec::gap_feedback(0.5, 0.5, 3.0);

  [[nodiscard]] std::string label() const;
  bool operator==(const MethodSpec&) const = default;
};

struct EstimationSpec {
  enum class RealSource { kAnnotator, kDataset };
  EstimationMode mode = EstimationMode::kExact;
  /// Exact mode: expectation for the real-data term.
  RealSource real_source = RealSource::kAnnotator;
  /// Monte-Carlo mode: synthetic responses drawn per annotated record.
  int samples_per_prompt = 1;
  bool operator==(const EstimationSpec&) const = default;
};

struct InitSpec {
  enum class Kind { kZeros, kGaussian, kPerturbedAnnotator };
  Kind kind = Kind::kPerturbedAnnotator;
  double stddev = 1.0;
  /// Derived from run_seed when absent.
  std::optional<std::uint64_t> seed;
  bool operator==(const InitSpec&) const = default;
};

struct GradcheckSpec {
  int instances = 100;
  std::vector<double> alphas{0.5, 1.5, 2.0, 3.0};
  std::vector<std::string> methods{"iris", "spin", "sft"};
  std::vector<std::string> modes{"exact", "mc"};
  double step = 1e-5;
  double tolerance = 1e-5;
  std::size_t batch_size = 8;
  std::uint64_t seed = 2024;
  int vocab_size = 3;
  int response_len = 2;
  std::size_t num_prompts = 2;
  bool operator==(const GradcheckSpec&) const = default;
};

struct SweepSpec {
  int seeds = 20;
  std::uint64_t first_seed = 1;
  /// Each entry is an IRIS schedule or a baseline method.
  std::vector<MethodSpec> entries;
  bool operator==(const SweepSpec&) const = default;
};

/// Declarative description of a self-play run.
struct ExperimentConfig {
  ProblemSpace space = ProblemSpace::uniform(4, 2, 3);
  std::uint64_t annotator_seed = 1234;
  double annotator_stddev = 1.0;
  std::size_t dataset_size = 512;
  int iterations = 4;
  int epochs_per_iter = 2;
  std::size_t batch_size = 64;
  MethodSpec method;
  EstimationSpec estimation;
  StepRule optimizer = StepRule::adaptive(0.01, 0.9, 1e-8);
  InitSpec init;
  std::uint64_t run_seed = 1;
  std::vector<double> eval_alphas{0.5, 2.0};
  /// Keep iteration 0's opponent and synthetic data for the whole run.
  bool freeze_synthetic = false;
  /// Off by default so that metrics files are byte-reproducible.
  bool record_wall_time = false;
  GradcheckSpec gradcheck;
  SweepSpec sweep;

  /// Throws ConfigError with the offending field path.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// The five ablation schedules: fixed 0.5 / 1.5 / 2.0, geometric from 2.5
/// to 0.8 over `iterations`, gap feedback c = 0.5 on [0.5, 3.0].
std::vector<MethodSpec> default_sweep_entries(int iterations);

/// Missing fields take defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const Json& doc);
/// Canonical, fully populated form. config_from_json(config_to_json(c)) == c.
Json config_to_json(const ExperimentConfig& config);

Json method_to_json(const MethodSpec& method);
MethodSpec method_from_json(const Json& doc, const std::string& path);

/// Applies KEY=VALUE overrides with dotted keys. VALUE is parsed as JSON
/// when possible and taken as a string otherwise. Keys must exist in
/// `doc` or in the canonical default config.
Json apply_overrides(Json doc, const std::vector<std::string>& overrides);

/// Hex FNV-1a digest of the canonical config dump.
std::string config_hash(const ExperimentConfig& config);

/// Canonical decimal rendering of an order for column names: 0.5 -> "0_5",
/// 2 -> "2_0".
std::string alpha_column_suffix(double alpha);

}  // namespace renyiplay

#endif  // RENYIPLAY_CONFIG_HPP
