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

#ifndef RENYIPLAY_ARTIFACTS_HPP
#define RENYIPLAY_ARTIFACTS_HPP

#include <filesystem>

#include "config.hpp"
#include "engine.hpp"

namespace renyiplay {

/// Creates dir if absent. A non-empty existing dir is a ConfigError unless
/// force is set, in which case its contents are removed first.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

Json divergence_table_json(const DivergenceTable& table, const std::vector<std::string>& prompts);

/// Runs the experiment and writes effective_config.json, metrics.csv,
/// checkpoints/iter_k.json and report.json under dir. On a numeric abort a
/// diagnostic.json is written and the NumericError is rethrown.
Json run_to_directory(const ExperimentConfig& config, const std::filesystem::path& dir, bool force);

/// Sweep over config.sweep; writes effective_config.json, sweep.csv,
/// sweep_seeds.csv and report.json.
Json sweep_to_directory(const ExperimentConfig& config, const std::filesystem::path& dir, bool force);

}  // namespace renyiplay

#endif  // RENYIPLAY_ARTIFACTS_HPP
