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

#ifndef RENYIPLAY_CHECKPOINT_HPP
#define RENYIPLAY_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include "config.hpp"
#include "loss.hpp"
#include "policy.hpp"

namespace renyiplay {

inline constexpr int kCheckpointFormatVersion = 1;

/// Logits are nested as [prompt][position][prefix][token], prefixes in
/// lexicographic order.
Json policy_to_json(const TabularPolicy& policy, const std::string& config_hash);
/// Throws InputError on a malformed document.
TabularPolicy policy_from_json(const Json& doc);

/// Mirrors the struct field by field; non-finite numbers become null.
Json loss_breakdown_to_json(const LossBreakdown& loss);

/// Doubles are printed as shortest round-trip decimals, so load(save(p))
/// reproduces every logit bit for bit.
std::string dump_json(const Json& doc);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

void save_policy(const std::filesystem::path& path, const TabularPolicy& policy, const std::string& config_hash);
TabularPolicy load_policy(const std::filesystem::path& path);

}  // namespace renyiplay

#endif  // RENYIPLAY_CHECKPOINT_HPP
