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

#include "checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace renyiplay {

Json policy_to_json(const TabularPolicy& policy, const std::string& config_hash) {
  const ProblemSpace& s = policy.space();
  const auto V = static_cast<std::size_t>(s.vocab_size);
  const auto logits = policy.logits();
  Json nested = Json::array();
  std::size_t k = 0;
  for (std::size_t x = 0; x < s.num_prompts(); ++x) {
    Json by_position = Json::array();
    std::size_t prefixes = 1;
    for (int pos = 0; pos < s.response_len; ++pos) {
      Json by_prefix = Json::array();
      for (std::size_t p = 0; p < prefixes; ++p) {
        Json row = Json::array();
        for (std::size_t v = 0; v < V; ++v) row.push_back(logits[k++]);
        by_prefix.push_back(std::move(row));
      }
      by_position.push_back(std::move(by_prefix));
      prefixes *= V;
    }
    nested.push_back(std::move(by_position));
  }
  return {{"format_version", kCheckpointFormatVersion},
          {"space",
           {{"V", s.vocab_size},
            {"L", s.response_len},
            {"prompts", s.prompts},
            {"q", s.prompt_probs},
            {"enumeration_cap", s.enumeration_cap}}},
          {"logits", std::move(nested)},
          {"config_hash", config_hash}};
}

TabularPolicy policy_from_json(const Json& doc) {
  try {
    if (!doc.is_object()) throw InputError("checkpoint: expected a JSON object");
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw InputError("checkpoint: unsupported format_version " + std::to_string(version));
    }
    const Json& js = doc.at("space");
    ProblemSpace space;
    space.vocab_size = js.at("V").get<int>();
    space.response_len = js.at("L").get<int>();
    space.prompts = js.at("prompts").get<std::vector<std::string>>();
    space.prompt_probs = js.at("q").get<std::vector<double>>();
    if (js.contains("enumeration_cap")) space.enumeration_cap = js["enumeration_cap"].get<std::size_t>();
    try {
      space.validate();
    } catch (const ConfigError& e) {
      throw InputError(std::string("checkpoint space: ") + e.what());
    }
    const auto V = static_cast<std::size_t>(space.vocab_size);
    const Json& nested = doc.at("logits");
    if (!nested.is_array() || nested.size() != space.num_prompts()) {
      throw InputError("checkpoint: logits must have one entry per prompt");
    }
    std::vector<double> flat;
    flat.reserve(space.num_prompts() * space.contexts_per_prompt() * V);
    for (std::size_t x = 0; x < nested.size(); ++x) {
      const Json& by_position = nested[x];
      if (!by_position.is_array() || by_position.size() != static_cast<std::size_t>(space.response_len)) {
        throw InputError("checkpoint: logits[" + std::to_string(x) + "] must have L entries");
      }
      std::size_t prefixes = 1;
      for (std::size_t pos = 0; pos < by_position.size(); ++pos) {
        const Json& by_prefix = by_position[pos];
        if (!by_prefix.is_array() || by_prefix.size() != prefixes) {
          throw InputError("checkpoint: logits[" + std::to_string(x) + "][" + std::to_string(pos) + "] must have " +
                           std::to_string(prefixes) + " prefixes");
        }
        for (const Json& row : by_prefix) {
          if (!row.is_array() || row.size() != V) throw InputError("checkpoint: every logit row must have V entries");
          for (const Json& v : row) {
            if (!v.is_number()) throw InputError("checkpoint: logits must be numbers");
            flat.push_back(v.get<double>());
          }
        }
        prefixes *= V;
      }
    }
    return TabularPolicy(std::move(space), std::move(flat));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(); }

Json finite_array(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(finite_or_null(v));
  return out;
}

}  // namespace

Json loss_breakdown_to_json(const LossBreakdown& loss) {
  return {{"total", finite_or_null(loss.total)},
          {"term_real", finite_or_null(loss.term_real)},
          {"term_syn", finite_or_null(loss.term_syn)},
          {"rewards_real", finite_array(loss.rewards_real)},
          {"rewards_syn", finite_array(loss.rewards_syn)},
          {"weights_real", finite_array(loss.weights_real)},
          {"weights_syn", finite_array(loss.weights_syn)},
          {"mode", std::string(mode_name(loss.mode))},
          {"alpha_used", finite_or_null(loss.alpha_used)},
          {"mean_reward_real", finite_or_null(loss.mean_reward_real)},
          {"mean_reward_syn", finite_or_null(loss.mean_reward_syn)}};
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_policy(const std::filesystem::path& path, const TabularPolicy& policy, const std::string& config_hash) {
  write_text_file(path, dump_json(policy_to_json(policy, config_hash)));
}

TabularPolicy load_policy(const std::filesystem::path& path) {
  const Json doc = Json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) throw InputError("checkpoint " + path.string() + ": not valid JSON");
  return policy_from_json(doc);
}

}  // namespace renyiplay
