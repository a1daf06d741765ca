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

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace renyiplay {

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
            throw ConfigError(field(key) + ": must be non-negative");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
      }
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
      if (!e.is_number()) throw ConfigError(field(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const Json& v = doc_.at(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of strings");
    std::vector<std::string> out;
    for (const Json& e : v) {
      if (!e.is_string()) throw ConfigError(field(key) + ": expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }
  }

 private:
  const Json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

ScheduleSpec schedule_from_json(const Json& doc, const std::string& path) {
  if (doc.is_number()) return ScheduleSpec::fixed(doc.get<double>());
  ObjectReader r(doc, path);
  const std::string kind = r.get<std::string>("kind", "gap_feedback");
  ScheduleSpec s;
  if (kind == "fixed") {
    s = ScheduleSpec::fixed(r.get<double>("alpha", 2.0));
  } else if (kind == "geometric") {
    s = ScheduleSpec::geometric(r.get<double>("alpha_max", 2.5), r.get<double>("alpha_min", 0.8),
                                r.get<int>("horizon", 4));
  } else if (kind == "gap_feedback") {
    s = ScheduleSpec::gap_feedback(r.get<double>("c", 0.5), r.get<double>("alpha_min", 0.5),
                                   r.get<double>("alpha_max", 3.0));
  } else {
    throw ConfigError(path + ".kind: unknown schedule '" + kind + "' (fixed, geometric, gap_feedback)");
  }
  r.finish();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return s;
}

Json schedule_to_json(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleSpec::Kind::kFixed: return {{"kind", "fixed"}, {"alpha", s.alpha}};
    case ScheduleSpec::Kind::kGeometric:
      return {{"kind", "geometric"}, {"alpha_max", s.alpha_max}, {"alpha_min", s.alpha_min}, {"horizon", s.horizon}};
    case ScheduleSpec::Kind::kGapFeedback:
      return {{"kind", "gap_feedback"}, {"c", s.gain}, {"alpha_min", s.alpha_min}, {"alpha_max", s.alpha_max}};
  }
  return {};
}

ProblemSpace space_from_json(const Json& doc) {
  ObjectReader r(doc, "space");
  ProblemSpace s;
  s.vocab_size = r.get<int>("vocab_size", 4);
  s.response_len = r.get<int>("response_len", 2);
  s.enumeration_cap = r.get<std::size_t>("enumeration_cap", kDefaultEnumerationCap);
  const bool has_names = r.has("prompts");
  const bool has_count = r.has("num_prompts");
  if (has_names && has_count) throw ConfigError("space: give either prompts or num_prompts, not both");
  if (has_names) {
    s.prompts = r.strings("prompts", {});
  } else {
    const auto count = r.get<std::size_t>("num_prompts", 3);
    for (std::size_t i = 0; i < count; ++i) s.prompts.push_back("p" + std::to_string(i));
  }
  if (r.has("prompt_probs")) {
    s.prompt_probs = r.numbers("prompt_probs", {});
  } else {
    s.prompt_probs.assign(s.prompts.size(), s.prompts.empty() ? 0.0 : 1.0 / static_cast<double>(s.prompts.size()));
  }
  r.finish();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("space: ") + e.what());
  }
  return s;
}

Json space_to_json(const ProblemSpace& s) {
  return {{"vocab_size", s.vocab_size},
          {"response_len", s.response_len},
          {"prompts", s.prompts},
          {"prompt_probs", s.prompt_probs},
          {"enumeration_cap", s.enumeration_cap}};
}

EstimationSpec estimation_from_json(const Json& doc) {
  EstimationSpec e;
  if (doc.is_string()) {
    const auto kind = doc.get<std::string>();
    if (kind == "exact") return e;
    if (kind == "mc") {
      e.mode = EstimationMode::kMonteCarlo;
      return e;
    }
    throw ConfigError("estimation: unknown mode '" + kind + "' (exact, mc)");
  }
  ObjectReader r(doc, "estimation");
  const std::string kind = r.get<std::string>("kind", "exact");
  if (kind == "exact") {
    const std::string source = r.get<std::string>("real_source", "annotator");
    if (source == "annotator") {
      e.real_source = EstimationSpec::RealSource::kAnnotator;
    } else if (source == "dataset") {
      e.real_source = EstimationSpec::RealSource::kDataset;
    } else {
      throw ConfigError("estimation.real_source: expected annotator or dataset, got '" + source + "'");
    }
  } else if (kind == "mc") {
    e.mode = EstimationMode::kMonteCarlo;
    e.samples_per_prompt = r.get<int>("samples_per_prompt", 1);
    if (e.samples_per_prompt < 1) throw ConfigError("estimation.samples_per_prompt: must be >= 1");
  } else {
    throw ConfigError("estimation.kind: unknown mode '" + kind + "' (exact, mc)");
  }
  r.finish();
  return e;
}

Json estimation_to_json(const EstimationSpec& e) {
  if (e.mode == EstimationMode::kMonteCarlo) return {{"kind", "mc"}, {"samples_per_prompt", e.samples_per_prompt}};
  return {{"kind", "exact"},
          {"real_source", e.real_source == EstimationSpec::RealSource::kAnnotator ? "annotator" : "dataset"}};
}

StepRule optimizer_from_json(const Json& doc) {
  ObjectReader r(doc, "optimizer");
  const std::string kind = r.get<std::string>("kind", "adaptive");
  StepRule s;
  if (kind == "plain") {
    s = StepRule::plain(r.get<double>("lr", 0.1));
  } else if (kind == "adaptive") {
    s = StepRule::adaptive(r.get<double>("lr", 0.01), r.get<double>("decay", 0.9), r.get<double>("eps", 1e-8));
  } else {
    throw ConfigError("optimizer.kind: unknown rule '" + kind + "' (plain, adaptive)");
  }
  r.finish();
  if (!(s.learning_rate > 0.0) || !std::isfinite(s.learning_rate)) throw ConfigError("optimizer.lr: must be > 0");
  if (!(s.decay >= 0.0 && s.decay < 1.0)) throw ConfigError("optimizer.decay: must lie in [0, 1)");
  if (!(s.epsilon > 0.0)) throw ConfigError("optimizer.eps: must be > 0");
  return s;
}

Json optimizer_to_json(const StepRule& s) {
  if (s.kind == StepRule::Kind::kPlain) return {{"kind", "plain"}, {"lr", s.learning_rate}};
  return {{"kind", "adaptive"}, {"lr", s.learning_rate}, {"decay", s.decay}, {"eps", s.epsilon}};
}

InitSpec init_from_json(const Json& doc) {
  ObjectReader r(doc, "init");
  InitSpec s;
  const std::string kind = r.get<std::string>("kind", "perturbed_annotator");
  if (kind == "zeros") {
    s.kind = InitSpec::Kind::kZeros;
  } else if (kind == "gaussian") {
    s.kind = InitSpec::Kind::kGaussian;
  } else if (kind == "perturbed_annotator") {
    s.kind = InitSpec::Kind::kPerturbedAnnotator;
  } else {
    throw ConfigError("init.kind: unknown init '" + kind + "' (zeros, gaussian, perturbed_annotator)");
  }
  s.stddev = r.get<double>("stddev", 1.0);
  if (r.has("seed") && !r.at("seed").is_null()) s.seed = r.get<std::uint64_t>("seed", 0);
  r.finish();
  if (!(s.stddev >= 0.0) || !std::isfinite(s.stddev)) throw ConfigError("init.stddev: must be >= 0");
  return s;
}

Json init_to_json(const InitSpec& s) {
  const char* kind = s.kind == InitSpec::Kind::kZeros      ? "zeros"
                     : s.kind == InitSpec::Kind::kGaussian ? "gaussian"
                                                           : "perturbed_annotator";
  Json out{{"kind", kind}, {"stddev", s.stddev}};
  out["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
  return out;
}

GradcheckSpec gradcheck_from_json(const Json& doc) {
  ObjectReader r(doc, "gradcheck");
  GradcheckSpec g;
  g.instances = r.get<int>("instances", g.instances);
  g.alphas = r.numbers("alphas", g.alphas);
  g.methods = r.strings("methods", g.methods);
  g.modes = r.strings("modes", g.modes);
  g.step = r.get<double>("h", g.step);
  g.tolerance = r.get<double>("tolerance", g.tolerance);
  g.batch_size = r.get<std::size_t>("batch_size", g.batch_size);
  g.seed = r.get<std::uint64_t>("seed", g.seed);
  g.vocab_size = r.get<int>("vocab_size", g.vocab_size);
  g.response_len = r.get<int>("response_len", g.response_len);
  g.num_prompts = r.get<std::size_t>("num_prompts", g.num_prompts);
  r.finish();
  return g;
}

Json gradcheck_to_json(const GradcheckSpec& g) {
  return {{"instances", g.instances}, {"alphas", g.alphas},         {"methods", g.methods},
          {"modes", g.modes},         {"h", g.step},                {"tolerance", g.tolerance},
          {"batch_size", g.batch_size}, {"seed", g.seed},           {"vocab_size", g.vocab_size},
          {"response_len", g.response_len}, {"num_prompts", g.num_prompts}};
}

SweepSpec sweep_from_json(const Json& doc, int iterations) {
  ObjectReader r(doc, "sweep");
  SweepSpec s;
  s.seeds = r.get<int>("seeds", s.seeds);
  s.first_seed = r.get<std::uint64_t>("first_seed", s.first_seed);
  if (r.has("entries")) {
    const Json& list = r.at("entries");
    if (!list.is_array()) throw ConfigError("sweep.entries: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "sweep.entries[" + std::to_string(i) + "]";
      const Json& e = list[i];
      const bool is_method = e.is_string() || (e.is_object() && e.contains("kind") && e["kind"].is_string() &&
                                               (e["kind"] == "iris" || e["kind"] == "spin" || e["kind"] == "sft"));
      if (is_method) {
        s.entries.push_back(method_from_json(e, path));
      } else {
        MethodSpec m;
        m.schedule = schedule_from_json(e, path);
        s.entries.push_back(m);
      }
    }
  } else {
    s.entries = default_sweep_entries(iterations);
  }
  r.finish();
  return s;
}

Json sweep_to_json(const SweepSpec& s) {
  Json entries = Json::array();
  for (const MethodSpec& m : s.entries) entries.push_back(method_to_json(m));
  return {{"seeds", s.seeds}, {"first_seed", s.first_seed}, {"entries", entries}};
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::kIris: return schedule.label();
    case Kind::kSpin: return "spin";
    case Kind::kSft: return "sft";
  }
  return "unknown";
}

Json method_to_json(const MethodSpec& method) {
  switch (method.kind) {
    case MethodSpec::Kind::kIris: return {{"kind", "iris"}, {"schedule", schedule_to_json(method.schedule)}};
    case MethodSpec::Kind::kSpin: return {{"kind", "spin"}};
    case MethodSpec::Kind::kSft: return {{"kind", "sft"}};
  }
  return {};
}

MethodSpec method_from_json(const Json& doc, const std::string& path) {
  MethodSpec m;
  std::string kind;
  if (doc.is_string()) {
    kind = doc.get<std::string>();
  } else {
    ObjectReader r(doc, path);
    kind = r.get<std::string>("kind", "iris");
    if (kind == "iris" && r.has("schedule")) m.schedule = schedule_from_json(r.at("schedule"), path + ".schedule");
    r.finish();
  }
  if (kind == "iris") {
    m.kind = MethodSpec::Kind::kIris;
  } else if (kind == "spin") {
    m.kind = MethodSpec::Kind::kSpin;
  } else if (kind == "sft") {
    m.kind = MethodSpec::Kind::kSft;
  } else {
    throw ConfigError(path + ".kind: unknown method '" + kind + "' (iris, spin, sft)");
  }
  return m;
}

std::vector<MethodSpec> default_sweep_entries(int iterations) {
  std::vector<MethodSpec> out;
  for (double a : {0.5, 1.5, 2.0}) {
    MethodSpec m;
    m.schedule = ScheduleSpec::fixed(a);
    out.push_back(m);
  }
  MethodSpec geo;
  geo.schedule = ScheduleSpec::geometric(2.5, 0.8, std::max(iterations, 1));
  out.push_back(geo);
  MethodSpec gap;
  gap.schedule = ScheduleSpec::gap_feedback(0.5, 0.5, 3.0);
  out.push_back(gap);
  return out;
}

void ExperimentConfig::validate() const {
  space.validate();
  if (dataset_size < 1) throw ConfigError("dataset_size: must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
  if (batch_size > dataset_size) throw ConfigError("batch_size: must not exceed dataset_size");
  if (iterations < 0) throw ConfigError("iterations: must be >= 0");
  if (epochs_per_iter < 1) throw ConfigError("epochs_per_iter: must be >= 1");
  if (!(annotator_stddev >= 0.0)) throw ConfigError("annotator_stddev: must be >= 0");
  if (method.kind == MethodSpec::Kind::kIris) method.schedule.validate();
  for (std::size_t i = 0; i < eval_alphas.size(); ++i) {
    if (!(eval_alphas[i] > 0.0) || !std::isfinite(eval_alphas[i])) {
      throw ConfigError("eval_alphas[" + std::to_string(i) + "]: must be > 0");
    }
    if (i > 0 && !(eval_alphas[i] > eval_alphas[i - 1])) {
      throw ConfigError("eval_alphas: must be strictly increasing");
    }
  }
  if (gradcheck.instances < 0) throw ConfigError("gradcheck.instances: must be >= 0");
  if (sweep.seeds < 1) throw ConfigError("sweep.seeds: must be >= 1");
}

ExperimentConfig config_from_json(const Json& doc) {
  ObjectReader r(doc, "");
  ExperimentConfig c;
  if (r.has("space")) c.space = space_from_json(r.at("space"));
  c.annotator_seed = r.get<std::uint64_t>("annotator_seed", c.annotator_seed);
  c.annotator_stddev = r.get<double>("annotator_stddev", c.annotator_stddev);
  c.dataset_size = r.get<std::size_t>("dataset_size", c.dataset_size);
  c.iterations = r.get<int>("iterations", c.iterations);
  c.epochs_per_iter = r.get<int>("epochs_per_iter", c.epochs_per_iter);
  c.batch_size = r.get<std::size_t>("batch_size", c.batch_size);
  if (r.has("method")) c.method = method_from_json(r.at("method"), "method");
  if (r.has("estimation")) c.estimation = estimation_from_json(r.at("estimation"));
  if (r.has("optimizer")) c.optimizer = optimizer_from_json(r.at("optimizer"));
  if (r.has("init")) c.init = init_from_json(r.at("init"));
  c.run_seed = r.get<std::uint64_t>("run_seed", c.run_seed);
  c.eval_alphas = r.numbers("eval_alphas", c.eval_alphas);
  c.freeze_synthetic = r.get<bool>("freeze_synthetic", c.freeze_synthetic);
  c.record_wall_time = r.get<bool>("record_wall_time", c.record_wall_time);
  if (r.has("gradcheck")) c.gradcheck = gradcheck_from_json(r.at("gradcheck"));
  c.sweep = sweep_from_json(r.has("sweep") ? r.at("sweep") : Json::object(), c.iterations);
  r.finish();
  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  return {{"space", space_to_json(c.space)},
          {"annotator_seed", c.annotator_seed},
          {"annotator_stddev", c.annotator_stddev},
          {"dataset_size", c.dataset_size},
          {"iterations", c.iterations},
          {"epochs_per_iter", c.epochs_per_iter},
          {"batch_size", c.batch_size},
          {"method", method_to_json(c.method)},
          {"estimation", estimation_to_json(c.estimation)},
          {"optimizer", optimizer_to_json(c.optimizer)},
          {"init", init_to_json(c.init)},
          {"run_seed", c.run_seed},
          {"eval_alphas", c.eval_alphas},
          {"freeze_synthetic", c.freeze_synthetic},
          {"record_wall_time", c.record_wall_time},
          {"gradcheck", gradcheck_to_json(c.gradcheck)},
          {"sweep", sweep_to_json(c.sweep)}};
}

namespace {

bool path_exists(const Json& doc, const std::vector<std::string>& parts) {
  const Json* node = &doc;
  for (const std::string& p : parts) {
    if (!node->is_object() || !node->contains(p)) return false;
    node = &(*node)[p];
  }
  return true;
}

}  // namespace

Json apply_overrides(Json doc, const std::vector<std::string>& overrides) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  const Json defaults = config_to_json(ExperimentConfig{});
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "': expected KEY=VALUE");
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
      if (part.empty()) throw ConfigError("override '" + item + "': empty path segment");
      parts.push_back(part);
    }
    if (!path_exists(doc, parts) && !path_exists(defaults, parts)) {
      throw ConfigError("override '" + key + "': no such config key");
    }
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json* node = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      Json& child = (*node)[parts[i]];
      if (child.is_null()) child = Json::object();
      if (!child.is_object()) throw ConfigError("override '" + key + "': " + parts[i] + " is not an object");
      node = &child;
    }
    (*node)[parts.back()] = std::move(value);
  }
  return doc;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string alpha_column_suffix(double alpha) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, alpha);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  for (char& ch : s) {
    if (ch == '.') ch = '_';
  }
  return s;
}

}  // namespace renyiplay
