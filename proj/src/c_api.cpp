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

#include "renyiplay/renyiplay.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "artifacts.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "divergence.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "gradcheck.hpp"

struct rp_policy {
  renyiplay::TabularPolicy policy;
};

namespace {

using namespace renyiplay;

thread_local std::string g_last_error;

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rp_status fail(rp_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs body, translating exceptions into status codes.
template <typename F>
rp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return RP_OK;
  } catch (const NumericError& e) {
    return fail(RP_ERR_NUMERIC, e.what());
  } catch (const Error& e) {
    return fail(static_cast<rp_status>(static_cast<int>(e.kind())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(RP_ERR_CONFIG, std::string("json: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(RP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RP_ERR_INTERNAL, "unknown error");
  }
}

Json parse_json(const char* text, const char* what) {
  if (!text) throw ConfigError(std::string(what) + ": null input");
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(std::string(what) + ": not valid JSON");
  return doc;
}

ExperimentConfig parse_config(const char* text) { return config_from_json(parse_json(text, "config")); }

}  // namespace

extern "C" {

const char* rp_last_error(void) { return g_last_error.c_str(); }

const char* rp_version(void) { return "0.1.0"; }

void rp_string_free(char* s) { std::free(s); }

rp_status rp_policy_create(const char* space_json, int init, double stddev, uint64_t seed, rp_policy** out) {
  if (!out) return fail(RP_ERR_INPUT, "out is null");
  return guarded([&] {
    Json doc = Json::object();
    doc["space"] = parse_json(space_json, "space");
    const ExperimentConfig c = config_from_json(doc);
    PolicyInit pi;
    if (init == 0) {
      pi = PolicyInit::zeros();
    } else if (init == 1) {
      pi = PolicyInit::gaussian(stddev, seed);
    } else {
      throw ConfigError("init: expected 0 (zeros) or 1 (gaussian)");
    }
    *out = new rp_policy{TabularPolicy(c.space, pi)};
  });
}

rp_status rp_policy_from_json(const char* checkpoint_json, rp_policy** out) {
  if (!out) return fail(RP_ERR_INPUT, "out is null");
  return guarded([&] {
    const Json doc = Json::parse(checkpoint_json ? checkpoint_json : "", nullptr, false);
    if (doc.is_discarded()) throw InputError("checkpoint: not valid JSON");
    *out = new rp_policy{policy_from_json(doc)};
  });
}

rp_status rp_policy_load(const char* path, rp_policy** out) {
  if (!out || !path) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] { *out = new rp_policy{load_policy(path)}; });
}

rp_status rp_policy_save(const rp_policy* policy, const char* path) {
  if (!policy || !path) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] { save_policy(path, policy->policy, ""); });
}

rp_status rp_policy_to_json(const rp_policy* policy, char** out) {
  if (!policy || !out) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] { *out = copy_out(dump_json(policy_to_json(policy->policy, ""))); });
}

void rp_policy_destroy(rp_policy* policy) { delete policy; }

rp_status rp_policy_shape(const rp_policy* policy, int* vocab_size, int* response_len, size_t* num_prompts,
                          size_t* parameter_count) {
  if (!policy) return fail(RP_ERR_INPUT, "policy is null");
  const ProblemSpace& s = policy->policy.space();
  if (vocab_size) *vocab_size = s.vocab_size;
  if (response_len) *response_len = s.response_len;
  if (num_prompts) *num_prompts = s.num_prompts();
  if (parameter_count) *parameter_count = policy->policy.parameter_count();
  return RP_OK;
}

rp_status rp_policy_log_prob(const rp_policy* policy, size_t prompt, const int* response, size_t len, double* out) {
  if (!policy || !out || (!response && len > 0)) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] { *out = policy->policy.log_prob(prompt, std::span<const int>(response, len)); });
}

rp_status rp_policy_enumerate(const rp_policy* policy, size_t prompt, double* out, size_t capacity, size_t* written) {
  if (!policy) return fail(RP_ERR_INPUT, "policy is null");
  return guarded([&] {
    const std::vector<double> probs = policy->policy.enumerate_distribution(prompt);
    if (written) *written = probs.size();
    if (capacity < probs.size() || !out) throw InputError("output buffer needs " + std::to_string(probs.size()) + " entries");
    std::copy(probs.begin(), probs.end(), out);
  });
}

rp_status rp_policy_sample(const rp_policy* policy, size_t prompt, uint64_t seed, size_t n, int* out, size_t capacity) {
  if (!policy || !out) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] {
    const auto L = static_cast<std::size_t>(policy->policy.space().response_len);
    if (capacity < n * L) throw InputError("output buffer needs " + std::to_string(n * L) + " entries");
    Rng rng = make_stream(seed, 0);
    const std::vector<Response> rs = policy->policy.sample(prompt, rng, n);
    for (std::size_t i = 0; i < rs.size(); ++i) std::copy(rs[i].begin(), rs[i].end(), out + i * L);
  });
}

rp_status rp_divergence(const char* kind, const double* p, const double* q, size_t n, double alpha, double* out) {
  if (!kind || !p || !q || !out) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] {
    const FiniteDistribution P(std::vector<double>(p, p + n));
    const FiniteDistribution Q(std::vector<double>(q, q + n));
    const std::string k(kind);
    if (k == "renyi") {
      *out = renyi_divergence(P, Q, alpha);
    } else if (k == "kl") {
      *out = kl(P, Q);
    } else if (k == "chi2") {
      *out = chi2(P, Q);
    } else if (k == "bhattacharyya") {
      *out = bhattacharyya(P, Q);
    } else if (k == "hellinger_sq") {
      *out = hellinger_sq(P, Q);
    } else {
      throw InputError("unknown divergence '" + k + "'");
    }
  });
}

rp_status rp_config_resolve(const char* config_json, const char* const* overrides, size_t n_overrides,
                            char** effective_json) {
  if (!effective_json) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] {
    std::vector<std::string> items;
    for (size_t i = 0; i < n_overrides; ++i) items.emplace_back(overrides[i]);
    const Json doc = apply_overrides(parse_json(config_json, "config"), items);
    const ExperimentConfig c = config_from_json(doc);
    c.validate();
    *effective_json = copy_out(dump_json(config_to_json(c)));
  });
}

rp_status rp_annotator_create(const char* config_json, rp_policy** out) {
  if (!out) return fail(RP_ERR_INPUT, "out is null");
  return guarded([&] {
    const ExperimentConfig c = parse_config(config_json);
    c.validate();
    *out = new rp_policy{make_annotator(c)};
  });
}

rp_status rp_evaluate(const char* config_json, const rp_policy* policy, char** table_json) {
  if (!policy || !table_json) return fail(RP_ERR_INPUT, "null argument");
  return guarded([&] {
    const ExperimentConfig c = parse_config(config_json);
    c.validate();
    const TabularPolicy annotator = make_annotator(c);
    const DivergenceTable t = evaluate_checkpoint(policy->policy, annotator, c.eval_alphas);
    // Flat rows in eval_alphas order, ready for printing.
    Json columns = Json::array({"kl_to_data"});
    for (double a : c.eval_alphas) columns.push_back("renyi_" + alpha_column_suffix(a));
    Json rows = Json::array();
    for (std::size_t x = 0; x < c.space.num_prompts(); ++x) {
      Json values = Json::array({t.kl_per_prompt[x]});
      for (double v : t.renyi_per_prompt[x]) values.push_back(v);
      rows.push_back({{"prompt", c.space.prompts[x]}, {"values", values}});
    }
    Json values = Json::array({t.kl});
    for (double v : t.renyi) values.push_back(v);
    rows.push_back({{"prompt", "all"}, {"values", values}});
    const Json doc = {{"alphas", c.eval_alphas}, {"columns", columns}, {"rows", rows}};
    *table_json = copy_out(dump_json(doc));
  });
}

rp_status rp_run(const char* config_json, const char* out_dir, int force, char** report_json) {
  if (!out_dir) return fail(RP_ERR_INPUT, "out_dir is null");
  return guarded([&] {
    const Json report = run_to_directory(parse_config(config_json), out_dir, force != 0);
    if (report_json) *report_json = copy_out(dump_json(report));
  });
}

rp_status rp_sweep(const char* config_json, const char* out_dir, int force, char** report_json) {
  if (!out_dir) return fail(RP_ERR_INPUT, "out_dir is null");
  return guarded([&] {
    const Json report = sweep_to_directory(parse_config(config_json), out_dir, force != 0);
    if (report_json) *report_json = copy_out(dump_json(report));
  });
}

rp_status rp_gradcheck(const char* config_json, int corrupt, char** report_json, int* passed) {
  rp_status st = guarded([&] {
    const ExperimentConfig c = parse_config(config_json);
    const GradcheckReport report = run_gradcheck(c.gradcheck, corrupt != 0);
    if (passed) *passed = report.passed ? 1 : 0;
    if (report_json) *report_json = copy_out(dump_json(gradcheck_to_report_json(report)));
    if (!report.passed) g_last_error = "gradcheck failed: worst cell " + report.cells[report.worst].label();
  });
  if (st == RP_OK && passed && *passed == 0) return RP_ERR_CHECK;
  return st;
}

}  // extern "C"
