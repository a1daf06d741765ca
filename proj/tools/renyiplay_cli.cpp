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

// Command-line front end. Everything goes through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "renyiplay/renyiplay.h"

namespace {

using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int exit_code(rp_status st) {
  switch (st) {
    case RP_OK: return kExitOk;
    case RP_ERR_CHECK: return kExitCheck;
    case RP_ERR_NUMERIC: return kExitNumeric;
    default: return kExitConfig;
  }
}

int report_failure(rp_status st) {
  std::fprintf(stderr, "error: %s\n", rp_last_error());
  return exit_code(st);
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { rp_string_free(p); }
  [[nodiscard]] std::string str() const { return p ? p : ""; }
};

struct OwnedPolicy {
  rp_policy* p = nullptr;
  ~OwnedPolicy() { rp_policy_destroy(p); }
};

struct Common {
  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("--config", c.config_path, "JSON config file (defaults apply when omitted)");
  if (with_out) {
    cmd->add_option("--out", c.out_dir, "output directory")->required();
    cmd->add_flag("--force", c.force, "overwrite a non-empty output directory");
  }
  cmd->add_option("--override", c.overrides, "KEY=VALUE applied over the config (repeatable)");
  cmd->add_option("--seed", c.seed, "shorthand for --override run_seed=N");
}

// Reads the config file, applies overrides and returns the canonical
// effective config, or a status on failure.
rp_status resolve_config(const Common& c, std::string& effective) {
  std::string text = "{}";
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "error: cannot read config %s\n", c.config_path.c_str());
      return RP_ERR_CONFIG;
    }
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::vector<std::string> items = c.overrides;
  if (c.seed) items.push_back("run_seed=" + std::to_string(*c.seed));
  std::vector<const char*> ptrs;
  for (const std::string& s : items) ptrs.push_back(s.c_str());
  OwnedString out;
  const rp_status st = rp_config_resolve(text.c_str(), ptrs.data(), ptrs.size(), &out.p);
  if (st == RP_OK) effective = out.str();
  return st;
}

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_run(const Common& c) {
  std::string cfg;
  if (rp_status st = resolve_config(c, cfg); st != RP_OK) return report_failure(st);
  OwnedString report;
  const rp_status st = rp_run(cfg.c_str(), c.out_dir.c_str(), c.force ? 1 : 0, &report.p);
  if (st != RP_OK) {
    if (st == RP_ERR_NUMERIC) std::fprintf(stderr, "diagnostic written to %s/diagnostic.json\n", c.out_dir.c_str());
    return report_failure(st);
  }
  const Json doc = Json::parse(report.str());
  std::printf("final_kl %s\n", fmt12(doc["final_kl"].get<double>()).c_str());
  std::printf("wrote %s\n", c.out_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const Common& c) {
  std::string cfg;
  if (rp_status st = resolve_config(c, cfg); st != RP_OK) return report_failure(st);
  OwnedString report;
  const rp_status st = rp_sweep(cfg.c_str(), c.out_dir.c_str(), c.force ? 1 : 0, &report.p);
  if (st != RP_OK) return report_failure(st);
  const Json doc = Json::parse(report.str());
  for (const Json& e : doc["entries"]) {
    std::printf("%-16s median_final_kl %s\n", e["label"].get<std::string>().c_str(),
                fmt12(e["median_final_kl"].get<double>()).c_str());
  }
  std::printf("wrote %s/sweep.csv\n", c.out_dir.c_str());
  return kExitOk;
}

int cmd_gradcheck(const Common& c, bool corrupt) {
  std::string cfg;
  if (rp_status st = resolve_config(c, cfg); st != RP_OK) return report_failure(st);
  OwnedString report;
  int passed = 0;
  const rp_status st = rp_gradcheck(cfg.c_str(), corrupt ? 1 : 0, &report.p, &passed);
  if (st != RP_OK && st != RP_ERR_CHECK) return report_failure(st);
  const Json doc = Json::parse(report.str());
  for (const Json& cell : doc["cells"]) {
    std::printf("%-24s instances %4d  max_rel_error %.3e  %s\n", cell["cell"].get<std::string>().c_str(),
                cell["instances"].get<int>(), cell["max_rel_error"].get<double>(),
                cell["passed"].get<bool>() ? "ok" : "FAIL");
  }
  if (!passed) {
    std::printf("worst cell: %s (tolerance %.1e)\n", doc["worst_cell"].get<std::string>().c_str(),
                doc["tolerance"].get<double>());
    return kExitCheck;
  }
  std::printf("all cells within %.1e\n", doc["tolerance"].get<double>());
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint) {
  std::string cfg;
  if (rp_status st = resolve_config(c, cfg); st != RP_OK) return report_failure(st);
  OwnedPolicy policy;
  if (rp_status st = rp_policy_load(checkpoint.c_str(), &policy.p); st != RP_OK) return report_failure(st);
  OwnedString table;
  if (rp_status st = rp_evaluate(cfg.c_str(), policy.p, &table.p); st != RP_OK) return report_failure(st);
  const Json doc = Json::parse(table.str());
  std::string header = "prompt";
  for (const Json& col : doc["columns"]) header += "," + col.get<std::string>();
  std::printf("%s\n", header.c_str());
  for (const Json& row : doc["rows"]) {
    std::string line = row["prompt"].get<std::string>();
    for (const Json& v : row["values"]) line += "," + fmt12(v.get<double>());
    std::printf("%s\n", line.c_str());
  }
  return kExitOk;
}

std::optional<std::vector<double>> parse_vector(const Json& v) {
  if (!v.is_array() || v.empty()) return std::nullopt;
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) return std::nullopt;
    out.push_back(e.get<double>());
  }
  return out;
}

struct OracleArgs {
  std::string p;
  std::string q;
  std::vector<double> alphas;
  int digits = 6;
};

int cmd_oracle(const OracleArgs& a) {
  Json input = Json::object();
  if (a.p.empty() && a.q.empty()) {
    const std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    input = Json::parse(text, nullptr, false);
    if (input.is_discarded() || !input.is_object()) {
      std::fprintf(stderr, "error: stdin must hold {\"p\": [...], \"q\": [...], \"alphas\": [...]}\n");
      return kExitConfig;
    }
  } else {
    input["p"] = Json::parse(a.p, nullptr, false);
    input["q"] = Json::parse(a.q, nullptr, false);
  }
  const auto p = parse_vector(input.value("p", Json()));
  const auto q = parse_vector(input.value("q", Json()));
  if (!p || !q) {
    std::fprintf(stderr, "error: p and q must be non-empty JSON arrays of numbers\n");
    return kExitConfig;
  }
  if (p->size() != q->size()) {
    std::fprintf(stderr, "error: p has %zu entries but q has %zu\n", p->size(), q->size());
    return kExitConfig;
  }
  std::vector<double> alphas = a.alphas;
  if (alphas.empty() && input.contains("alphas")) {
    const auto parsed = parse_vector(input["alphas"]);
    if (!parsed) {
      std::fprintf(stderr, "error: alphas must be a JSON array of numbers\n");
      return kExitConfig;
    }
    alphas = *parsed;
  }
  std::vector<std::pair<std::string, double>> lines;
  for (double alpha : alphas) {
    double v = 0.0;
    if (rp_status st = rp_divergence("renyi", p->data(), q->data(), p->size(), alpha, &v); st != RP_OK) {
      return report_failure(st);
    }
    char label[64];
    std::snprintf(label, sizeof label, "renyi[alpha=%g]", alpha);
    lines.emplace_back(label, v);
  }
  for (const char* kind : {"kl", "chi2", "bhattacharyya", "hellinger_sq"}) {
    double v = 0.0;
    if (rp_status st = rp_divergence(kind, p->data(), q->data(), p->size(), 0.0, &v); st != RP_OK) {
      return report_failure(st);
    }
    lines.emplace_back(kind, v);
  }
  for (const auto& [label, v] : lines) std::printf("%-20s %.*f\n", label.c_str(), a.digits, v);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renyi-order self-play fine-tuning on tabular policies"};
  app.require_subcommand(1);

  Common run_opts;
  CLI::App* run = app.add_subcommand("run", "train and write metrics, checkpoints and a report");
  add_common(run, run_opts, true);

  Common sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "paired-seed comparison over sweep.entries");
  add_common(sweep, sweep_opts, true);

  Common grad_opts;
  bool corrupt = false;
  CLI::App* grad = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
  add_common(grad, grad_opts, false);
  grad->add_flag("--corrupt-gradient", corrupt)->group("");

  Common eval_opts;
  std::string checkpoint;
  CLI::App* eval = app.add_subcommand("eval", "divergences of a checkpoint to the configured annotator");
  add_common(eval, eval_opts, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "divergences between two distributions (flags or stdin JSON)");
  oracle->add_option("--p", oracle_args.p, "JSON vector");
  oracle->add_option("--q", oracle_args.q, "JSON vector");
  oracle->add_option("--alpha", oracle_args.alphas, "Renyi order (repeatable)");
  oracle->add_option("--digits", oracle_args.digits, "digits after the decimal point")->check(CLI::Range(0, 17));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(run_opts);
  if (sweep->parsed()) return cmd_sweep(sweep_opts);
  if (grad->parsed()) return cmd_gradcheck(grad_opts, corrupt);
  if (eval->parsed()) return cmd_eval(eval_opts, checkpoint);
  return cmd_oracle(oracle_args);
}
