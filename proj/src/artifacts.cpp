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

#include "artifacts.hpp"

#include <cmath>
#include <fstream>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "sweep.hpp"

namespace renyiplay {

namespace fs = std::filesystem;

void prepare_output_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw ConfigError("--out: " + dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) {
      if (!force) throw ConfigError("--out: " + dir.string() + " is not empty (pass --force to overwrite)");
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

Json divergence_table_json(const DivergenceTable& table, const std::vector<std::string>& prompts) {
  Json renyi = Json::object();
  for (std::size_t a = 0; a < table.alphas.size(); ++a) renyi[alpha_column_suffix(table.alphas[a])] = table.renyi[a];
  Json per_prompt = Json::array();
  for (std::size_t x = 0; x < table.kl_per_prompt.size(); ++x) {
    Json r = Json::object();
    for (std::size_t a = 0; a < table.alphas.size(); ++a) {
      r[alpha_column_suffix(table.alphas[a])] = table.renyi_per_prompt[x][a];
    }
    per_prompt.push_back({{"prompt", prompts[x]}, {"kl", table.kl_per_prompt[x]}, {"renyi", r}});
  }
  return {{"kl", table.kl}, {"renyi", renyi}, {"per_prompt", per_prompt}};
}

namespace {

Json nan_to_null(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(std::isfinite(v) ? Json(v) : Json());
  return out;
}

}  // namespace

Json run_to_directory(const ExperimentConfig& config, const fs::path& dir, bool force) {
  config.validate();
  prepare_output_dir(dir, force);
  const std::string hash = config_hash(config);
  write_text_file(dir / "effective_config.json", dump_json(config_to_json(config)));
  fs::create_directories(dir / "checkpoints");

  std::ofstream metrics(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!metrics) throw IoError("cannot open " + (dir / "metrics.csv").string());
  metrics << metrics_header(config.eval_alphas) << "\n";

  RunObserver observer;
  observer.on_record = [&](const MetricsRecord& r) { metrics << format_metrics_row(r) << "\n"; };
  observer.on_checkpoint = [&](int k, const TabularPolicy& p) {
    save_policy(dir / "checkpoints" / ("iter_" + std::to_string(k) + ".json"), p, hash);
  };

  RunResult result{make_annotator(config), {}, {}, {}, {}, {}, 0};
  try {
    result = run_selfplay(config, observer);
  } catch (const NumericError& e) {
    metrics.flush();
    Json diag = Json::parse(e.diagnostic().empty() ? "{}" : e.diagnostic(), nullptr, false);
    if (diag.is_discarded()) diag = Json::object();
    diag["error"] = e.what();
    write_text_file(dir / "diagnostic.json", dump_json(diag));
    throw;
  }
  metrics.close();
  if (!metrics) throw IoError("write failed: " + (dir / "metrics.csv").string());

  Json divergence = Json::array();
  for (std::size_t k = 0; k < result.divergence_by_iteration.size(); ++k) {
    Json row = divergence_table_json(result.divergence_by_iteration[k], config.space.prompts);
    row["iteration"] = k;
    divergence.push_back(std::move(row));
  }
  const Json report = {{"config_hash", hash},
                       {"method", config.method.kind == MethodSpec::Kind::kIris ? "iris" : config.method.label()},
                       {"label", config.method.label()},
                       {"estimation", std::string(mode_name(config.estimation.mode))},
                       {"iterations", config.iterations},
                       {"steps_per_iteration", result.steps_per_iteration},
                       {"metrics_csv", "metrics.csv"},
                       {"final_checkpoint", "checkpoints/iter_" + std::to_string(config.iterations) + ".json"},
                       {"alpha_history", nan_to_null(result.alpha_history)},
                       {"gap_history", nan_to_null(result.gap_history)},
                       {"divergence_by_iteration", divergence},
                       {"final_kl", final_kl(result)}};
  write_text_file(dir / "report.json", dump_json(report));
  return report;
}

Json sweep_to_directory(const ExperimentConfig& config, const fs::path& dir, bool force) {
  config.validate();
  if (config.sweep.entries.empty()) throw ConfigError("sweep.entries: empty grid");
  prepare_output_dir(dir, force);
  write_text_file(dir / "effective_config.json", dump_json(config_to_json(config)));
  const SweepResult result = run_sweep(config);
  write_text_file(dir / "sweep.csv", sweep_summary_csv(result));
  write_text_file(dir / "sweep_seeds.csv", sweep_detail_csv(result));
  Json report = sweep_report_json(result);
  report["config_hash"] = config_hash(config);
  report["summary_csv"] = "sweep.csv";
  report["detail_csv"] = "sweep_seeds.csv";
  write_text_file(dir / "report.json", dump_json(report));
  return report;
}

}  // namespace renyiplay
