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

#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "engine.hpp"
#include "errors.hpp"

namespace renyiplay {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

ExperimentConfig paired_config(const ExperimentConfig& base, const MethodSpec& method, std::uint64_t seed) {
  ExperimentConfig c = base;
  c.method = method;
  c.run_seed = seed;
  c.annotator_seed = base.annotator_seed + seed;
  return c;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepProgress& progress) {
  base.validate();
  if (base.sweep.entries.empty()) throw ConfigError("sweep.entries: empty grid");
  SweepResult result;
  for (int i = 0; i < base.sweep.seeds; ++i) result.seeds.push_back(base.sweep.first_seed + static_cast<std::uint64_t>(i));

  std::set<std::string> used;
  for (std::size_t e = 0; e < base.sweep.entries.size(); ++e) {
    SweepEntryResult entry;
    entry.method = base.sweep.entries[e];
    entry.label = entry.method.label();
    if (!used.insert(entry.label).second) {
      entry.label += "#" + std::to_string(e);
      used.insert(entry.label);
    }
    for (std::uint64_t seed : result.seeds) {
      if (progress) progress(entry.label, seed);
      const RunResult run = run_selfplay(paired_config(base, entry.method, seed));
      SweepRun r;
      r.seed = seed;
      for (const DivergenceTable& t : run.divergence_by_iteration) r.kl_by_iteration.push_back(t.kl);
      r.alpha_history = run.alpha_history;
      r.gap_history = run.gap_history;
      entry.runs.push_back(std::move(r));
    }
    const std::size_t points = static_cast<std::size_t>(base.iterations) + 1;
    for (std::size_t k = 0; k < points; ++k) {
      std::vector<double> col;
      for (const SweepRun& r : entry.runs) col.push_back(r.kl_by_iteration[k]);
      entry.median_kl_by_iteration.push_back(median(col));
    }
    entry.median_final_kl = entry.median_kl_by_iteration.back();
    result.entries.push_back(std::move(entry));
  }
  return result;
}

std::string sweep_summary_csv(const SweepResult& result) {
  std::string out = "schedule";
  const std::size_t points = result.entries.empty() ? 0 : result.entries.front().median_kl_by_iteration.size();
  for (std::size_t k = 0; k < points; ++k) out += ",median_kl_iter_" + std::to_string(k);
  out += ",median_final_kl\n";
  for (const SweepEntryResult& e : result.entries) {
    out += e.label;
    for (double v : e.median_kl_by_iteration) out += "," + fmt(v);
    out += "," + fmt(e.median_final_kl) + "\n";
  }
  return out;
}

std::string sweep_detail_csv(const SweepResult& result) {
  std::string out = "schedule,seed,iteration,kl_to_data,alpha,gap\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepEntryResult& e : result.entries) {
    for (const SweepRun& r : e.runs) {
      for (std::size_t k = 0; k < r.kl_by_iteration.size(); ++k) {
        // Row k describes theta_k; it was trained with alpha_{k-1} after observing gap_{k-1}.
        const double alpha = k > 0 && k - 1 < r.alpha_history.size() ? r.alpha_history[k - 1] : nan;
        const double gap = k > 0 && k - 1 < r.gap_history.size() ? r.gap_history[k - 1] : nan;
        out += e.label + "," + std::to_string(r.seed) + "," + std::to_string(k) + "," + fmt(r.kl_by_iteration[k]) +
               "," + fmt(alpha) + "," + fmt(gap) + "\n";
      }
    }
  }
  return out;
}

Json sweep_report_json(const SweepResult& result) {
  Json entries = Json::array();
  for (const SweepEntryResult& e : result.entries) {
    Json finals = Json::array();
    for (const SweepRun& r : e.runs) finals.push_back(r.kl_by_iteration.back());
    entries.push_back({{"label", e.label},
                       {"method", method_to_json(e.method)},
                       {"median_kl_by_iteration", e.median_kl_by_iteration},
                       {"median_final_kl", e.median_final_kl},
                       {"final_kl_by_seed", finals}});
  }
  return {{"seeds", result.seeds}, {"entries", entries}};
}

}  // namespace renyiplay
