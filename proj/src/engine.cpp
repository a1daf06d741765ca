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

#include "engine.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "divergence.hpp"
#include "errors.hpp"

namespace renyiplay {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Named sub-streams of run_seed.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kGenerationStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kInitStream = 4;

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Json sample_json(const Sample& s) { return {{"prompt", s.prompt}, {"response", s.response}}; }

}  // namespace

DivergenceTable evaluate_checkpoint(const TabularPolicy& policy, const TabularPolicy& annotator,
                                    const std::vector<double>& eval_alphas) {
  if (!(policy.space() == annotator.space())) throw InputError("checkpoint and annotator spaces differ");
  const ProblemSpace& space = policy.space();
  DivergenceTable t;
  t.alphas = eval_alphas;
  t.renyi.assign(eval_alphas.size(), 0.0);
  for (std::size_t x = 0; x < space.num_prompts(); ++x) {
    const FiniteDistribution data(annotator.enumerate_distribution(x));
    const FiniteDistribution model(policy.enumerate_distribution(x));
    const double qx = space.prompt_probs[x];
    const double k = kl(data, model);
    t.kl_per_prompt.push_back(k);
    t.kl += qx * k;
    std::vector<double> row;
    for (std::size_t a = 0; a < eval_alphas.size(); ++a) {
      const double d = renyi_divergence(data, model, eval_alphas[a]);
      row.push_back(d);
      t.renyi[a] += qx * d;
    }
    t.renyi_per_prompt.push_back(std::move(row));
  }
  return t;
}

std::string metrics_header(const std::vector<double>& eval_alphas) {
  std::string h =
      "iteration,epoch,step,alpha,loss_total,term_real,term_syn,mean_reward_real,mean_reward_syn,gap,grad_norm,"
      "kl_to_data";
  for (double a : eval_alphas) h += ",renyi_" + alpha_column_suffix(a);
  h += ",wall_ms";
  return h;
}

std::string format_metrics_row(const MetricsRecord& r) {
  std::string line = std::to_string(r.iteration) + "," + std::to_string(r.epoch) + "," + std::to_string(r.step);
  for (double v : {r.alpha, r.loss_total, r.term_real, r.term_syn, r.mean_reward_real, r.mean_reward_syn, r.gap,
                   r.grad_norm, r.kl_to_data}) {
    line += "," + format_value(v);
  }
  for (double v : r.renyi_to_data) line += "," + format_value(v);
  line += "," + format_value(r.wall_ms);
  return line;
}

TabularPolicy make_annotator(const ExperimentConfig& config) {
  return TabularPolicy(config.space, PolicyInit::gaussian(config.annotator_stddev, config.annotator_seed));
}

Dataset draw_annotated(const TabularPolicy& annotator, std::size_t n, Rng& rng) {
  Dataset d;
  d.origin = Dataset::Origin::kAnnotated;
  d.pairs.reserve(n);
  const auto& q = annotator.space().prompt_probs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = sample_index(q, rng);
    d.pairs.push_back({x, annotator.sample_one(x, rng)});
  }
  return d;
}

TabularPolicy make_initial_policy(const ExperimentConfig& config, const TabularPolicy& annotator) {
  const InitSpec& init = config.init;
  const std::uint64_t seed = init.seed ? *init.seed : make_stream(config.run_seed, kInitStream)();
  switch (init.kind) {
    case InitSpec::Kind::kZeros: return TabularPolicy(config.space, PolicyInit::zeros());
    case InitSpec::Kind::kGaussian: return TabularPolicy(config.space, PolicyInit::gaussian(init.stddev, seed));
    case InitSpec::Kind::kPerturbedAnnotator: {
      const TabularPolicy noise(config.space, PolicyInit::gaussian(init.stddev, seed));
      std::vector<double> logits(annotator.logits().begin(), annotator.logits().end());
      for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += noise.logits()[i];
      return TabularPolicy(config.space, std::move(logits));
    }
  }
  throw ConfigError("init.kind: unsupported");
}

Dataset regenerate_synthetic(const TabularPolicy& opponent, const Dataset& annotated, int n_per_prompt, int iteration,
                             Rng& rng) {
  if (n_per_prompt < 1) throw InputError("synthetic responses per prompt must be >= 1");
  Dataset d;
  d.origin = Dataset::Origin::kSynthetic;
  d.iteration = iteration;
  d.pairs.reserve(annotated.pairs.size() * static_cast<std::size_t>(n_per_prompt));
  for (const Sample& s : annotated.pairs) {
    for (int j = 0; j < n_per_prompt; ++j) d.pairs.push_back({s.prompt, opponent.sample_one(s.prompt, rng)});
  }
  return d;
}

Trainer::Trainer(ExperimentConfig config)
    : config_(std::move(config)), annotator_(make_annotator(config_)) {
  config_.validate();
  Rng data_rng = make_stream(config_.run_seed, kDataStream);
  annotated_ = draw_annotated(annotator_, config_.dataset_size, data_rng);
  annotated_.draw_seed = config_.run_seed;
  if (config_.estimation.mode == EstimationMode::kExact) {
    exact_target_ = config_.estimation.real_source == EstimationSpec::RealSource::kAnnotator
                        ? target_from_policy(annotator_)
                        : target_from_dataset(config_.space, annotated_);
  }
}

int Trainer::steps_per_epoch() const {
  return static_cast<int>((config_.dataset_size + config_.batch_size - 1) / config_.batch_size);
}

RunState Trainer::initial_state() const {
  TabularPolicy init = make_initial_policy(config_, annotator_);
  return RunState{0,
                  init,
                  init,
                  ScheduleState{},
                  OptimizerState{},
                  make_stream(config_.run_seed, kGenerationStream),
                  make_stream(config_.run_seed, kShuffleStream),
                  Dataset{}};
}

std::vector<std::size_t> Trainer::permutation(Rng& rng) const {
  std::vector<std::size_t> perm(config_.dataset_size);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  // Fisher-Yates with our own uniform draw so the order does not depend on
  // the standard library's distribution implementation.
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  return perm;
}

struct Trainer::StepOutcome {
  MetricsRecord record;
  ParameterGradient gradient;
  Json diagnostic;
};

Trainer::StepOutcome Trainer::evaluate_step(const RunState& state, std::span<const std::size_t> batch,
                                            double alpha) const {
  StepOutcome out;
  MetricsRecord& rec = out.record;
  rec.alpha = alpha;
  const bool exact = config_.estimation.mode == EstimationMode::kExact;
  const auto spp = static_cast<std::size_t>(config_.estimation.samples_per_prompt);

  std::vector<Sample> real;
  std::vector<Sample> syn;
  if (!exact) {
    for (std::size_t i : batch) {
      real.push_back(annotated_.pairs[i]);
      for (std::size_t j = 0; j < spp; ++j) syn.push_back(state.synthetic.pairs[i * spp + j]);
    }
    Json b = Json::array();
    for (const Sample& s : real) b.push_back(sample_json(s));
    out.diagnostic["real_batch"] = b;
    Json sb = Json::array();
    for (const Sample& s : syn) sb.push_back(sample_json(s));
    out.diagnostic["synthetic_batch"] = sb;
  }

  switch (config_.method.kind) {
    case MethodSpec::Kind::kIris: {
      LossAndGradient lg = exact ? iris_exact(state.main, state.opponent, *exact_target_, alpha)
                                 : iris_mc(state.main, state.opponent, real, syn, alpha);
      rec.loss_total = lg.loss.total;
      rec.term_real = lg.loss.term_real;
      rec.term_syn = lg.loss.term_syn;
      rec.mean_reward_real = lg.loss.mean_reward_real;
      rec.mean_reward_syn = lg.loss.mean_reward_syn;
      out.diagnostic["rewards_real"] = lg.loss.rewards_real;
      out.diagnostic["rewards_syn"] = lg.loss.rewards_syn;
      out.gradient = std::move(lg.gradient);
      break;
    }
    case MethodSpec::Kind::kSpin: {
      SpinResult sr;
      if (exact) {
        sr = spin_exact(state.main, state.opponent, *exact_target_);
      } else {
        std::vector<PairedSample> pairs;
        for (std::size_t k = 0; k < real.size(); ++k) {
          for (std::size_t j = 0; j < spp; ++j) pairs.push_back({real[k].prompt, real[k].response, syn[k * spp + j].response});
        }
        sr = spin_mc(state.main, state.opponent, pairs);
      }
      rec.loss_total = sr.loss;
      rec.term_real = sr.loss;
      rec.term_syn = 0.0;
      rec.mean_reward_real = sr.mean_reward_real;
      rec.mean_reward_syn = sr.mean_reward_syn;
      out.gradient = std::move(sr.gradient);
      break;
    }
    case MethodSpec::Kind::kSft: {
      SftResult sr = exact ? sft_exact(state.main, *exact_target_) : sft_mc(state.main, real);
      rec.loss_total = sr.loss;
      rec.term_real = sr.loss;
      rec.term_syn = 0.0;
      if (exact) {
        rec.mean_reward_real = kNaN;
      } else {
        double s = 0.0;
        for (const Sample& x : real) s += state.main.log_prob(x.prompt, x.response) - state.opponent.log_prob(x.prompt, x.response);
        rec.mean_reward_real = s / static_cast<double>(real.size());
      }
      rec.mean_reward_syn = kNaN;
      out.gradient = std::move(sr.gradient);
      break;
    }
  }
  rec.grad_norm = out.gradient.norm();
  return out;
}

MetricsRecord Trainer::summary_record(const RunState& state, double alpha) const {
  MetricsRecord rec;
  rec.iteration = state.iteration;
  rec.epoch = -1;
  rec.step = -1;
  rec.alpha = alpha;
  rec.loss_total = rec.term_real = rec.term_syn = kNaN;
  rec.mean_reward_real = rec.mean_reward_syn = rec.gap = rec.grad_norm = kNaN;
  const DivergenceTable t = evaluate_checkpoint(state.main, annotator_, config_.eval_alphas);
  rec.kl_to_data = t.kl;
  rec.renyi_to_data = t.renyi;
  return rec;
}

void Trainer::run_iteration(RunState& state, const RunObserver& observer, RunResult* result) const {
  const int t = state.iteration;
  const bool exact = config_.estimation.mode == EstimationMode::kExact;
  const bool frozen = config_.freeze_synthetic && t > 0;
  const int steps = steps_per_epoch();
  const std::size_t n = config_.dataset_size;
  const std::size_t bs = config_.batch_size;
  const auto spp = static_cast<std::size_t>(config_.estimation.samples_per_prompt);

  std::vector<std::size_t> perm;
  if (!exact) perm = permutation(state.shuffle_rng);

  // Gap of the end-of-(t-1) model against its opponent, on the real slice of
  // this iteration's first mini-batch and the matching synthetic slice that
  // was drawn from that opponent.
  double gap = 0.0;
  if (t > 0) {
    if (exact) {
      gap = estimate_gap_exact(state.main, state.opponent, *exact_target_);
    } else {
      std::vector<Sample> real;
      std::vector<Sample> syn;
      for (std::size_t k = 0; k < std::min(bs, n); ++k) {
        real.push_back(annotated_.pairs[perm[k]]);
        for (std::size_t j = 0; j < spp; ++j) syn.push_back(state.synthetic.pairs[perm[k] * spp + j]);
      }
      gap = estimate_gap_mc(state.main, state.opponent, real, syn);
    }
    state.schedule.last_gap = gap;
  }
  if (result) result->gap_history.push_back(gap);

  if (!frozen) {
    state.opponent = state.main;
    if (!exact) {
      state.synthetic = regenerate_synthetic(state.opponent, annotated_, config_.estimation.samples_per_prompt, t,
                                             state.generation_rng);
    }
  }
  state.optimizer = OptimizerState{};

  double alpha = kNaN;
  if (config_.method.kind == MethodSpec::Kind::kIris) {
    state.schedule.iteration = t;
    alpha = next_alpha(config_.method.schedule, state.schedule);
    if (result) result->alpha_history.push_back(alpha);
  }

  std::vector<std::size_t> batch;
  for (int epoch = 0; epoch < config_.epochs_per_iter; ++epoch) {
    if (!exact && epoch > 0) perm = permutation(state.shuffle_rng);
    for (int step = 0; step < steps; ++step) {
      const auto start = std::chrono::steady_clock::now();
      batch.clear();
      if (!exact) {
        const std::size_t lo = static_cast<std::size_t>(step) * bs;
        for (std::size_t k = lo; k < std::min(n, lo + bs); ++k) batch.push_back(perm[k]);
      }
      StepOutcome outcome = evaluate_step(state, batch, alpha);
      MetricsRecord& rec = outcome.record;
      rec.iteration = t;
      rec.epoch = epoch;
      rec.step = step;
      rec.gap = gap;
      auto abort = [&](const std::string& what) {
        Json diag = outcome.diagnostic;
        diag["iteration"] = t;
        diag["epoch"] = epoch;
        diag["step"] = step;
        diag["alpha"] = std::isfinite(alpha) ? Json(alpha) : Json();
        diag["loss_total"] = std::isfinite(rec.loss_total) ? Json(rec.loss_total) : Json(format_value(rec.loss_total));
        throw NumericError(what + " at iteration " + std::to_string(t) + ", epoch " + std::to_string(epoch) +
                               ", step " + std::to_string(step),
                           diag.dump(2));
      };
      bool finite = std::isfinite(rec.loss_total);
      for (double g : outcome.gradient.values) finite = finite && std::isfinite(g);
      if (!finite) abort("non-finite loss or gradient");
      apply_update(state.main, outcome.gradient.values, state.optimizer, config_.optimizer);
      for (double v : state.main.logits()) {
        if (!std::isfinite(v)) abort("update produced non-finite logits");
      }
      DivergenceTable div;
      try {
        div = evaluate_checkpoint(state.main, annotator_, config_.eval_alphas);
      } catch (const DomainError& e) {
        // probabilities underflowed to zero somewhere the annotator has mass
        abort(std::string("update collapsed the policy (") + e.what() + ")");
      }
      bool div_finite = std::isfinite(div.kl);
      for (double v : div.renyi) div_finite = div_finite && std::isfinite(v);
      if (!div_finite) abort("non-finite divergence after update");
      rec.kl_to_data = div.kl;
      rec.renyi_to_data = div.renyi;
      if (config_.record_wall_time) {
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      if (observer.on_record) observer.on_record(rec);
      if (result) result->metrics.push_back(rec);
    }
  }

  state.iteration = t + 1;
  if (observer.on_checkpoint) observer.on_checkpoint(state.iteration, state.main);
  const MetricsRecord summary = summary_record(state, alpha);
  if (observer.on_record) observer.on_record(summary);
  if (result) {
    result->metrics.push_back(summary);
    result->checkpoints.push_back(state.main);
    result->divergence_by_iteration.push_back(evaluate_checkpoint(state.main, annotator_, config_.eval_alphas));
  }
}

RunResult run_selfplay(const ExperimentConfig& config, const RunObserver& observer) {
  const Trainer trainer(config);
  RunState state = trainer.initial_state();
  RunResult result{trainer.annotator(), {}, {}, {}, {}, {}, trainer.steps_per_epoch() * config.epochs_per_iter};
  if (observer.on_checkpoint) observer.on_checkpoint(0, state.main);
  const MetricsRecord summary = trainer.summary_record(state, kNaN);
  if (observer.on_record) observer.on_record(summary);
  result.metrics.push_back(summary);
  result.checkpoints.push_back(state.main);
  result.divergence_by_iteration.push_back(evaluate_checkpoint(state.main, trainer.annotator(), config.eval_alphas));
  for (int t = 0; t < config.iterations; ++t) trainer.run_iteration(state, observer, &result);
  return result;
}

double final_kl(const RunResult& result) { return result.divergence_by_iteration.back().kl; }

}  // namespace renyiplay
