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

#include <doctest.h>

#include "config.hpp"
#include "errors.hpp"

using namespace renyiplay;

namespace {

std::string config_error(const Json& doc) {
  try {
    config_from_json(doc).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
  const ExperimentConfig c = config_from_json(Json::object());
  ExperimentConfig expected;
  expected.sweep.entries = default_sweep_entries(expected.iterations);
  CHECK(c == expected);
  CHECK(c.space.vocab_size == 4);
  CHECK(c.space.response_len == 2);
  CHECK(c.space.num_prompts() == 3);
  CHECK(c.dataset_size == 512);
  CHECK(c.iterations == 4);
  CHECK(c.epochs_per_iter == 2);
  CHECK(c.method.kind == MethodSpec::Kind::kIris);
  CHECK(c.method.schedule == ScheduleSpec::gap_feedback(0.5, 0.5, 3.0));
  CHECK(c.sweep.entries.size() == 5);
}

TEST_CASE("canonical round trip") {
  ExperimentConfig c;
  c.method.kind = MethodSpec::Kind::kSpin;
  c.estimation.mode = EstimationMode::kMonteCarlo;
  c.estimation.samples_per_prompt = 2;
  c.optimizer = StepRule::plain(0.3);
  c.init.kind = InitSpec::Kind::kGaussian;
  c.init.seed = 99;
  c.space.prompts = {"a", "b", "c"};
  c.space.prompt_probs = {0.2, 0.3, 0.5};
  c.eval_alphas = {0.5, 1.5, 10.0};
  c.sweep.entries = default_sweep_entries(4);
  MethodSpec sft;
  sft.kind = MethodSpec::Kind::kSft;
  c.sweep.entries.push_back(sft);
  const Json j = config_to_json(c);
  CHECK(config_from_json(j) == c);
  CHECK(config_from_json(Json::parse(j.dump())) == c);
  CHECK(config_hash(c) == config_hash(config_from_json(j)));
  ExperimentConfig d = c;
  d.run_seed = 2;
  CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("shorthands") {
  const ExperimentConfig c = config_from_json(Json::parse(R"({
    "method": {"kind": "iris", "schedule": 1.5},
    "estimation": "mc",
    "space": {"vocab_size": 2, "response_len": 3, "num_prompts": 2}
  })"));
  CHECK(c.method.schedule == ScheduleSpec::fixed(1.5));
  CHECK(c.estimation.mode == EstimationMode::kMonteCarlo);
  CHECK(c.space.prompts == std::vector<std::string>{"p0", "p1"});
  CHECK(config_from_json(Json::parse(R"({"method": "spin"})")).method.kind == MethodSpec::Kind::kSpin);
}

TEST_CASE("field-level errors") {
  CHECK(config_error(Json::parse(R"({"iterations": 2, "bogus": 1})")).find("bogus") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"optimizer": {"kind": "adaptive", "lr": -1}})")).find("optimizer.lr") !=
        std::string::npos);
  CHECK(config_error(Json::parse(R"({"method": {"kind": "iris", "schedule": {"kind": "fixed", "alpah": 2}}})"))
            .find("method.schedule.alpah") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"batch_size": 1000})")).find("batch_size") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"eval_alphas": [2.0, 0.5]})")).find("eval_alphas") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"space": {"vocab_size": 1}})")).find("vocab_size") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"iterations": "four"})")).find("iterations") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"method": "dpo"})")).find("dpo") != std::string::npos);
  CHECK(config_error(Json::parse(R"({"epochs_per_iter": 0})")).find("epochs_per_iter") != std::string::npos);
  CHECK(config_error(Json::parse("[]")) != "");
}

TEST_CASE("overrides") {
  const Json base = Json::parse(R"({"iterations": 3})");
  const Json a = apply_overrides(base, {"iterations=5", "optimizer.lr=0.2", "method=spin", "init.seed=7"});
  const ExperimentConfig c = config_from_json(a);
  CHECK(c.iterations == 5);
  CHECK(c.optimizer.learning_rate == 0.2);
  CHECK(c.method.kind == MethodSpec::Kind::kSpin);
  CHECK(c.init.seed == std::optional<std::uint64_t>(7));
  CHECK_THROWS_AS((void)apply_overrides(base, {"no_such_key=1"}), ConfigError);
  CHECK_THROWS_AS((void)apply_overrides(base, {"optimizer.nope=1"}), ConfigError);
  CHECK_THROWS_AS((void)apply_overrides(base, {"iterations"}), ConfigError);
  CHECK_THROWS_AS((void)apply_overrides(base, {"=3"}), ConfigError);
}

TEST_CASE("alpha column suffix") {
  CHECK(alpha_column_suffix(0.5) == "0_5");
  CHECK(alpha_column_suffix(2.0) == "2_0");
  CHECK(alpha_column_suffix(1.25) == "1_25");
}
