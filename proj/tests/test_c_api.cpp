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

// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "renyiplay/renyiplay.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  rp_string_free(s);
  return out;
}

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / ("renyiplay_c_api_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSpace = R"({"vocab_size": 3, "response_len": 2, "num_prompts": 2})";
const char* kSmallRun = R"({"space": {"vocab_size": 3, "response_len": 2, "num_prompts": 2},
  "dataset_size": 40, "batch_size": 16, "iterations": 2, "epochs_per_iter": 1})";

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(rp_version()) > 0);
  rp_policy* p = nullptr;
  CHECK(rp_policy_create("{not json", 0, 0.0, 0, &p) == RP_ERR_CONFIG);
  CHECK(p == nullptr);
  CHECK(std::strlen(rp_last_error()) > 0);
  CHECK(rp_policy_create(R"({"vocab_size": 1})", 0, 0.0, 0, &p) == RP_ERR_CONFIG);
  CHECK(std::string(rp_last_error()).find("vocab") != std::string::npos);
  CHECK(rp_policy_create(kSpace, 7, 0.0, 0, &p) == RP_ERR_CONFIG);
  CHECK(rp_policy_create(kSpace, 0, 0.0, 0, nullptr) == RP_ERR_INPUT);
  rp_policy_destroy(nullptr);
  rp_string_free(nullptr);
}

TEST_CASE("policy handle lifecycle") {
  rp_policy* p = nullptr;
  REQUIRE(rp_policy_create(kSpace, 1, 1.0, 42, &p) == RP_OK);
  int v = 0, l = 0;
  size_t n = 0, params = 0;
  REQUIRE(rp_policy_shape(p, &v, &l, &n, &params) == RP_OK);
  CHECK(v == 3);
  CHECK(l == 2);
  CHECK(n == 2);
  CHECK(params == 2 * (1 + 3) * 3);

  std::vector<double> probs(9);
  size_t written = 0;
  REQUIRE(rp_policy_enumerate(p, 1, probs.data(), probs.size(), &written) == RP_OK);
  CHECK(written == 9);
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int y[2] = {a, b};
      double lp = 0.0;
      REQUIRE(rp_policy_log_prob(p, 1, y, 2, &lp) == RP_OK);
      CHECK(std::exp(lp) == doctest::Approx(probs[static_cast<size_t>(a * 3 + b)]).epsilon(1e-13));
      total += probs[static_cast<size_t>(a * 3 + b)];
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(rp_policy_enumerate(p, 1, probs.data(), 4, &written) == RP_ERR_INPUT);
  const int bad[2] = {0, 3};
  double lp = 0.0;
  CHECK(rp_policy_log_prob(p, 0, bad, 2, &lp) == RP_ERR_INPUT);
  CHECK(rp_policy_log_prob(p, 5, bad, 2, &lp) == RP_ERR_INPUT);

  std::vector<int> s1(20), s2(20);
  REQUIRE(rp_policy_sample(p, 0, 9, 10, s1.data(), s1.size()) == RP_OK);
  REQUIRE(rp_policy_sample(p, 0, 9, 10, s2.data(), s2.size()) == RP_OK);
  CHECK(s1 == s2);
  for (int t : s1) CHECK((t >= 0 && t < 3));
  CHECK(rp_policy_sample(p, 0, 9, 11, s1.data(), s1.size()) == RP_ERR_INPUT);

  char* json = nullptr;
  REQUIRE(rp_policy_to_json(p, &json) == RP_OK);
  rp_policy* q = nullptr;
  REQUIRE(rp_policy_from_json(json, &q) == RP_OK);
  rp_string_free(json);
  const fs::path file = scratch("ckpt.json");
  REQUIRE(rp_policy_save(q, file.c_str()) == RP_OK);
  rp_policy* r = nullptr;
  REQUIRE(rp_policy_load(file.c_str(), &r) == RP_OK);
  std::vector<double> back(9);
  REQUIRE(rp_policy_enumerate(r, 1, back.data(), back.size(), &written) == RP_OK);
  CHECK(back == probs);  // bit-exact round trip
  fs::remove(file);
  CHECK(rp_policy_load(file.c_str(), &q) == RP_ERR_IO);
  CHECK(rp_policy_from_json(R"({"format_version": 1})", &q) == RP_ERR_INPUT);
  rp_policy_destroy(p);
  rp_policy_destroy(q);
  rp_policy_destroy(r);
}

TEST_CASE("divergences") {
  const double p[2] = {0.5, 0.5};
  const double q[2] = {0.8, 0.2};
  double out = 0.0;
  REQUIRE(rp_divergence("renyi", p, q, 2, 2.0, &out) == RP_OK);
  CHECK(std::abs(out - 0.4462871026) < 1e-9);  // log(0.25/0.8 + 0.25/0.2)
  REQUIRE(rp_divergence("kl", p, q, 2, 0.0, &out) == RP_OK);
  CHECK(std::abs(out - (0.5 * std::log(0.5 / 0.8) + 0.5 * std::log(0.5 / 0.2))) < 1e-15);
  CHECK(rp_divergence("tv", p, q, 2, 0.0, &out) == RP_ERR_INPUT);
  const double z[2] = {1.0, 0.0};
  CHECK(rp_divergence("kl", p, z, 2, 0.0, &out) == RP_ERR_DOMAIN);
  const double bad[2] = {0.5, 0.6};
  CHECK(rp_divergence("kl", bad, q, 2, 0.0, &out) == RP_ERR_INPUT);
}

TEST_CASE("config resolve and evaluate") {
  const char* overrides[] = {"method=spin", "iterations=3"};
  char* eff = nullptr;
  REQUIRE(rp_config_resolve(kSmallRun, overrides, 2, &eff) == RP_OK);
  const std::string effective = take(eff);
  CHECK(effective.find("\"spin\"") != std::string::npos);
  char* again = nullptr;
  REQUIRE(rp_config_resolve(effective.c_str(), nullptr, 0, &again) == RP_OK);
  CHECK(take(again) == effective);
  const char* bad[] = {"no_such_key=1"};
  CHECK(rp_config_resolve(kSmallRun, bad, 1, &eff) == RP_ERR_CONFIG);

  rp_policy* annot = nullptr;
  REQUIRE(rp_annotator_create(kSmallRun, &annot) == RP_OK);
  char* table = nullptr;
  REQUIRE(rp_evaluate(kSmallRun, annot, &table) == RP_OK);
  const std::string t = take(table);
  CHECK(t.find("\"all\"") != std::string::npos);
  CHECK(t.find("kl_to_data") != std::string::npos);
  rp_policy* other = nullptr;
  REQUIRE(rp_policy_create(R"({"vocab_size": 2, "response_len": 1})", 0, 0.0, 0, &other) == RP_OK);
  CHECK(rp_evaluate(kSmallRun, other, &table) == RP_ERR_INPUT);
  rp_policy_destroy(other);
  rp_policy_destroy(annot);
}

TEST_CASE("run, refusal to overwrite, numeric abort") {
  const fs::path dir = scratch("run");
  char* report = nullptr;
  REQUIRE(rp_run(kSmallRun, dir.c_str(), 0, &report) == RP_OK);
  CHECK(take(report).find("final_kl") != std::string::npos);
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "checkpoints" / "iter_2.json"));
  CHECK(rp_run(kSmallRun, dir.c_str(), 0, &report) == RP_ERR_CONFIG);
  REQUIRE(rp_run(kSmallRun, dir.c_str(), 1, &report) == RP_OK);
  rp_string_free(report);

  const char* blowup = R"({"space": {"vocab_size": 3, "response_len": 2, "num_prompts": 2},
    "dataset_size": 40, "batch_size": 16, "iterations": 1, "estimation": "mc",
    "optimizer": {"kind": "plain", "lr": 1e308}})";
  REQUIRE(rp_run(blowup, dir.c_str(), 1, &report) == RP_ERR_NUMERIC);
  CHECK(fs::exists(dir / "diagnostic.json"));
  fs::remove_all(dir);
}

TEST_CASE("gradcheck") {
  const char* cfg = R"({"gradcheck": {"instances": 2}})";
  char* report = nullptr;
  int passed = -1;
  REQUIRE(rp_gradcheck(cfg, 0, &report, &passed) == RP_OK);
  CHECK(passed == 1);
  rp_string_free(report);
  CHECK(rp_gradcheck(cfg, 1, &report, &passed) == RP_ERR_CHECK);
  CHECK(passed == 0);
  rp_string_free(report);
  CHECK(rp_gradcheck(R"({"gradcheck": {"instances": 0}})", 0, &report, &passed) == RP_ERR_CONFIG);
}
