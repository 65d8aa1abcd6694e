// Copyright 2026 The GlimpseKit Authors.
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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "glimpsekit/glimpsekit.h"

namespace {

int report(gk_status status) {
  if (status == GK_OK) return 0;
  std::cerr << "glimpsekit: " << gk_status_string(status) << ": " << gk_last_error() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Objectness-guided glimpse selection and open-set tile search harness"};
  app.set_version_flag("--version", std::string(gk_version()));
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a closed-set or open-set experiment");
  run->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for result CSVs");
  run->add_option("--seed", seed, "Override the master seed");

  std::string gen_config;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-scenes", "Write synthetic scenes, objectness maps and gist images");
  gen->add_option("--config", gen_config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out-dir", gen_out, "Output directory")->required();

  std::string detections;
  std::string scenes;
  std::string out_csv;
  auto* eval = app.add_subcommand("eval", "Score a detections CSV against scene JSON files");
  eval->add_option("--detections", detections, "Detections CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--scenes", scenes, "Directory of scene JSON files")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--out", out_csv, "Metrics CSV to write")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    const std::uint64_t seed_value = seed.value_or(0);
    return report(gk_experiment_run(config.c_str(), out_dir.c_str(), seed ? &seed_value : nullptr));
  }
  if (*gen) return report(gk_generate_scenes(gen_config.c_str(), gen_out.c_str()));
  return report(gk_evaluate_detections(detections.c_str(), scenes.c_str(), out_csv.c_str()));
}
