// Copyright 2026 The cci Authors
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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Trajectory optimization through narrow passages by collision-constraint interpolation"};
  app.require_subcommand(1);

  std::string scene, out_dir, config, generator;
  std::size_t step = 0;
  double alpha = 1.0;
  std::uint32_t res = 256;
  std::uint64_t seed = 0;
  bool as_json = false;

  auto* plan = app.add_subcommand("plan", "Plan a path and write report, snapshots and SVGs");
  plan->add_option("scene", scene, "Scene JSON file")->required();
  plan->add_option("-o,--out", out_dir, "Output directory")->default_val("plan_out");

  auto* seq = app.add_subcommand("sequence", "Print the glue sequence of a scene");
  seq->add_option("scene", scene, "Scene JSON file")->required();
  seq->add_flag("--json", as_json, "Print JSON instead of text");

  auto* grid = app.add_subcommand("sdf-grid", "Dump the interpolated SDF on a grid over the unit box");
  grid->add_option("scene", scene, "Scene JSON file")->required();
  grid->add_option("--step", step, "Glue step index (the step count gives the full environment)")->required();
  grid->add_option("--alpha", alpha, "Interpolation value in [0, 1]")->required();
  grid->add_option("--res", res, "Grid resolution per side")->required();
  grid->add_option("-o,--out", out_dir, "Output directory")->default_val("grid_out");

  auto* bench = app.add_subcommand("bench", "Run the ablation benchmark");
  bench->add_option("config", config, "Benchmark config JSON file")->required();
  bench->add_option("-o,--out", out_dir, "Output directory")->default_val("bench_out");

  auto* gen = app.add_subcommand("generate", "Write a generated scene as JSON to stdout");
  gen->add_option("generator", generator, "corridor or maze")->required()->check(CLI::IsMember({"corridor", "maze"}));
  gen->add_option("--seed", seed, "Generator seed")->default_val(0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*plan) return cci::tool::cmd_plan(scene, out_dir);
    if (*seq) return cci::tool::cmd_sequence(scene, as_json);
    if (*grid) return cci::tool::cmd_sdf_grid(scene, step, alpha, res, out_dir);
    if (*bench) return cci::tool::cmd_bench(config, out_dir);
    if (*gen) {
      cci::Scene s = generator == "maze" ? cci::scenes::maze() : cci::scenes::corridor(seed);
      std::cout << cci::scene_to_json(cci::scene_file_from(s)).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
