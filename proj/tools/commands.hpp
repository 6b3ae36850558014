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

// Subcommands of the cci tool. Each returns the process exit code:
// 0 ok, 1 input error, 2 planning failed at some stage.

#ifndef CCI_TOOLS_COMMANDS_HPP_
#define CCI_TOOLS_COMMANDS_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cci/grid.hpp"
#include "cci/planner.hpp"
#include "cci/scene_io.hpp"
#include "cci/scenes.hpp"
#include "cci/sequencer.hpp"
#include "cci/svg.hpp"

namespace cci::tool {

namespace fs = std::filesystem;

enum class LogLevel { kQuiet, kInfo, kDebug };

/// CCI_LOG=quiet|info|debug, default info. Logs go to stderr.
inline LogLevel log_level() {
  const char* v = std::getenv("CCI_LOG");
  if (!v) return LogLevel::kInfo;
  std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::kQuiet;
  if (s == "debug" || s == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

inline void log(LogLevel at, const std::string& msg) {
  if (log_level() >= at) std::cerr << msg << "\n";
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + p.string());
  out << bytes;
}

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

inline json path_json(const Path& p) {
  json a = json::array();
  for (int t = 0; t < p.size(); ++t) {
    json row = json::array();
    for (int i = 0; i < dof(p.space); ++i) row.push_back(p.q(i, t));
    a.push_back(std::move(row));
  }
  return a;
}

template <int Dim>
json sequence_json(const GlueSequence<Dim>& seq) {
  json steps = json::array();
  for (const auto& s : seq.steps) {
    json members = json::array();
    for (ObjectId m : s.members) members.push_back({{"id", m}, {"anchor", s.attachment.at(m)}});
    steps.push_back(std::move(members));
  }
  return {{"initial", seq.initial.ids()}, {"steps", std::move(steps)}, {"components", seq.components}};
}

/// Objects of the environment after `k` glue steps, in id order.
inline ObjectSet<2> stage_objects(const GlueSequence<2>& seq, std::size_t k) {
  auto ids = seq.environment_ids(k);
  std::sort(ids.begin(), ids.end());
  return seq.total.subset(ids);
}

/// One stage picture: settled objects gray, the leaves being glued in a
/// second color with opacity following alpha, the path and start/goal.
inline std::string stage_svg(const GlueSequence<2>& seq, const RobotModel& robot, const PathSnapshot& snap,
                             const std::vector<const Path*>& ghosts, const std::string& title) {
  SvgCanvas c(V2::Zero(), V2::Ones());
  std::vector<ObjectId> gluing;
  std::size_t settled = snap.k;
  if (snap.label != "initial" && snap.k < seq.steps.size()) gluing = seq.steps[snap.k].members;
  if (snap.label == "polish") settled = seq.steps.size();
  if (!seq.total.empty())
    for (const auto& o : stage_objects(seq, settled)) c.shape(o.id, o.shape, "#9a9a9a", 1.0);
  for (ObjectId id : gluing) c.shape(id, seq.total.at(id).shape, "#d9822b", 0.2 + 0.8 * snap.alpha);
  for (const Path* g : ghosts) c.polyline(path_points(*g), "#4a78c2", 1.0, 0.35);
  for (int t = 0; t < snap.path.size(); t += std::max(1, snap.path.size() / 10))
    draw_robot(c, robot, snap.path.q.col(t), "#1f4e99", 0.5);
  c.polyline(path_points(snap.path), "#1f4e99", 2.0);
  c.marker(snap.path.position(0), "#2e9e44", "start");
  c.marker(snap.path.position(snap.path.size() - 1), "#c23b3b", "goal");
  c.text(title);
  return c.str();
}

// ---------------------------------------------------------------------------
// plan

struct PreparedScene {
  SceneFile file;        // normalized
  Normalization norm;
  ObjectSet<2> objects;  // normalized
  RobotModel robot = RobotModel::point();
};

inline PreparedScene prepare_2d(const SceneFile& raw) {
  if (raw.dimension != 2) throw InvalidInput("unsupported: planning and rendering are 2D only");
  build_objects<2>(raw);  // shape errors against the scene's own numbers
  build_robot(raw);
  PreparedScene p;
  p.norm = unit_box_normalization(raw);
  p.file = apply_normalization(raw, p.norm);
  p.objects = build_objects<2>(p.file);
  p.robot = build_robot(p.file);
  return p;
}

inline int cmd_plan(const std::string& scene_path, const std::string& out_dir) {
  SceneFile raw = load_scene(scene_path);
  PreparedScene sc = prepare_2d(raw);
  const PlannerParams& params = sc.file.params;
  log(LogLevel::kInfo, "plan: " + scene_path + " (" + std::to_string(sc.objects.size()) + " objects)");

  PlanReport rep = plan(sc.objects, sc.robot, to_vector(sc.file.start), to_vector(sc.file.goal), params);

  GlueSequence<2> seq;
  if (!sc.objects.empty()) {
    if (params.use_interpolation) {
      seq = build_sequence(sc.objects);
    } else {
      seq.total = seq.initial = sc.objects;
    }
    if (params.max_glue_steps) seq = truncate_sequence(seq, *params.max_glue_steps);
  }
  for (const auto& tr : rep.trace)
    log(LogLevel::kDebug, "  k=" + std::to_string(tr.k) + " alpha=" + fmt(tr.alpha) + (tr.polish ? " polish" : "") +
                              " iters=" + std::to_string(tr.sqp_iters) + " viol=" + fmt(tr.max_violation) +
                              " obj=" + fmt(tr.objective));

  const bool ok = rep.status == PlanReport::Status::kSuccess;
  json report;
  report["scene"] = raw.name;
  report["status"] = ok ? "success" : "stage_failure";
  report["failed_stage"] = ok ? json(nullptr) : json{{"k", rep.failed_k}, {"alpha", rep.failed_alpha}};
  report["glue_steps"] = rep.glue_steps;
  report["sequence"] = sc.objects.empty() ? json(nullptr) : sequence_json(seq);
  report["max_violation"] = rep.max_violation;
  if (params.nonholonomic) {
    double r = 0.0;
    for (double v : nonholonomic_residuals(rep.path)) r = std::max(r, std::abs(v));
    report["max_rolling_residual"] = r;
  }
  report["objective"] = rep.objective;
  report["min_clearance"] = rep.min_clearance;
  report["dense_clearance"] = rep.dense_clearance;
  report["normalization"] = {{"scale", sc.norm.scale},
                             {"offset", sc.norm.offset},
                             {"note", "path is in scene units; clearances, objective and params are in normalized units"}};
  report["params"] = params_to_json(params);
  json trace = json::array();
  for (const auto& tr : rep.trace)
    trace.push_back({{"k", tr.k},
                     {"alpha", tr.alpha},
                     {"polish", tr.polish},
                     {"retry", tr.retry},
                     {"sqp_iters", tr.sqp_iters},
                     {"converged", tr.converged},
                     {"max_violation", tr.max_violation},
                     {"objective", tr.objective}});
  report["trace"] = std::move(trace);
  report["path"] = path_json(denormalize(rep.path, sc.norm));

  json snaps = json::array();
  for (const auto& s : rep.snapshots)
    snaps.push_back(
        {{"label", s.label}, {"k", s.k}, {"alpha", s.alpha}, {"path", path_json(denormalize(s.path, sc.norm))}});

  fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "snapshots.json", snaps.dump(2) + "\n");
  write_file(dir / "timings.json", json{{"seconds", rep.seconds}}.dump(2) + "\n");

  std::vector<const Path*> previous;
  for (std::size_t i = 0; i < rep.snapshots.size(); ++i) {
    const auto& s = rep.snapshots[i];
    std::string tag = s.label;
    std::replace(tag.begin(), tag.end(), ' ', '_');
    char name[64];
    std::snprintf(name, sizeof name, "stage_%02zu_%s.svg", i, tag.c_str());
    write_file(dir / name, stage_svg(seq, sc.robot, s, {}, s.label));
    previous.push_back(&s.path);
  }
  PathSnapshot final{"overview", seq.steps.size(), 1.0, rep.path};
  if (!previous.empty()) previous.pop_back();
  write_file(dir / "overview.svg", stage_svg(seq, sc.robot, final, previous, raw.name.empty() ? "overview" : raw.name));

  log(LogLevel::kInfo, std::string("plan: ") + (ok ? "success" : "stage failure at k=" + std::to_string(rep.failed_k) +
                                                                    " alpha=" + fmt(rep.failed_alpha)) +
                           ", min clearance " + fmt(rep.min_clearance) + ", " + fmt(rep.seconds, 3) + " s");
  return ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// sequence

inline std::string step_text(const LeafSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s.members[i]) + "->" + std::to_string(s.attachment.at(s.members[i]));
  }
  return out + "}";
}

inline std::string sequence_line(const std::vector<ObjectId>& initial, const std::vector<const LeafSet*>& steps) {
  std::string out = "initial: [";
  for (std::size_t i = 0; i < initial.size(); ++i) out += (i ? ", " : "") + std::to_string(initial[i]);
  out += "]; steps: [";
  for (std::size_t i = 0; i < steps.size(); ++i) out += (i ? ", " : "") + step_text(*steps[i]);
  return out + "]";
}

/// Text form of a glue sequence. A disconnected scene gets a warning on
/// `warn` and one line per component.
template <int Dim>
std::string sequence_report(const ObjectSet<Dim>& objects, std::ostream& warn) {
  if (objects.empty()) return "initial: []; steps: []\n";
  auto seq = build_sequence(objects);
  std::vector<const LeafSet*> all;
  for (const auto& s : seq.steps) all.push_back(&s);
  if (seq.components == 1) return sequence_line(seq.initial.ids(), all) + "\n";

  warn << "warning: scene has " << seq.components
       << " disconnected components; each is sequenced separately and the steps interleaved\n";
  auto comps = IntersectionGraph(objects).components();
  std::string out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    std::set<ObjectId> in(comps[c].begin(), comps[c].end());
    std::vector<ObjectId> init;
    for (ObjectId id : seq.initial.ids())
      if (in.count(id)) init.push_back(id);
    std::vector<const LeafSet*> steps;
    for (const auto& s : seq.steps)
      if (in.count(s.members.front())) steps.push_back(&s);
    out += "component " + std::to_string(c) + ": " + sequence_line(init, steps) + "\n";
  }
  return out;
}

inline int cmd_sequence(const std::string& scene_path, bool as_json) {
  SceneFile s = load_scene(scene_path);
  if (s.dimension == 2) {
    auto objs = build_objects<2>(s);
    if (as_json) {
      std::cout << (objs.empty() ? json{{"initial", json::array()}, {"steps", json::array()}, {"components", 0}}
                                 : sequence_json(build_sequence(objs)))
                       .dump(2)
                << "\n";
    } else {
      std::cout << sequence_report(objs, std::cerr);
    }
  } else {
    auto objs = build_objects<3>(s);
    if (as_json) {
      std::cout << (objs.empty() ? json{{"initial", json::array()}, {"steps", json::array()}, {"components", 0}}
                                 : sequence_json(build_sequence(objs)))
                       .dump(2)
                << "\n";
    } else {
      std::cout << sequence_report(objs, std::cerr);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sdf-grid

inline int cmd_sdf_grid(const std::string& scene_path, std::size_t k, double alpha, std::uint32_t res,
                        const std::string& out_dir) {
  SceneFile raw = load_scene(scene_path);
  if (raw.dimension != 2) throw InvalidInput("unsupported: sdf-grid needs a 2D scene");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("--alpha must lie in [0, 1]");
  if (res == 0 || res > 8192) throw InvalidInput("--res must lie in [1, 8192]");
  PreparedScene sc = prepare_2d(raw);
  if (sc.objects.empty()) throw InvalidInput("scene has no objects");
  auto seq = build_sequence(sc.objects);
  if (k > seq.steps.size())
    throw InvalidInput("--step " + std::to_string(k) + " out of range (scene has " +
                       std::to_string(seq.steps.size()) + " glue steps)");
  auto env = environment_at(seq, k, alpha, sc.file.params.shaping());
  Grid g = sample_env(env, V2::Zero(), V2::Ones(), res);

  fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "grid.sdfg", std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + (dir / "grid.sdfg").string());
    write_sdfg(out, g);
  }
  SvgCanvas c(V2::Zero(), V2::Ones());
  for (const auto& o : env.base()) c.shape(o.id, o.shape, "#9a9a9a", 0.35);
  for (const auto& b : env.blends()) c.shape(b.leaf, seq.total.at(b.leaf).shape, "#d9822b", 0.15);
  c.segments(zero_contour(g), "#000000");
  c.text("step " + std::to_string(k) + ", alpha " + fmt(alpha));
  write_file(dir / "contour.svg", c.str());
  auto cc = grid_components(g);
  log(LogLevel::kInfo, "sdf-grid: " + std::to_string(res) + "x" + std::to_string(res) + ", free components " +
                           std::to_string(cc.free) + ", occupied components " + std::to_string(cc.occupied));
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchRun {
  std::string generator;
  std::string variant;
  std::uint64_t seed = 0;
  bool success = false;
  PlanReport report;
};

struct BenchConfig {
  struct Generator {
    std::string name;
    std::uint64_t seeds = 0;
    std::uint64_t first_seed = 0;
    double robot_radius = 0.1;
  };
  std::vector<Generator> generators;
  std::vector<std::string> variants{"proposed", "no-interpolation"};
  PlannerParams params;
};

inline BenchConfig parse_bench_config(const json& doc) {
  detail::Reader r(doc, "$");
  r.require_object({"generators", "variants", "params"});
  BenchConfig cfg;
  auto gens = r.required("generators");
  if (!gens.raw().is_array()) gens.fail("expected an array");
  for (std::size_t i = 0; i < gens.raw().size(); ++i) {
    auto g = gens.item(i);
    g.require_object({"name", "seeds", "first_seed", "robot_radius"});
    BenchConfig::Generator gen;
    gen.name = g.required("name").string();
    if (gen.name != "corridor" && gen.name != "maze") g.child("name").fail("unknown generator (corridor, maze)");
    auto n = g.required("seeds").integer();
    if (n < 0) g.child("seeds").fail("expected a non-negative integer");
    gen.seeds = static_cast<std::uint64_t>(n);
    if (g.has("first_seed")) {
      auto f = g.child("first_seed").integer();
      if (f < 0) g.child("first_seed").fail("expected a non-negative integer");
      gen.first_seed = static_cast<std::uint64_t>(f);
    }
    if (g.has("robot_radius")) gen.robot_radius = g.child("robot_radius").positive();
    cfg.generators.push_back(gen);
  }
  if (r.has("variants")) {
    auto v = r.child("variants");
    if (!v.raw().is_array()) v.fail("expected an array");
    cfg.variants.clear();
    for (std::size_t i = 0; i < v.raw().size(); ++i) {
      auto name = v.item(i).string();
      if (name != "proposed" && name != "no-interpolation")
        v.item(i).fail("unknown variant (proposed, no-interpolation)");
      cfg.variants.push_back(name);
    }
  }
  if (r.has("params")) cfg.params = detail::parse_params(r.child("params"), 3);
  return cfg;
}

inline Scene bench_scene(const BenchConfig::Generator& g, std::uint64_t seed) {
  if (g.name == "maze") return scenes::maze();
  return scenes::corridor(seed, g.robot_radius);
}

inline std::vector<BenchRun> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRun> runs;
  for (const auto& g : cfg.generators)
    for (const auto& v : cfg.variants)
      for (std::uint64_t i = 0; i < g.seeds; ++i) {
        const std::uint64_t seed = g.first_seed + i;
        Scene sc = bench_scene(g, seed);
        PlannerParams p = cfg.params;
        p.use_interpolation = v == "proposed";
        p.nonholonomic = sc.nonholonomic;
        BenchRun run{g.name, v, seed, false, plan(sc.objects, sc.robot, sc.start, sc.goal, p)};
        run.success = run.report.status == PlanReport::Status::kSuccess;
        log(LogLevel::kInfo, "bench: " + g.name + " " + v + " seed " + std::to_string(seed) + ": " +
                                 (run.success ? "success" : "failure") + " (" + fmt(run.report.seconds, 3) + " s)");
        runs.push_back(std::move(run));
      }
  return runs;
}

/// mean and population standard deviation; zeros for an empty sample.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

struct BenchSummary {
  std::string generator, variant;
  std::size_t runs = 0, successes = 0;
  std::pair<double, double> total_time, success_time;
};

inline std::vector<BenchSummary> summarize(const std::vector<BenchRun>& runs) {
  std::vector<BenchSummary> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::vector<double>> all, ok;
  for (const auto& r : runs) {
    auto key = std::make_pair(r.generator, r.variant);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.generator, r.variant, 0, 0, {}, {}});
      all.emplace_back();
      ok.emplace_back();
    }
    auto& s = out[it->second];
    ++s.runs;
    all[it->second].push_back(r.report.seconds);
    if (r.success) {
      ++s.successes;
      ok[it->second].push_back(r.report.seconds);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].total_time = mean_std(all[i]);
    out[i].success_time = mean_std(ok[i]);
  }
  return out;
}

/// Per-run results without timings, plus one total row per (generator,
/// variant) whose counts are the sums of the rows above it.
inline std::string bench_csv(const std::vector<BenchRun>& runs) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "generator,variant,seed,success,glue_steps,sqp_iters,max_violation,min_clearance,objective\n";
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, long>> totals;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : runs) {
    long iters = 0;
    for (const auto& t : r.report.trace) iters += t.sqp_iters;
    out << r.generator << "," << r.variant << "," << r.seed << "," << (r.success ? 1 : 0) << ","
        << r.report.glue_steps << "," << iters << "," << r.report.max_violation << "," << r.report.min_clearance
        << "," << r.report.objective << "\n";
    auto key = std::make_pair(r.generator, r.variant);
    if (!totals.count(key)) order.push_back(key);
    totals[key].first += r.success ? 1 : 0;
    totals[key].second += iters;
  }
  for (const auto& key : order)
    out << key.first << "," << key.second << ",total," << totals[key].first << ",," << totals[key].second << ",,,\n";
  return out.str();
}

inline std::string timing_csv(const std::vector<BenchRun>& runs, const std::vector<BenchSummary>& sums) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "generator,variant,seed,seconds\n";
  for (const auto& r : runs) out << r.generator << "," << r.variant << "," << r.seed << "," << r.report.seconds << "\n";
  out << "\ngenerator,variant,success,runs,total_mean,total_std,success_mean,success_std\n";
  for (const auto& s : sums)
    out << s.generator << "," << s.variant << "," << s.successes << "," << s.runs << "," << s.total_time.first << ","
        << s.total_time.second << "," << s.success_time.first << "," << s.success_time.second << "\n";
  return out.str();
}

inline std::string bench_table(const std::vector<BenchSummary>& sums) {
  auto pm = [](const std::pair<double, double>& ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", ms.first, ms.second);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> rows{{"Generator", "Variant", "Success", "Total time (s)", "Success time (s)"}};
  for (const auto& s : sums)
    rows.push_back({s.generator, s.variant, std::to_string(s.successes) + "/" + std::to_string(s.runs),
                    pm(s.total_time), s.successes ? pm(s.success_time) : "-"});
  std::vector<std::size_t> w(5, 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << r[i];
      if (i + 1 < r.size()) out << std::string(w[i] - r[i].size() + 2, ' ');
    }
    out << "\n";
  }
  return out.str();
}

inline int cmd_bench(const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) throw InvalidInput("cannot read bench config " + config_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("$: invalid JSON: ") + e.what());
  }
  BenchConfig cfg = parse_bench_config(doc);
  auto runs = run_bench(cfg);
  auto sums = summarize(runs);
  fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "bench.csv", bench_csv(runs));
  write_file(dir / "timing.csv", timing_csv(runs, sums));
  const std::string table = bench_table(sums);
  write_file(dir / "table.txt", table);
  std::cout << table;
  return 0;
}

}  // namespace cci::tool

#endif  // CCI_TOOLS_COMMANDS_HPP_
