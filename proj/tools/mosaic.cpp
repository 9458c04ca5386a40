// Copyright 2026 The Mosaic Authors
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

// mosaic: planning, chunk search and memory simulation driver.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mosaic/allocsim.hpp"
#include "mosaic/chunker.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/graph_io.hpp"
#include "mosaic/io.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/liveness.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/schema.hpp"
#include "mosaic/selftest.hpp"
#include "mosaic/vmm.hpp"
#include "mosaic/workload.hpp"

namespace {

using namespace mosaic;
using nlohmann::json;

enum Exit { kOk = 0, kPropertyFailure = 1, kUsage = 2, kInfeasible = 3 };

void emit_json(const std::string& path, std::string_view schema_name, const json& doc) {
  schema::check_json(schema_name, doc);
  const std::string text = doc.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

void emit_csv(const std::string& path, std::string_view header, const std::string& csv) {
  schema::check_csv(header, csv);
  if (path.empty() || path == "-") {
    std::cout << csv;
  } else {
    io::write_file_atomic(path, csv);
  }
}

Bindings parse_bindings(const std::vector<std::string>& items) {
  Bindings b;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--bind expects SYM=VALUE, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::int64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError("--bind " + name + ": '" + value + "' is not an integer");
    }
    b[name] = v;
  }
  return b;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(static_cast<std::int64_t>(parse_bytes(item)));
    } catch (const UsageError&) {
      throw UsageError("'" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

workload::FeatureSet parse_features(const std::string& text) {
  workload::FeatureSet f{false, false, false};
  if (text.empty() || text == "none") return f;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "global") f.global_plan = true;
    else if (item == "mask") f.mask_only = true;
    else if (item == "chunk") f.chunking = true;
    else throw UsageError("unknown feature '" + item + "' (expected global, mask, chunk)");
  }
  return f;
}

std::string feature_name(workload::FeatureSet f) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(f.global_plan, "global");
  add(f.mask_only, "mask");
  add(f.chunking, "chunk");
  return s.empty() ? "none" : s;
}

struct Common {
  std::uint64_t seed = 1;
  std::string manifest;
  std::vector<std::string> argv;
};

void write_manifest(const Common& c, const std::string& sub) {
  if (c.manifest.empty()) return;
  emit_json(c.manifest, "manifest", {{"subcommand", sub}, {"argv", c.argv}, {"seed", c.seed}});
}

// ---- plan -----------------------------------------------------------------

struct PlanArgs {
  std::string graph;
  std::vector<std::string> bind;
  Bytes align = planner::kDefaultAlignment;
  bool exact = false;
  std::size_t exact_limit = planner::kDefaultExactLimit;
  std::string out;
  std::string lifetimes;
  std::string stats;
};

int cmd_plan(const PlanArgs& a) {
  const auto tpl = graph::load_template(a.graph);
  const auto g = graph::instantiate(tpl, parse_bindings(a.bind));
  const auto table = liveness::analyze(g);
  const auto start = std::chrono::steady_clock::now();
  const auto plan = a.exact ? planner::plan_exact(table, a.align, a.exact_limit)
                            : planner::plan_first_fit(table, a.align);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const auto report = planner::validate(plan, table);
  if (!report.ok()) {
    std::cerr << "plan failed validation: " << report.violations.front().describe() << "\n";
    return kPropertyFailure;
  }
  const auto stats = planner::measure(table, plan, std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed));
  emit_json(a.out, "plan", planner::to_json(plan, table));
  const json sj = {{"workspace_size", stats.workspace_size},
                   {"lower_bound", stats.lower_bound},
                   {"group_count", stats.group_count},
                   {"planning_time_ns", stats.planning_time.count()}};
  if (!a.stats.empty()) emit_json(a.stats, "plan_stats", sj);
  if (!a.lifetimes.empty()) {
    std::ostringstream csv;
    liveness::write_csv(csv, table);
    emit_csv(a.lifetimes, "group_id,size_bytes,def,last_use,tag", csv.str());
  }
  std::cerr << (a.exact ? "exact" : "first-fit") << " plan: workspace " << stats.workspace_size
            << " bytes, max_live " << stats.lower_bound << ", " << stats.group_count << " groups\n";
  return kOk;
}

// ---- chunk-search ---------------------------------------------------------

struct ChunkArgs {
  std::string model;
  std::string graph;
  std::vector<std::string> bind;
  std::int64_t len = 0;
  double rp = 0.0;
  std::string budget;
  bool brute = false;
  std::int64_t k_max = 64;
  std::int64_t k_limit = 0;
  std::string objective = "sum";
  Bytes align = planner::kDefaultAlignment;
  std::string out;
};

int cmd_chunk_search(const ChunkArgs& a) {
  if (a.model.empty() == a.graph.empty()) throw UsageError("give exactly one of --model or --graph");
  Bytes budget = parse_bytes(a.budget);
  graph::GraphTemplate tpl;
  Bindings bindings;
  if (!a.model.empty()) {
    if (a.len < 1) throw UsageError("--len is required with --model");
    const auto cfg = workload::load_model(a.model);
    if (budget <= cfg.weights_bytes) {
      std::cerr << "infeasible: budget does not exceed the weights (" << cfg.weights_bytes << " bytes)\n";
      return kInfeasible;
    }
    budget -= cfg.weights_bytes;
    tpl = workload::build_layer_template(cfg).graph;
    bindings = workload::step_bindings(a.len, workload::output_length(a.len, a.rp));
  } else {
    tpl = graph::load_template(a.graph);
    bindings = parse_bindings(a.bind);
  }
  if (budget == 0) throw UsageError("budget must be positive");
  const auto objective = a.objective == "max" ? chunker::Objective::max : chunker::Objective::sum;
  if (a.objective != "sum" && a.objective != "max") throw UsageError("--objective must be sum or max");

  const auto greedy = chunker::search_bottleneck(tpl, bindings, budget, {a.align, a.k_limit});
  json doc = {{"budget", budget}, {"bottleneck", chunker::to_json(greedy)}};
  if (a.brute) {
    const auto brute = chunker::search_bruteforce(tpl, bindings, budget, a.k_max, objective, a.align);
    doc["bruteforce"] = chunker::to_json(brute);
    doc["match"] = brute.config == greedy.config;
  }
  emit_json(a.out, "chunk_search", doc);
  if (!greedy.feasible()) {
    std::cerr << "infeasible: non-chunkable floor " << greedy.floor << " bytes vs budget " << budget
              << " bytes\n";
    return kInfeasible;
  }
  return kOk;
}

// ---- simulate / par / lmax / allocsim -------------------------------------

struct ScenarioArgs {
  std::string model;
  std::int64_t len = 0;
  double rp = 0.5;
  std::int64_t steps = 1;
  std::string budget;
  bool pin = false;
  Bytes align = planner::kDefaultAlignment;
};

workload::ScenarioConfig scenario(const ScenarioArgs& a) {
  workload::ScenarioConfig s;
  s.context_len = a.len;
  s.prompt_ratio = a.rp;
  s.steps = a.steps;
  if (!a.budget.empty()) s.budget = parse_bytes(a.budget);
  s.pin_step0_config = a.pin;
  s.alignment = a.align;
  return s;
}

struct SimulateArgs {
  ScenarioArgs scen;
  std::string trace;
  std::string metrics;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto cfg = workload::load_model(a.scen.model);
  const auto steps = workload::simulate_run(cfg, scenario(a.scen));
  std::ostringstream metrics;
  workload::write_metrics_csv(metrics, a.scen.len, steps);
  emit_csv(a.metrics, "L,r_m,peak,avg,PAR,peak_component,k_logits,k_ffn", metrics.str());
  if (!a.trace.empty()) {
    std::ostringstream trace;
    workload::write_trace_csv(trace, steps);
    emit_csv(a.trace, "step,op_index,op_kind,component,live_bytes", trace.str());
  }
  return kOk;
}

struct ParArgs {
  std::string model;
  double rp = 0.5;
  std::string lens;
  std::string budget;
  Bytes align = planner::kDefaultAlignment;
  std::string out;
};

int cmd_par(const ParArgs& a) {
  const auto cfg = workload::load_model(a.model);
  const auto rows = workload::par_curve(cfg, a.rp, parse_int_list(a.lens), parse_bytes(a.budget), a.align);
  std::ostringstream csv;
  workload::write_par_csv(csv, rows);
  emit_csv(a.out, "L,PAR_unchunked,PAR_mosaic,k_logits,k_ffn,feasible", csv.str());
  return kOk;
}

struct LmaxArgs {
  std::string model;
  double rp = 0.5;
  std::string budget;
  std::vector<std::string> features;
  bool breakdown = false;
  std::int64_t max_len = std::int64_t{1} << 22;
  Bytes align = planner::kDefaultAlignment;
  std::string out;
};

int cmd_lmax(const LmaxArgs& a) {
  const auto cfg = workload::load_model(a.model);
  const Bytes budget = parse_bytes(a.budget);
  std::vector<workload::FeatureSet> sets;
  if (a.breakdown) {
    sets = {{false, false, false}, {true, false, false}, {true, true, false}, {true, true, true}};
  }
  for (const auto& f : a.features) sets.push_back(parse_features(f));
  if (sets.empty()) sets.push_back({true, true, true});
  workload::LmaxOptions options;
  options.alignment = a.align;
  options.max_len = a.max_len;
  json results = json::array();
  for (const auto& f : sets) {
    const auto lmax = workload::find_lmax(cfg, a.rp, budget, f, options);
    results.push_back({{"features", feature_name(f)}, {"l_max", lmax}});
    std::cerr << feature_name(f) << ": L_max = " << lmax << "\n";
  }
  emit_json(a.out, "lmax", {{"model", cfg.name}, {"prompt_ratio", a.rp}, {"budget", budget}, {"results", results}});
  return kOk;
}

struct AllocArgs {
  ScenarioArgs scen;
  std::string policy = "layer_breaks";
  std::string page = "2MiB";
  std::string backend = "simulated";
  bool audit = false;
  std::string events;
  std::string out;
};

int cmd_allocsim(const AllocArgs& a) {
  const auto cfg = workload::load_model(a.scen.model);
  allocsim::RunOptions options;
  options.policy = allocsim::break_policy_from_string(a.policy);
  options.page_size = parse_bytes(a.page);
  options.backend = vmm::backend_from_string(a.backend);
  options.allocator.audit = a.audit;
  allocsim::CachingAllocator state;
  const auto scen = scenario(a.scen);
  const auto myopic = allocsim::run_myopic(cfg, scen, options, &state);
  const auto global = allocsim::run_global(cfg, scen, options);
  emit_json(a.out, "allocsim",
            {{"model", cfg.name}, {"myopic", allocsim::to_json(myopic)}, {"global", allocsim::to_json(global)}});
  if (!a.events.empty()) {
    std::ostringstream csv;
    state.write_event_csv(csv);
    emit_csv(a.events, "event_index,op,bytes,segment_id,offset,reserved,allocated", csv.str());
  }
  std::cerr << "myopic inflation " << format_fixed(myopic.inflation_rate * 100.0, 2) << "%, global "
            << format_fixed(global.inflation_rate * 100.0, 2) << "%\n";
  return kOk;
}

// ---- selftest / bench-kernel ----------------------------------------------

struct SelftestArgs {
  std::string inject;
  std::string out_dir;
  std::size_t plan_cases = 1000;
  std::size_t oracle_cases = 200;
  std::size_t kernel_cases = 100;
  std::size_t vmm_cases = 200;
};

int cmd_selftest(const SelftestArgs& a, const Common& c) {
  selftest::Options o;
  o.seed = c.seed;
  o.inject = selftest::injection_from_string(a.inject);
  o.plan_cases = a.plan_cases;
  o.oracle_cases = a.oracle_cases;
  o.kernel_cases = a.kernel_cases;
  o.vmm_cases = a.vmm_cases;
  const auto report = selftest::run(o);
  selftest::print_table(std::cout, report);
  if (!a.out_dir.empty()) {
    emit_json(a.out_dir + "/selftest.json", "selftest", selftest::to_json(report));
    std::ostringstream csv;
    selftest::write_csv(csv, report);
    emit_csv(a.out_dir + "/selftest.csv", "check,cases,failures,status", csv.str());
  }
  if (!report.passed()) {
    for (const auto& check : report.checks) {
      if (check.counterexample) {
        std::cout << "counterexample (" << check.name << "): " << check.counterexample->dump() << "\n";
        break;
      }
    }
    return kPropertyFailure;
  }
  return kOk;
}

struct BenchArgs {
  std::size_t tokens = 2048;
  std::size_t d = 256;
  std::size_t vocab = 4096;
  std::size_t masked = 512;
  std::string tiles = "32,64,64";
  std::size_t threads = 1;
  std::size_t reps = 3;
  std::string out;
};

int cmd_bench_kernel(const BenchArgs& a, const Common& c) {
  const auto t = parse_int_list(a.tiles);
  if (t.size() != 3) throw UsageError("--tiles expects t_m,t_d,t_v");
  if (a.masked > a.tokens) throw UsageError("--masked cannot exceed --tokens");
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  kernel::Matrix<double> h(a.tokens, a.d), w(a.d, a.vocab);
  for (auto& x : h.data) x = uni(rng);
  for (auto& x : w.data) x = uni(rng);
  std::vector<std::int64_t> idx(a.tokens);
  for (std::size_t i = 0; i < a.tokens; ++i) idx[i] = static_cast<std::int64_t>(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(a.masked);
  const kernel::Tiles tiles{static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]),
                            static_cast<std::size_t>(t[2])};
  std::vector<std::int64_t> all(a.tokens);
  for (std::size_t i = 0; i < a.tokens; ++i) all[i] = static_cast<std::int64_t>(i);

  using clock = std::chrono::steady_clock;
  double best_mask = 1e300, best_dense = 1e300;
  std::size_t scratch = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(a.reps, 1); ++r) {
    auto t0 = clock::now();
    const auto res = kernel::gather_gemm<double>({&h, &w, idx, tiles, a.threads});
    auto t1 = clock::now();
    // Dense-then-discard: every row, then keep the masked ones.
    const auto dense = kernel::gather_gemm<double>({&h, &w, all, tiles, a.threads});
    kernel::Matrix<double> kept(idx.size(), a.vocab);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy(dense.logits.row(static_cast<std::size_t>(idx[i])),
                dense.logits.row(static_cast<std::size_t>(idx[i])) + a.vocab, &kept(i, 0));
    }
    auto t2 = clock::now();
    scratch = res.scratch.peak_elements;
    best_mask = std::min(best_mask, std::chrono::duration<double>(t1 - t0).count());
    best_dense = std::min(best_dense, std::chrono::duration<double>(t2 - t1).count());
  }
  const double flops = 2.0 * static_cast<double>(a.masked) * static_cast<double>(a.d) * static_cast<double>(a.vocab);
  json doc = {{"tokens", a.tokens},
              {"d_model", a.d},
              {"vocab", a.vocab},
              {"masked", a.masked},
              {"tiles", {tiles.t_m, tiles.t_d, tiles.t_v}},
              {"threads", a.threads},
              {"mask_only_seconds", best_mask},
              {"dense_then_discard_seconds", best_dense},
              {"gflops", flops / best_mask / 1e9},
              {"speedup", best_dense / best_mask},
              {"scratch_peak_elements", scratch},
              {"scratch_bound", kernel::ScratchAccount::bound(tiles)}};
  emit_json(a.out, "bench_kernel", doc);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mosaic: static memory planning, chunk search and dLLM memory simulation"};
  app.require_subcommand(1);
  Common common;
  for (int i = 0; i < argc; ++i) common.argv.emplace_back(argv[i]);
  app.add_option("--seed", common.seed, "Seed for randomized inputs (MOSAIC_SEED overrides)");
  app.add_option("--manifest", common.manifest, "Write a run manifest JSON here");

  auto add_align = [](CLI::App* sub, Bytes& target) {
    sub->add_option("--align", target, "Offset alignment in bytes (power of two)")->capture_default_str();
  };
  auto add_scenario = [&](CLI::App* sub, ScenarioArgs& s) {
    sub->add_option("--model", s.model, "Model config JSON")->required();
    sub->add_option("--len", s.len, "Context length L")->required();
    sub->add_option("--rp", s.rp, "Prompt ratio r_p in [0, 1)")->capture_default_str();
    sub->add_option("--steps", s.steps, "Diffusion steps N")->capture_default_str();
    sub->add_option("--budget", s.budget, "Device budget (weights included), e.g. 8GiB");
    sub->add_flag("--pin", s.pin, "Reuse step 0's chunk config for later steps");
    add_align(sub, s.align);
  };

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Plan a graph template");
  p->add_option("graph", plan.graph, "Graph template JSON")->required();
  p->add_option("--bind", plan.bind, "Symbol binding SYM=VALUE (repeatable)");
  add_align(p, plan.align);
  p->add_flag("--exact", plan.exact, "Use the exact branch-and-bound planner");
  p->add_option("--exact-limit", plan.exact_limit, "Largest group count for --exact")->capture_default_str();
  p->add_option("-o,--out", plan.out, "Plan JSON (default stdout)");
  p->add_option("--stats", plan.stats, "PlanStats JSON");
  p->add_option("--lifetimes", plan.lifetimes, "Lifetime table CSV");

  ChunkArgs chunk;
  auto* c = app.add_subcommand("chunk-search", "Find (K_logits, K_FFN) under a budget");
  c->add_option("--model", chunk.model, "Model config JSON (step 0 of a request)");
  c->add_option("--len", chunk.len, "Context length L (with --model)");
  c->add_option("--rp", chunk.rp, "Prompt ratio (with --model)")->capture_default_str();
  c->add_option("--graph", chunk.graph, "Graph template JSON");
  c->add_option("--bind", chunk.bind, "Symbol binding SYM=VALUE (with --graph)");
  c->add_option("--budget", chunk.budget, "Budget in bytes; device budget with --model")->required();
  c->add_flag("--brute", chunk.brute, "Also run the brute-force grid and compare");
  c->add_option("--k-max", chunk.k_max, "Brute-force grid bound")->capture_default_str();
  c->add_option("--k-limit", chunk.k_limit, "Cap on either chunk count (0 = derived)")->capture_default_str();
  c->add_option("--objective", chunk.objective, "Brute-force objective: sum or max")->capture_default_str();
  add_align(c, chunk.align);
  c->add_option("-o,--out", chunk.out, "Outcome JSON (default stdout)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate every diffusion step of one request");
  add_scenario(s, sim.scen);
  s->add_option("--metrics", sim.metrics, "Per-step metrics CSV (default stdout)");
  s->add_option("--trace", sim.trace, "Per-op trace CSV");

  ParArgs par;
  auto* pa = app.add_subcommand("par", "Peak-to-average ratio over context lengths");
  pa->add_option("--model", par.model, "Model config JSON")->required();
  pa->add_option("--rp", par.rp, "Prompt ratio")->capture_default_str();
  pa->add_option("--lens", par.lens, "Comma-separated context lengths")->required();
  pa->add_option("--budget", par.budget, "Device budget (weights included)")->required();
  add_align(pa, par.align);
  pa->add_option("-o,--out", par.out, "CSV (default stdout)");

  LmaxArgs lmax;
  auto* l = app.add_subcommand("lmax", "Largest context that fits a budget");
  l->add_option("--model", lmax.model, "Model config JSON")->required();
  l->add_option("--rp", lmax.rp, "Prompt ratio")->capture_default_str();
  l->add_option("--budget", lmax.budget, "Device budget (weights included)")->required();
  l->add_option("--features", lmax.features, "Feature set, e.g. global,mask,chunk (repeatable)");
  l->add_flag("--breakdown", lmax.breakdown, "Evaluate none, global, +mask, +chunk");
  l->add_option("--max-len", lmax.max_len, "Search ceiling")->capture_default_str();
  add_align(l, lmax.align);
  l->add_option("-o,--out", lmax.out, "JSON (default stdout)");

  AllocArgs alloc;
  auto* al = app.add_subcommand("allocsim", "Myopic caching allocator versus the global plan");
  add_scenario(al, alloc.scen);
  al->add_option("--policy", alloc.policy, "Break policy: layer_breaks or none")->capture_default_str();
  al->add_option("--page", alloc.page, "VMM page size for the global path")->capture_default_str();
  al->add_option("--backend", alloc.backend, "VMM backend: simulated or os")->capture_default_str();
  al->add_flag("--audit", alloc.audit, "Check allocator conservation after every event");
  al->add_option("--events", alloc.events, "Allocator event log CSV");
  al->add_option("-o,--out", alloc.out, "Inflation report JSON (default stdout)");

  SelftestArgs st;
  auto* t = app.add_subcommand("selftest", "Run the property suite");
  t->add_option("--inject", st.inject, "Fault to inject: planner-off-by-one");
  t->add_option("--out-dir", st.out_dir, "Write selftest.json and selftest.csv here");
  t->add_option("--plan-cases", st.plan_cases)->capture_default_str();
  t->add_option("--oracle-cases", st.oracle_cases)->capture_default_str();
  t->add_option("--kernel-cases", st.kernel_cases)->capture_default_str();
  t->add_option("--vmm-cases", st.vmm_cases)->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench-kernel", "Time mask-only gather-GEMM against dense-then-discard");
  b->add_option("--tokens", bench.tokens)->capture_default_str();
  b->add_option("--d", bench.d)->capture_default_str();
  b->add_option("--vocab", bench.vocab)->capture_default_str();
  b->add_option("--masked", bench.masked)->capture_default_str();
  b->add_option("--tiles", bench.tiles, "t_m,t_d,t_v")->capture_default_str();
  b->add_option("--threads", bench.threads)->capture_default_str();
  b->add_option("--reps", bench.reps)->capture_default_str();
  b->add_option("-o,--out", bench.out, "JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (const char* env = std::getenv("MOSAIC_SEED")) {
      try {
        common.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw UsageError(std::string("MOSAIC_SEED is not an integer: ") + env);
      }
    }
    const auto* sub = app.get_subcommands().front();
    write_manifest(common, sub->get_name());
    if (sub == p) return cmd_plan(plan);
    if (sub == c) return cmd_chunk_search(chunk);
    if (sub == s) return cmd_simulate(sim);
    if (sub == pa) return cmd_par(par);
    if (sub == l) return cmd_lmax(lmax);
    if (sub == al) return cmd_allocsim(alloc);
    if (sub == t) return cmd_selftest(st, common);
    if (sub == b) return cmd_bench_kernel(bench, common);
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kInfeasible;
  } catch (const TooLarge& e) {
    std::cerr << "too large: " << e.what() << "\n";
    return kUsage;
  } catch (const ExecutionFault& e) {
    std::cerr << "execution fault: " << e.what() << "\n";
    return kPropertyFailure;
  } catch (const ValidationError& e) {
    std::cerr << "validation: " << e.what() << "\n";
    return kPropertyFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
