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

#include "mosaic/selftest.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "mosaic/chunker.hpp"
#include "mosaic/graph_io.hpp"
#include "mosaic/kernel.hpp"
#include "mosaic/liveness.hpp"
#include "mosaic/planner.hpp"
#include "mosaic/random_graph.hpp"
#include "mosaic/vmm.hpp"
#include "mosaic/workload.hpp"

namespace mosaic::selftest {

using nlohmann::json;

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

Injection injection_from_string(const std::string& s) {
  if (s.empty() || s == "none") return Injection::none;
  if (s == "planner-off-by-one") return Injection::planner_off_by_one;
  throw UsageError("unknown injection '" + s + "'");
}

std::uint64_t case_seed(std::uint64_t seed, std::uint32_t check, std::uint64_t index) {
  return vmm::canary(static_cast<std::size_t>(seed * 0x100000001b3ULL ^ (std::uint64_t{check} << 40) ^ index));
}

namespace {

void fail(CheckResult& r, json counterexample) {
  if (!r.counterexample) r.counterexample = std::move(counterexample);
  ++r.failures;
}

liveness::LifetimeTable planning_table(const liveness::LifetimeTable& truth, Injection inject) {
  if (inject != Injection::planner_off_by_one) return truth;
  auto t = truth;
  for (auto& g : t.groups) {
    if (g.last_use > g.def) --g.last_use;
  }
  return t;
}

json violations_json(const planner::ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report.violations) out.push_back(v.describe());
  return out;
}

CheckResult plan_validity(const Options& o) {
  CheckResult r{"plan_validity"};
  for (std::size_t i = 0; i < o.plan_cases; ++i) {
    const auto s = case_seed(o.seed, 1, i);
    const auto tpl = random_graph::random_template(s);
    const auto table = liveness::analyze(graph::instantiate(tpl, {}));
    const auto plan = planner::plan_first_fit(planning_table(table, o.inject));
    const auto report = planner::validate(plan, table);
    ++r.cases;
    if (!report.ok() || plan.workspace_size < liveness::max_live(table)) {
      fail(r, {{"case", i}, {"case_seed", s}, {"violations", violations_json(report)},
               {"graph", graph::to_json(tpl)}});
    }
  }
  return r;
}

CheckResult oracle_dominance(const Options& o) {
  CheckResult r{"oracle_dominance"};
  random_graph::Options small;
  small.max_tensors = 10;
  for (std::size_t i = 0; i < o.oracle_cases; ++i) {
    const auto s = case_seed(o.seed, 2, i);
    const auto tpl = random_graph::random_template(s, small);
    const auto table = liveness::analyze(graph::instantiate(tpl, {}));
    const auto truth_plan = planning_table(table, o.inject);
    const auto ff = planner::plan_first_fit(truth_plan);
    const auto exact = planner::plan_exact(truth_plan);
    ++r.cases;
    const auto report = planner::validate(exact, table);
    if (exact.workspace_size > ff.workspace_size || !report.ok() ||
        exact.workspace_size < liveness::max_live(table)) {
      fail(r, {{"case", i}, {"case_seed", s}, {"exact", exact.workspace_size},
               {"first_fit", ff.workspace_size}, {"violations", violations_json(report)},
               {"graph", graph::to_json(tpl)}});
    }
  }
  // Layer templates: first-fit, max_live and the exact plan coincide.
  auto models = workload::toy_models();
  models.push_back(workload::tiny_model());
  for (const auto& cfg : models) {
    const auto tpl = workload::build_layer_template(cfg);
    for (const auto& [len, masked, k] : {std::tuple{64, 48, 1}, std::tuple{256, 32, 2}}) {
      Bindings b = workload::step_bindings(len, masked);
      b[graph::kLogitsTrip] = k;
      b[graph::kFfnTrip] = k;
      const auto table = liveness::analyze(graph::instantiate(tpl.graph, b));
      const auto ff = planner::plan_first_fit(table, 1);
      const auto exact = planner::plan_exact(table, 1, table.groups.size());
      const auto live = liveness::max_live(table);
      ++r.cases;
      if (ff.workspace_size != live || exact.workspace_size != live) {
        fail(r, {{"model", cfg.name}, {"L", len}, {"M", masked}, {"K", k},
                 {"first_fit", ff.workspace_size}, {"exact", exact.workspace_size}, {"max_live", live}});
      }
    }
  }
  return r;
}

CheckResult chunk_equivalence(const Options&) {
  CheckResult r{"chunk_equivalence"};
  constexpr std::int64_t kMax = 16;
  for (const auto& cfg : workload::toy_models()) {
    const auto tpl = workload::build_layer_template(cfg);
    for (const std::int64_t len : {1024, 4096}) {
      for (const double rm : {0.2, 0.5, 0.8}) {
        const auto masked = static_cast<std::int64_t>(std::llround(rm * static_cast<double>(len)));
        const auto b = workload::step_bindings(len, masked);
        const Bytes top = chunker::evaluate_peak(tpl.graph, b, {}).total_peak;
        const Bytes low = chunker::evaluate_peak(tpl.graph, b, {kMax, kMax}).total_peak;
        for (const Bytes budget : {top, low + (top - low) / 2, low + (top - low) / 8, low, low - 1}) {
          const auto brute = chunker::search_bruteforce(tpl.graph, b, budget, kMax);
          const auto greedy = chunker::search_bottleneck(tpl.graph, b, budget, {planner::kDefaultAlignment, kMax});
          ++r.cases;
          const bool same = brute.config == greedy.config;
          const bool cheap = !brute.config ||
                             greedy.evaluations <=
                                 static_cast<std::size_t>(brute.config->k_logits + brute.config->k_ffn);
          if (!same || !cheap) {
            json j = {{"model", cfg.name}, {"L", len}, {"M", masked}, {"budget", budget},
                      {"bruteforce", chunker::to_json(brute)}, {"bottleneck", chunker::to_json(greedy)}};
            fail(r, std::move(j));
          }
        }
      }
    }
  }
  return r;
}

CheckResult kernel_oracle(const Options& o) {
  CheckResult r{"kernel_oracle"};
  const kernel::Tiles tiles[] = {{1, 1, 1}, {2, 3, 5}, {4, 8, 4}, {16, 16, 16}};
  for (std::size_t i = 0; i < o.kernel_cases; ++i) {
    const auto s = case_seed(o.seed, 4, i);
    std::mt19937_64 rng(s);
    auto below = [&](std::uint64_t n) { return rng() % n; };
    const std::size_t n = 1 + below(12), d = 1 + below(12), v = 1 + below(12);
    kernel::Matrix<double> h(n, d), w(d, v);
    for (auto& x : h.data) x = static_cast<double>(static_cast<std::int64_t>(below(2001)) - 1000) / 37.0;
    for (auto& x : w.data) x = static_cast<double>(static_cast<std::int64_t>(below(2001)) - 1000) / 91.0;
    std::vector<std::int64_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = static_cast<std::int64_t>(k);
    for (std::size_t k = n; k > 1; --k) std::swap(idx[k - 1], idx[below(k)]);
    idx.resize(1 + below(n));
    const auto expect = kernel::gemm_reference(kernel::gather_rows(h, idx), w);
    for (const auto& t : tiles) {
      const auto got = kernel::gather_gemm<double>({&h, &w, idx, t, 1});
      ++r.cases;
      if (!(got.logits == expect) || got.scratch.peak_elements > kernel::ScratchAccount::bound(t)) {
        fail(r, {{"case", i}, {"case_seed", s}, {"tiles", {t.t_m, t.t_d, t.t_v}},
                 {"scratch", got.scratch.peak_elements}});
      }
    }
  }
  return r;
}

CheckResult vmm_tightness(const Options& o) {
  CheckResult r{"vmm_tightness"};
  for (std::size_t i = 0; i < o.vmm_cases; ++i) {
    const auto s = case_seed(o.seed, 5, i);
    const auto tpl = random_graph::random_template(s);
    const auto g = graph::instantiate(tpl, {});
    const auto table = liveness::analyze(g);
    const auto plan = planner::plan_first_fit(planning_table(table, o.inject));
    auto ws = vmm::Workspace::reserve(plan.workspace_size + vmm::kHostPage, vmm::kHostPage);
    ws.commit_to(plan.workspace_size);
    const auto report = vmm::execute_plan(ws, plan, g);
    ++r.cases;
    if (ws.committed_bytes() - plan.workspace_size >= ws.page_size() || !report.clean()) {
      fail(r, {{"case", i}, {"case_seed", s}, {"report", vmm::to_json(report)},
               {"graph", graph::to_json(tpl)}});
    }
  }
  // A plan that stacks two live groups on one offset must be caught.
  auto g = graph::instantiate(random_graph::random_template(case_seed(o.seed, 5, o.vmm_cases)), {});
  const auto table = liveness::analyze(g);
  auto plan = planner::plan_first_fit(table);
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  for (std::size_t a = 0; a < table.groups.size() && !pair; ++a) {
    for (std::size_t b = a + 1; b < table.groups.size() && !pair; ++b) {
      if (table.groups[a].size && table.groups[b].size && table.groups[a].overlaps(table.groups[b])) {
        pair = {a, b};
      }
    }
  }
  if (pair) {
    plan.offsets[pair->second] = plan.offsets[pair->first];
    auto ws = vmm::Workspace::reserve(plan.workspace_size + vmm::kHostPage, vmm::kHostPage);
    ws.commit_to(plan.workspace_size);
    ++r.cases;
    if (vmm::execute_plan(ws, plan, g).clean()) {
      fail(r, {{"injected_overlap", {pair->first, pair->second}}, {"detected", false}});
    }
  }
  return r;
}

}  // namespace

Report run(const Options& options) {
  Report report;
  report.seed = options.seed;
  report.injection = options.inject == Injection::none ? "none" : "planner-off-by-one";
  report.checks.push_back(plan_validity(options));
  report.checks.push_back(oracle_dominance(options));
  report.checks.push_back(chunk_equivalence(options));
  report.checks.push_back(kernel_oracle(options));
  report.checks.push_back(vmm_tightness(options));
  return report;
}

json to_json(const Report& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"cases", c.cases},
                      {"failures", c.failures},
                      {"passed", c.passed()},
                      {"counterexample", c.counterexample ? *c.counterexample : json(nullptr)}});
  }
  return {{"seed", report.seed}, {"injection", report.injection}, {"passed", report.passed()},
          {"checks", std::move(checks)}};
}

void write_csv(std::ostream& os, const Report& report) {
  os << "check,cases,failures,status\n";
  for (const auto& c : report.checks) {
    os << c.name << ',' << c.cases << ',' << c.failures << ',' << (c.passed() ? "pass" : "fail") << '\n';
  }
}

void print_table(std::ostream& os, const Report& report) {
  char line[128];
  std::snprintf(line, sizeof line, "%-20s %8s %9s  %s\n", "check", "cases", "failures", "status");
  os << line;
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof line, "%-20s %8zu %9zu  %s\n", c.name.c_str(), c.cases, c.failures,
                  c.passed() ? "PASS" : "FAIL");
    os << line;
  }
  os << (report.passed() ? "all checks passed" : "selftest FAILED") << " (seed " << report.seed << ")\n";
}

}  // namespace mosaic::selftest
