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

#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mosaic/workload.hpp"

using namespace mosaic;
using namespace mosaic::workload;
using chunker::ChunkConfig;

namespace {

// Closed-form FFN bytes at the ffn_up instant of one unchunked layer.
Bytes ffn_closed_form(const ModelConfig& c, std::int64_t len) {
  const std::int64_t top_k = c.moe ? c.moe->top_k : 1;
  const std::int64_t per_row = c.gated_ffn ? 2 * c.d_ff : c.d_ff;
  return static_cast<Bytes>(len * top_k * per_row * c.element_size);
}

chunker::PeakReport peak_at(const ModelConfig& cfg, std::int64_t len, std::int64_t masked,
                            ChunkConfig k = {}) {
  return chunker::evaluate_peak(build_layer_template(cfg).graph, step_bindings(len, masked), k);
}

}  // namespace

TEST_CASE("closed-form component sizes on the tiny model") {
  const auto cfg = tiny_model();
  const auto r = peak_at(cfg, 10, 8);
  CHECK(r.component_peaks.at(Component::logits) == 8 * 100 * 4);
  CHECK(r.component_peaks.at(Component::ffn) == ffn_closed_form(cfg, 10));
  CHECK(ffn_closed_form(cfg, 10) == 2560);
  CHECK(r.bottleneck == Component::logits);
  CHECK(peak_at(cfg, 10, 1).bottleneck == Component::ffn);
}

TEST_CASE("peak component flips at the closed-form crossing count") {
  const auto cfg = tiny_model();
  const std::int64_t len = 10;
  const auto ffn = ffn_closed_form(cfg, len);
  const auto row = static_cast<Bytes>(cfg.vocab_size * cfg.element_size);
  const auto m_star = static_cast<std::int64_t>((ffn + row - 1) / row);
  CHECK(m_star == 7);
  for (std::int64_t m = 1; m <= len; ++m) {
    CAPTURE(m);
    const bool logits = static_cast<Bytes>(m) * row >= ffn;
    CHECK(logits == (m >= m_star));
    CHECK((peak_at(cfg, len, m).bottleneck == Component::logits) == logits);
  }
}

TEST_CASE("layer template structure") {
  for (const auto& cfg : toy_models()) {
    const auto tpl = build_layer_template(cfg);
    CHECK(tpl.graph.frozen());
    for (const char* s : {"L", "M", graph::kLogitsTrip, graph::kFfnTrip}) CHECK(tpl.graph.has_symbol(s));
    CHECK(tpl.graph.chunk_loops().size() == static_cast<std::size_t>(cfg.n_layers + 1));
    CHECK_FALSE(tpl.break_before.empty());
    bool scores = false;
    for (const auto& t : tpl.graph.tensors()) scores |= t.id.find("scores") != std::string::npos;
    CHECK_FALSE(scores);
  }
  auto cfg = tiny_model();
  cfg.materialize_scores = true;
  const auto tpl = build_layer_template(cfg);
  bool scores = false;
  for (const auto& t : tpl.graph.tensors()) scores |= t.id.find("scores") != std::string::npos;
  CHECK(scores);
}

TEST_CASE("linear mask schedule") {
  CHECK(output_length(10, 0.2) == 8);
  CHECK(mask_schedule(8, 4) == std::vector<std::int64_t>{8, 6, 4, 2});
  CHECK(mask_schedule(8, 1) == std::vector<std::int64_t>{8});
  CHECK_THROWS_AS(output_length(10, 0.99), InputError);
  CHECK_THROWS_AS(output_length(0, 0.5), InputError);
  CHECK_THROWS_AS(output_length(10, 1.0), InputError);
  for (std::int64_t out = 1; out <= 40; ++out) {
    for (std::int64_t n = 1; n <= 12; ++n) {
      const auto s = mask_schedule(out, n);
      REQUIRE(s.size() == static_cast<std::size_t>(n));
      CHECK(s.front() == out);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double exact = static_cast<double>(out) * (1.0 - static_cast<double>(i) / static_cast<double>(n));
        CHECK(std::fabs(static_cast<double>(s[i]) - exact) <= 0.5 + 1e-9);
        if (i > 0) CHECK(s[i] <= s[i - 1]);
      }
    }
  }
}

TEST_CASE("simulate_run on the tiny model") {
  ScenarioConfig scen;
  scen.context_len = 10;
  scen.prompt_ratio = 0.2;
  scen.steps = 4;
  const auto steps = simulate_run(tiny_model(), scen);
  REQUIRE(steps.size() == 4);
  const std::int64_t expect[] = {8, 6, 4, 2};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(steps[i].state.step == static_cast<std::int64_t>(i));
    CHECK(steps[i].state.masked == expect[i]);
    CHECK(steps[i].state.mask_ratio == doctest::Approx(static_cast<double>(expect[i]) / 10.0));
    const auto& m = steps[i].metrics;
    CHECK(m.par >= 1.0);
    CHECK(m.peak >= m.average);
    CHECK(m.average > 0.0);
    CHECK(m.theoretical_peak >= m.peak);
    Bytes mx = 0;
    double sum = 0;
    for (const auto& s : steps[i].trace.samples) {
      mx = std::max(mx, s.live_bytes);
      sum += static_cast<double>(s.live_bytes);
    }
    CHECK(mx == m.peak);
    CHECK(sum / static_cast<double>(steps[i].trace.samples.size()) == doctest::Approx(m.average));
  }
  CHECK(steps[0].metrics.peak_component == Component::logits);
  CHECK(steps[3].metrics.peak_component == Component::ffn);

  scen.steps = 1;
  const auto one = simulate_run(tiny_model(), scen);
  REQUIRE(one.size() == 1);
  CHECK(one[0].state.masked == 8);
}

TEST_CASE("simulate_run chunks lazily under a budget") {
  const auto cfg = toy_models()[0];
  ScenarioConfig scen;
  scen.context_len = 4096;
  scen.prompt_ratio = 0.2;
  scen.steps = 4;
  const auto free_run = simulate_run(cfg, scen);
  for (const auto& s : free_run) CHECK(s.config == ChunkConfig{});

  scen.budget = cfg.weights_bytes + free_run[0].metrics.theoretical_peak / 2;
  const auto run = simulate_run(cfg, scen);
  CHECK(run[0].config != ChunkConfig{});
  for (const auto& s : run) CHECK(s.metrics.theoretical_peak + cfg.weights_bytes <= *scen.budget);

  scen.budget = cfg.weights_bytes + 1;
  try {
    simulate_run(cfg, scen);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("mask-only logits never exceed eager") {
  for (auto cfg : toy_models()) {
    cfg.shift_mode = ShiftMode::none;
    auto eager = cfg;
    eager.logits_mode = LogitsMode::eager;
    auto masked = cfg;
    masked.logits_mode = LogitsMode::mask_only;
    for (const std::int64_t len : {256, 1024}) {
      for (const std::int64_t m : {std::int64_t{1}, len / 4, len / 2, len - 1}) {
        const auto e = peak_at(eager, len, m);
        const auto k = peak_at(masked, len, m);
        CAPTURE(cfg.name);
        CAPTURE(m);
        CHECK(k.total_peak <= e.total_peak);
        if (e.bottleneck == Component::logits) CHECK(k.total_peak < e.total_peak);
      }
    }
  }
}

TEST_CASE("in-place shift never exceeds concat") {
  for (auto cfg : toy_models()) {
    for (const auto mode : {LogitsMode::eager, LogitsMode::mask_only}) {
      cfg.logits_mode = mode;
      auto concat = cfg;
      concat.shift_mode = ShiftMode::concat;
      auto inplace = cfg;
      inplace.shift_mode = ShiftMode::in_place;
      for (const std::int64_t len : {128, 2048}) {
        const auto c = peak_at(concat, len, len / 2);
        const auto i = peak_at(inplace, len, len / 2);
        CHECK(i.total_peak <= c.total_peak);
        if (c.bottleneck == Component::logits) CHECK(i.total_peak < c.total_peak);
      }
    }
  }
}

TEST_CASE("MoE activation bytes scale by top_k") {
  auto dense = toy_models()[0];
  auto moe1 = dense;
  moe1.moe = MoeConfig{8, 1};
  auto moe2 = dense;
  moe2.moe = MoeConfig{8, 2};
  for (const std::int64_t len : {64, 512}) {
    const auto a = peak_at(dense, len, 1);
    const auto b = peak_at(moe1, len, 1);
    const auto c = peak_at(moe2, len, 1);
    CHECK(a.total_peak == b.total_peak);
    CHECK(a.component_peaks == b.component_peaks);
    CHECK(c.component_peaks.at(Component::ffn) == 2 * a.component_peaks.at(Component::ffn));
    CHECK(c.component_peaks.at(Component::ffn) == ffn_closed_form(moe2, len));
  }
}

TEST_CASE("peak is monotone in L at fixed mask ratio and config") {
  for (const auto& cfg : toy_models()) {
    const auto tpl = build_layer_template(cfg);
    for (const ChunkConfig k : {ChunkConfig{1, 1}, ChunkConfig{3, 2}}) {
      Bytes prev = 0;
      for (std::int64_t len = 8; len <= 2048; len = len * 3 / 2) {
        const auto p = chunker::evaluate_peak(tpl.graph, step_bindings(len, len / 2), k).total_peak;
        CHECK(p >= prev);
        prev = p;
      }
    }
  }
}

TEST_CASE("forced chunking lowers PAR at long context") {
  for (const auto& cfg : toy_models()) {
    const auto tpl = build_layer_template(cfg);
    const auto base = evaluate_step(tpl, 4096, 3276, {1, 1}, planner::kDefaultAlignment);
    const auto chunked = evaluate_step(tpl, 4096, 3276, {4, 4}, planner::kDefaultAlignment);
    CAPTURE(cfg.name);
    CHECK(chunked.metrics.par < base.metrics.par);
    CHECK(chunked.metrics.peak < base.metrics.peak);
    MESSAGE(cfg.name << " PAR ratio " << base.metrics.par / chunked.metrics.par);
  }
}

TEST_CASE("apply_features") {
  auto cfg = toy_models()[1];
  REQUIRE(cfg.shift_mode == ShiftMode::concat);
  auto a = apply_features(cfg, {false, false, false});
  CHECK(a.logits_mode == LogitsMode::eager);
  CHECK(a.shift_mode == ShiftMode::concat);
  a = apply_features(cfg, {true, true, false});
  CHECK(a.logits_mode == LogitsMode::mask_only);
  CHECK(a.shift_mode == ShiftMode::in_place);
}

TEST_CASE("find_lmax at a constructed boundary") {
  const auto cfg = toy_models()[0];
  const FeatureSet features{true, true, false};
  const auto peak = step0_peak(cfg, 1000, 0.5, features, ~Bytes{0});
  REQUIRE(peak.has_value());
  CHECK(find_lmax(cfg, 0.5, cfg.weights_bytes + *peak, features) == 1000);
  CHECK(find_lmax(cfg, 0.5, cfg.weights_bytes + *peak - 1, features) < 1000);
  CHECK(find_lmax(cfg, 0.5, cfg.weights_bytes, features) == 0);
}

TEST_CASE("each feature strictly raises L_max") {
  for (const auto& cfg : toy_models()) {
    const Bytes budget = cfg.weights_bytes + 32 * kMiB;
    const auto g = find_lmax(cfg, 0.5, budget, {true, false, false});
    const auto gm = find_lmax(cfg, 0.5, budget, {true, true, false});
    const auto gmc = find_lmax(cfg, 0.5, budget, {true, true, true});
    CAPTURE(cfg.name);
    CHECK(g > 0);
    CHECK(g < gm);
    CHECK(gm < gmc);
  }
}

TEST_CASE("chunked L_max sits at the non-chunkable floor") {
  for (const auto& cfg : toy_models()) {
    const Bytes act = 16 * kMiB;
    // Byte alignment: the floor counts unpadded live bytes.
    LmaxOptions opts;
    opts.alignment = 1;
    const auto lmax = find_lmax(cfg, 0.5, cfg.weights_bytes + act, {true, true, true}, opts);
    REQUIRE(lmax > 0);
    CHECK(find_lmax(cfg, 0.5, cfg.weights_bytes + act, {true, true, true}) <= lmax);
    const auto tpl = build_layer_template(apply_features(cfg, {true, true, true}));
    const auto floor_at = [&](std::int64_t len) {
      return chunker::evaluate_peak(tpl.graph, step_bindings(len, output_length(len, 0.5)), {}).floor;
    };
    CAPTURE(cfg.name);
    CHECK(floor_at(lmax) <= act);
    CHECK(floor_at(lmax + 1) > act);
  }
}

TEST_CASE("par_curve") {
  for (const auto& cfg : toy_models()) {
    const Bytes budget = cfg.weights_bytes + 24 * kMiB;
    const auto rows = par_curve(cfg, 0.2, {128, 512, 2048, 4096, 8192}, budget);
    REQUIRE(rows.size() == 5);
    CAPTURE(cfg.name);
    CHECK_FALSE(rows[0].chunked());
    CHECK(rows[0].par_mosaic < rows[0].par_unchunked);
    bool any_chunked = false;
    for (const auto& r : rows) {
      if (!r.feasible) continue;
      CHECK(r.par_mosaic >= 1.0);
      CHECK(r.par_unchunked >= 1.0);
      if (r.chunked()) {
        any_chunked = true;
        CHECK(r.par_mosaic <= r.par_unchunked);
      }
    }
    CHECK(any_chunked);
    std::ostringstream os;
    write_par_csv(os, rows);
    CHECK(os.str().rfind("L,PAR_unchunked,PAR_mosaic,k_logits,k_ffn,feasible\n", 0) == 0);
  }
  CHECK_THROWS_AS(par_curve(tiny_model(), 0.2, {0}, kGiB), InputError);
}

TEST_CASE("metrics and trace CSV") {
  ScenarioConfig scen;
  scen.context_len = 10;
  scen.prompt_ratio = 0.2;
  scen.steps = 2;
  const auto steps = simulate_run(tiny_model(), scen);
  std::ostringstream m;
  write_metrics_csv(m, 10, steps);
  std::string line;
  std::istringstream in(m.str());
  std::getline(in, line);
  CHECK(line == "L,r_m,peak,avg,PAR,peak_component,k_logits,k_ffn");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::ostringstream t;
  write_trace_csv(t, steps);
  CHECK(t.str().rfind("step,op_index,op_kind,component,live_bytes\n", 0) == 0);
}

TEST_CASE("model config JSON") {
  for (const auto& cfg : toy_models()) {
    const auto back = model_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
  }
  auto j = to_json(tiny_model());
  j["weights_bytes"] = "2MiB";
  CHECK(model_from_json(j).weights_bytes == 2 * kMiB);
  j["comment"] = "illustrative";
  CHECK_NOTHROW(model_from_json(j));
  auto bad = j;
  bad["d_modle"] = 3;
  CHECK_THROWS_AS(model_from_json(bad), InputError);
  bad = j;
  bad["d_model"] = 0;
  CHECK_THROWS_AS(model_from_json(bad), InputError);
  bad = j;
  bad["element_size"] = 3;
  CHECK_THROWS_AS(model_from_json(bad), InputError);
  bad = j;
  bad["logits_mode"] = "lazy";
  CHECK_THROWS_AS(model_from_json(bad), InputError);
}
