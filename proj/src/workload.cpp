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

#include "mosaic/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "mosaic/allocsim.hpp"
#include "mosaic/graph_io.hpp"
#include "mosaic/planner.hpp"

namespace mosaic::workload {

using chunker::ChunkConfig;
using graph::GraphTemplate;
using graph::OpDecl;
using graph::TensorDecl;
using nlohmann::json;

std::string_view to_string(LogitsMode m) { return m == LogitsMode::eager ? "eager" : "mask_only"; }

std::string_view to_string(ShiftMode m) {
  switch (m) {
    case ShiftMode::none: return "none";
    case ShiftMode::concat: return "concat";
    case ShiftMode::in_place: return "in_place";
  }
  return "none";
}

void ModelConfig::validate() const {
  auto positive = [&](std::int64_t v, const char* field) {
    if (v < 1) throw InputError(name + ": " + field + " must be >= 1");
  };
  positive(n_layers, "n_layers");
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(n_heads, "n_heads");
  positive(vocab_size, "vocab_size");
  if (element_size != 1 && element_size != 2 && element_size != 4 && element_size != 8) {
    throw InputError(name + ": element_size must be one of 1, 2, 4, 8");
  }
  if (moe) {
    positive(moe->n_experts, "moe.n_experts");
    positive(moe->top_k, "moe.top_k");
    if (moe->top_k > moe->n_experts) throw InputError(name + ": moe.top_k exceeds n_experts");
  }
}

std::vector<ModelConfig> toy_models() {
  ModelConfig llada;
  llada.name = "toy-llada";
  llada.n_layers = 2;
  llada.d_model = 256;
  llada.d_ff = 896;
  llada.n_heads = 4;
  llada.vocab_size = 4096;
  llada.element_size = 2;
  llada.weights_bytes = 64 * kMiB;

  ModelConfig dream = llada;
  dream.name = "toy-dream";
  dream.d_model = 224;
  dream.d_ff = 1216;
  dream.vocab_size = 3000;
  dream.shift_mode = ShiftMode::concat;

  ModelConfig moe = llada;
  moe.name = "toy-moe";
  moe.d_model = 128;
  moe.d_ff = 256;
  moe.vocab_size = 2048;
  moe.moe = MoeConfig{8, 2};
  return {llada, dream, moe};
}

ModelConfig tiny_model() {
  ModelConfig cfg;
  cfg.name = "tiny";
  cfg.n_layers = 2;
  cfg.d_model = 8;
  cfg.d_ff = 32;
  cfg.n_heads = 2;
  cfg.vocab_size = 100;
  cfg.element_size = 4;
  cfg.weights_bytes = 64 * kKiB;
  return cfg;
}

namespace {

std::int64_t get_dim(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw InputError(std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

ModelConfig model_from_json(const json& j) {
  static const std::set<std::string> known = {
      "name", "n_layers", "d_model", "d_ff", "n_heads", "vocab_size", "element_size",
      "weights_bytes", "gated_ffn", "logits_mode", "shift_mode", "moe", "materialize_scores",
      "comment"};
  if (!j.is_object()) throw InputError("model config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InputError("unknown model config key '" + key + "'");
  }
  ModelConfig cfg;
  try {
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    cfg.n_layers = get_dim(j, "n_layers");
    cfg.d_model = get_dim(j, "d_model");
    cfg.d_ff = get_dim(j, "d_ff");
    cfg.n_heads = j.contains("n_heads") ? get_dim(j, "n_heads") : 1;
    cfg.vocab_size = get_dim(j, "vocab_size");
    cfg.element_size = static_cast<std::uint32_t>(get_dim(j, "element_size"));
    if (j.contains("weights_bytes")) {
      const auto& w = j.at("weights_bytes");
      cfg.weights_bytes = w.is_string() ? parse_bytes(w.get<std::string>()) : w.get<Bytes>();
    }
    if (j.contains("gated_ffn")) cfg.gated_ffn = j.at("gated_ffn").get<bool>();
    if (j.contains("materialize_scores")) cfg.materialize_scores = j.at("materialize_scores").get<bool>();
    if (j.contains("logits_mode")) {
      auto m = j.at("logits_mode").get<std::string>();
      if (m == "eager") cfg.logits_mode = LogitsMode::eager;
      else if (m == "mask_only") cfg.logits_mode = LogitsMode::mask_only;
      else throw InputError("logits_mode must be eager or mask_only");
    }
    if (j.contains("shift_mode")) {
      auto m = j.at("shift_mode").get<std::string>();
      if (m == "none") cfg.shift_mode = ShiftMode::none;
      else if (m == "concat") cfg.shift_mode = ShiftMode::concat;
      else if (m == "in_place") cfg.shift_mode = ShiftMode::in_place;
      else throw InputError("shift_mode must be none, concat or in_place");
    }
    if (j.contains("moe") && !j.at("moe").is_null()) {
      MoeConfig moe;
      moe.n_experts = get_dim(j.at("moe"), "n_experts");
      moe.top_k = get_dim(j.at("moe"), "top_k");
      cfg.moe = moe;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const ModelConfig& cfg) {
  json j = {{"name", cfg.name},
            {"n_layers", cfg.n_layers},
            {"d_model", cfg.d_model},
            {"d_ff", cfg.d_ff},
            {"n_heads", cfg.n_heads},
            {"vocab_size", cfg.vocab_size},
            {"element_size", cfg.element_size},
            {"weights_bytes", cfg.weights_bytes},
            {"gated_ffn", cfg.gated_ffn},
            {"logits_mode", std::string(to_string(cfg.logits_mode))},
            {"shift_mode", std::string(to_string(cfg.shift_mode))},
            {"materialize_scores", cfg.materialize_scores}};
  if (cfg.moe) j["moe"] = {{"n_experts", cfg.moe->n_experts}, {"top_k", cfg.moe->top_k}};
  return j;
}

ModelConfig load_model(const std::string& path) {
  json j = graph::read_json_file(path);
  try {
    return model_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

namespace {

class Builder {
 public:
  explicit Builder(const ModelConfig& cfg)
      : cfg_(cfg), tpl_({"L", "M", graph::kLogitsTrip, graph::kFfnTrip}) {}

  void tensor(const std::string& id, std::vector<SymExpr> shape, Component tag,
              std::uint32_t elem = 0, bool input = false) {
    tpl_.add_tensor(TensorDecl{id, std::move(shape), elem ? elem : cfg_.element_size, tag, input});
  }

  void op(const std::string& id, const std::string& kind, std::vector<std::string> in,
          std::vector<std::string> out, std::map<std::string, std::string> in_place = {}) {
    tpl_.add_op(OpDecl{id, kind, std::move(in), std::move(out), std::move(in_place)});
  }

  LayerTemplate build() {
    const SymExpr L = SymExpr::sym("L");
    const SymExpr M = SymExpr::sym("M");
    const SymExpr d(cfg_.d_model);
    constexpr std::uint32_t kIndex = 4;

    // Token bookkeeping and sampling buffers live for the whole step.
    tensor("input_ids", {L}, Component::other, kIndex, true);
    tensor("tokens", {L}, Component::other, kIndex);
    op("load_tokens", "copy", {"input_ids"}, {"tokens"});
    tensor("mask_idx", {M}, Component::other, kIndex);
    tensor("confidence", {M}, Component::other, kIndex);
    tensor("candidates", {M}, Component::other, kIndex);
    op("prepare_masks", "mask_scan", {"tokens"}, {"mask_idx", "confidence", "candidates"});
    tensor("x0", {L, d}, Component::hidden);
    op("embed", "embedding", {"tokens"}, {"x0"});

    std::string h = "x0";
    for (std::int64_t i = 0; i < cfg_.n_layers; ++i) h = layer(i, h);

    tensor("hf", {L, d}, Component::hidden);
    op("final_norm", "rmsnorm", {h}, {"hf"}, {{"hf", h}});
    logits_block("hf");

    tensor("tokens_next", {L}, Component::other, kIndex);
    op("unmask", "unmask", {"tokens", "mask_idx", "confidence", "candidates"}, {"tokens_next"},
       {{"tokens_next", "tokens"}});

    tpl_.freeze();
    return LayerTemplate{std::move(tpl_), std::move(breaks_)};
  }

 private:
  std::string layer(std::int64_t i, const std::string& h_in) {
    const SymExpr L = SymExpr::sym("L");
    const SymExpr d(cfg_.d_model);
    const std::string p = "l" + std::to_string(i) + ".";

    tensor(p + "n1", {L, d}, Component::attention);
    op(p + "norm1", "rmsnorm", {h_in}, {p + "n1"});
    for (const char* t : {"q", "k", "v"}) tensor(p + t, {L, d}, Component::attention);
    op(p + "qkv_proj", "matmul", {p + "n1"}, {p + "q", p + "k", p + "v"});
    tensor(p + "attn_out", {L, d}, Component::attention);
    tensor(p + "attn_scratch", {L, d}, Component::attention);
    std::vector<std::string> attn_outputs = {p + "attn_out", p + "attn_scratch"};
    if (cfg_.materialize_scores) {
      tensor(p + "scores", {SymExpr(cfg_.n_heads), L, L}, Component::attention);
      attn_outputs.push_back(p + "scores");
    }
    op(p + "attention", cfg_.materialize_scores ? "attention" : "fused_attention",
       {p + "q", p + "k", p + "v"}, attn_outputs);
    tensor(p + "o", {L, d}, Component::attention);
    op(p + "o_proj", "matmul", {p + "attn_out"}, {p + "o"});
    const std::string h = p + "h";
    tensor(h, {L, d}, Component::hidden);
    op(p + "attn_residual", "add", {h_in, p + "o"}, {h}, {{h, h_in}});

    // FFN over row chunks; the pre-norm is fused into the up projection.
    const SymExpr rows = SymExpr::ceil(L, SymExpr::sym(graph::kFfnTrip));
    std::vector<SymExpr> wide = {rows, SymExpr(cfg_.d_ff)};
    std::vector<SymExpr> narrow = {rows, d};
    if (cfg_.moe) {
      wide.insert(wide.begin() + 1, SymExpr(cfg_.moe->top_k));
      narrow.insert(narrow.begin() + 1, SymExpr(cfg_.moe->top_k));
    }
    tensor(p + "up", wide, Component::ffn);
    std::vector<std::string> up_out = {p + "up"};
    if (cfg_.gated_ffn) {
      tensor(p + "gate", wide, Component::ffn);
      up_out.push_back(p + "gate");
    }
    op(p + "ffn_up", "matmul", {h}, up_out);
    breaks_.push_back(p + "ffn_up");
    tensor(p + "act", wide, Component::ffn);
    op(p + "ffn_act", cfg_.gated_ffn ? "swiglu" : "gelu", up_out, {p + "act"},
       {{p + "act", p + "up"}});
    tensor(p + "down", narrow, Component::ffn);
    op(p + "ffn_down", "matmul", {p + "act"}, {p + "down"});
    op(p + "ffn_residual", "add_rows", {h, p + "down"}, {});
    tpl_.add_chunk_loop({p + "ffn_up", p + "ffn_residual", graph::kFfnTrip});
    tpl_.add_barrier({{h}, p + "ffn_residual"});
    return h;
  }

  void logits_block(const std::string& hidden) {
    const SymExpr L = SymExpr::sym("L");
    const SymExpr M = SymExpr::sym("M");
    const SymExpr V(cfg_.vocab_size);
    const bool mask_only = cfg_.logits_mode == LogitsMode::mask_only;
    const SymExpr rows = SymExpr::ceil(mask_only ? M : L, SymExpr::sym(graph::kLogitsTrip));
    breaks_.push_back("final_norm");

    tensor("logits", {rows, V}, Component::logits);
    std::vector<std::string> head_in = {hidden};
    if (mask_only) head_in.push_back("mask_idx");
    op("lm_head", mask_only ? "gather_gemm" : "matmul", head_in, {"logits"});
    std::string scores = "logits";
    if (cfg_.shift_mode == ShiftMode::concat) {
      tensor("logits_shifted", {rows, V}, Component::logits);
      op("logits_shift", "shift_concat", {"logits"}, {"logits_shifted"});
      scores = "logits_shifted";
    } else if (cfg_.shift_mode == ShiftMode::in_place) {
      tensor("logits_shifted", {rows, V}, Component::logits);
      op("logits_shift", "shift_in_place", {"logits"}, {"logits_shifted"},
         {{"logits_shifted", "logits"}});
      scores = "logits_shifted";
    }
    op("sample", "sample", {scores, "mask_idx", "confidence", "candidates"}, {});
    tpl_.add_chunk_loop({"lm_head", "sample", graph::kLogitsTrip});
    tpl_.add_barrier({{hidden, "mask_idx", "confidence", "candidates"}, "sample"});
  }

  const ModelConfig& cfg_;
  GraphTemplate tpl_;
  std::vector<std::string> breaks_;
};

}  // namespace

LayerTemplate build_layer_template(const ModelConfig& cfg) {
  cfg.validate();
  return Builder(cfg).build();
}

std::int64_t output_length(std::int64_t context_len, double prompt_ratio) {
  if (context_len < 1) throw InputError("context length must be >= 1");
  if (!(prompt_ratio >= 0.0 && prompt_ratio < 1.0)) {
    throw InputError("prompt ratio must lie in [0, 1)");
  }
  const auto out = std::llround((1.0 - prompt_ratio) * static_cast<double>(context_len));
  if (out < 1) {
    throw InputError("output length round((1 - r_p) * L) is 0 for L = " +
                     std::to_string(context_len));
  }
  return out;
}

std::vector<std::int64_t> mask_schedule(std::int64_t output_len, std::int64_t steps) {
  if (steps < 1) throw InputError("steps must be >= 1");
  if (output_len < 0) throw InputError("output length must be >= 0");
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (std::int64_t n = 0; n < steps; ++n) {
    // Exact rational rounding of out * (N - n) / N, halves away from zero.
    const std::int64_t num = output_len * (steps - n);
    out.push_back((2 * num + steps) / (2 * steps));
  }
  return out;
}

Bindings step_bindings(std::int64_t context_len, std::int64_t masked) {
  return Bindings{{"L", context_len}, {"M", masked}};
}

StepTrace trace_step(const graph::ConcreteGraph& g, const liveness::LifetimeTable& table) {
  const auto profile = liveness::live_profile(table);
  const auto parts = liveness::component_profile(table);
  StepTrace trace;
  double sum = 0.0;
  for (std::size_t t = 0; t < g.ops.size(); ++t) {
    StepSample s;
    s.op_index = t;
    s.op_kind = g.ops[t].kind;
    s.live_bytes = t < profile.size() ? profile[t] : 0;
    if (t < parts.size()) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < parts[t].size(); ++c) {
        if (parts[t][c] > parts[t][best]) best = c;
      }
      s.component = kAllComponents[best];
    }
    trace.peak = std::max(trace.peak, s.live_bytes);
    sum += static_cast<double>(s.live_bytes);
    trace.samples.push_back(std::move(s));
  }
  if (!trace.samples.empty()) trace.average = sum / static_cast<double>(trace.samples.size());
  return trace;
}

TraceMetrics metrics_of(const StepTrace& trace, Bytes theoretical_peak) {
  TraceMetrics m;
  m.peak = trace.peak;
  m.average = trace.average;
  m.theoretical_peak = theoretical_peak;
  m.par = trace.average > 0.0 ? static_cast<double>(trace.peak) / trace.average : 1.0;
  // Later samples win ties, matching the chunker's peak attribution.
  for (const auto& s : trace.samples) {
    if (s.live_bytes == trace.peak) m.peak_component = s.component;
  }
  return m;
}

StepResult evaluate_step(const LayerTemplate& tpl, std::int64_t context_len, std::int64_t masked,
                         ChunkConfig config, Bytes alignment) {
  Bindings b = step_bindings(context_len, masked);
  b[graph::kLogitsTrip] = config.k_logits;
  b[graph::kFfnTrip] = config.k_ffn;
  const auto g = graph::instantiate(tpl.graph, b);
  const auto table = liveness::analyze(g);
  const auto plan = planner::plan_first_fit(table, alignment);
  StepResult r;
  r.state.masked = masked;
  r.state.mask_ratio = static_cast<double>(masked) / static_cast<double>(context_len);
  r.config = config;
  r.trace = trace_step(g, table);
  r.metrics = metrics_of(r.trace, plan.workspace_size);
  return r;
}

namespace {

Bytes activation_budget(const ModelConfig& cfg, Bytes budget, std::int64_t step) {
  if (budget <= cfg.weights_bytes) {
    throw Infeasible("step " + std::to_string(step) + ": budget " + format_bytes(budget) +
                     " does not exceed weights " + format_bytes(cfg.weights_bytes));
  }
  return budget - cfg.weights_bytes;
}

}  // namespace

std::vector<StepResult> simulate_run(const ModelConfig& cfg, const ScenarioConfig& scen) {
  const auto out_len = output_length(scen.context_len, scen.prompt_ratio);
  const auto schedule = mask_schedule(out_len, scen.steps);
  const auto tpl = build_layer_template(cfg);
  std::vector<StepResult> results;
  std::optional<ChunkConfig> pinned;
  for (std::int64_t n = 0; n < scen.steps; ++n) {
    const auto masked = schedule[static_cast<std::size_t>(n)];
    ChunkConfig config;
    std::size_t evaluations = 0;
    if (scen.budget) {
      const Bytes act = activation_budget(cfg, *scen.budget, n);
      if (pinned) {
        config = *pinned;
      } else {
        const auto outcome = chunker::search_bottleneck(
            tpl.graph, step_bindings(scen.context_len, masked), act, {scen.alignment, 0});
        evaluations = outcome.evaluations;
        if (!outcome.feasible()) {
          throw Infeasible("step " + std::to_string(n) + ": no chunk config fits " +
                           format_bytes(act) + " of activations (non-chunkable floor " +
                           format_bytes(outcome.floor) + ")");
        }
        config = *outcome.config;
        if (scen.pin_step0_config) pinned = config;
      }
    }
    auto r = evaluate_step(tpl, scen.context_len, masked, config, scen.alignment);
    if (scen.budget && r.metrics.theoretical_peak + cfg.weights_bytes > *scen.budget) {
      throw Infeasible("step " + std::to_string(n) + ": pinned config (" +
                       std::to_string(config.k_logits) + "," + std::to_string(config.k_ffn) +
                       ") overflows the budget");
    }
    r.state.step = n;
    r.evaluations = evaluations;
    results.push_back(std::move(r));
  }
  return results;
}

ModelConfig apply_features(ModelConfig cfg, FeatureSet features) {
  cfg.logits_mode = features.mask_only ? LogitsMode::mask_only : LogitsMode::eager;
  if (features.global_plan && cfg.shift_mode == ShiftMode::concat) cfg.shift_mode = ShiftMode::in_place;
  return cfg;
}

namespace {

std::optional<Bytes> peak_with(const LayerTemplate& tpl, std::int64_t context_len, double prompt_ratio,
                               FeatureSet features, Bytes act_budget, const LmaxOptions& options) {
  const auto masked = output_length(context_len, prompt_ratio);
  const Bindings b = step_bindings(context_len, masked);
  ChunkConfig config;
  if (features.chunking) {
    const auto outcome = chunker::search_bottleneck(tpl.graph, b, act_budget, {options.alignment, 0});
    if (!outcome.feasible()) return std::nullopt;
    config = *outcome.config;
    if (features.global_plan) return outcome.final_peak;
  }
  if (features.global_plan) {
    return chunker::evaluate_peak(tpl.graph, b, config, options.alignment).total_peak;
  }
  Bindings full = b;
  full[graph::kLogitsTrip] = config.k_logits;
  full[graph::kFfnTrip] = config.k_ffn;
  const auto g = graph::instantiate(tpl.graph, full);
  const auto table = liveness::analyze(g);
  allocsim::CachingAllocator alloc(options.allocator);
  allocsim::replay_myopic_step(alloc, table, allocsim::break_positions(tpl.graph, g, tpl.break_before),
                               options.alignment);
  return alloc.peak_reserved();
}

}  // namespace

std::optional<Bytes> step0_peak(const ModelConfig& cfg, std::int64_t context_len, double prompt_ratio,
                                FeatureSet features, Bytes activation_budget,
                                const LmaxOptions& options) {
  const auto tpl = build_layer_template(apply_features(cfg, features));
  return peak_with(tpl, context_len, prompt_ratio, features, activation_budget, options);
}

std::int64_t find_lmax(const ModelConfig& cfg, double prompt_ratio, Bytes budget, FeatureSet features,
                       const LmaxOptions& options) {
  if (budget <= cfg.weights_bytes) return 0;
  const Bytes act = budget - cfg.weights_bytes;
  const auto tpl = build_layer_template(apply_features(cfg, features));

  struct Probe {
    std::int64_t len;
    bool fits;
    Bytes peak;
  };
  std::vector<Probe> probes;
  auto fits = [&](std::int64_t len) {
    const auto peak = peak_with(tpl, len, prompt_ratio, features, act, options);
    const bool ok = peak && *peak <= act;
    probes.push_back({len, ok, peak.value_or(std::numeric_limits<Bytes>::max())});
    return ok;
  };

  // Shortest context with a non-empty output.
  std::int64_t lo = 1;
  while (std::llround((1.0 - prompt_ratio) * static_cast<double>(lo)) < 1) {
    if (prompt_ratio < 0.0 || prompt_ratio >= 1.0) throw InputError("prompt ratio must lie in [0, 1)");
    ++lo;
  }
  if (!fits(lo)) return 0;
  std::int64_t hi = lo;
  while (true) {
    if (hi >= options.max_len) {
      lo = options.max_len;
      hi = 0;
      break;
    }
    const std::int64_t next = std::min(hi * 2, options.max_len);
    if (!fits(next)) {
      lo = hi;
      hi = next;
      break;
    }
    hi = next;
  }
  if (hi != 0) {
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (fits(mid)) lo = mid;
      else hi = mid;
    }
  }

  std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.len < b.len; });
  for (std::size_t i = 1; i < probes.size(); ++i) {
    const auto& a = probes[i - 1];
    const auto& b = probes[i];
    if (b.fits && !a.fits) {
      throw AnalysisError("feasibility is not monotone in L: " + std::to_string(a.len) +
                          " overflows but " + std::to_string(b.len) + " fits");
    }
    if (!features.chunking && b.peak < a.peak) {
      throw AnalysisError("peak decreases from L = " + std::to_string(a.len) + " to L = " +
                          std::to_string(b.len));
    }
  }
  return lo;
}

std::vector<ParRow> par_curve(const ModelConfig& cfg, double prompt_ratio,
                              const std::vector<std::int64_t>& lengths, Bytes budget, Bytes alignment) {
  ModelConfig base = cfg;
  base.logits_mode = LogitsMode::eager;
  const auto base_tpl = build_layer_template(base);
  const auto mosaic_tpl = build_layer_template(apply_features(cfg, {true, true, true}));
  const Bytes act = budget > cfg.weights_bytes ? budget - cfg.weights_bytes : 0;

  std::vector<ParRow> rows;
  for (const auto len : lengths) {
    const auto masked = output_length(len, prompt_ratio);
    ParRow row;
    row.context_len = len;
    row.par_unchunked = evaluate_step(base_tpl, len, masked, {}, alignment).metrics.par;
    const auto outcome =
        chunker::search_bottleneck(mosaic_tpl.graph, step_bindings(len, masked), act, {alignment, 0});
    if (outcome.feasible()) {
      row.config = *outcome.config;
      row.par_mosaic = evaluate_step(mosaic_tpl, len, masked, row.config, alignment).metrics.par;
    } else {
      row.feasible = false;
      row.par_mosaic = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_trace_csv(std::ostream& os, const std::vector<StepResult>& steps) {
  os << "step,op_index,op_kind,component,live_bytes\n";
  for (const auto& s : steps) {
    for (const auto& sample : s.trace.samples) {
      os << s.state.step << ',' << sample.op_index << ',' << sample.op_kind << ','
         << to_string(sample.component) << ',' << sample.live_bytes << '\n';
    }
  }
}

void write_metrics_csv(std::ostream& os, std::int64_t context_len, const std::vector<StepResult>& steps) {
  os << "L,r_m,peak,avg,PAR,peak_component,k_logits,k_ffn\n";
  for (const auto& s : steps) {
    os << context_len << ',' << format_fixed(s.state.mask_ratio) << ',' << s.metrics.peak << ','
       << format_fixed(s.metrics.average, 3) << ',' << format_fixed(s.metrics.par) << ','
       << to_string(s.metrics.peak_component) << ',' << s.config.k_logits << ','
       << s.config.k_ffn << '\n';
  }
}

void write_par_csv(std::ostream& os, const std::vector<ParRow>& rows) {
  os << "L,PAR_unchunked,PAR_mosaic,k_logits,k_ffn,feasible\n";
  for (const auto& r : rows) {
    os << r.context_len << ',' << format_fixed(r.par_unchunked) << ','
       << (r.feasible ? format_fixed(r.par_mosaic) : std::string("nan")) << ','
       << r.config.k_logits << ',' << r.config.k_ffn << ',' << (r.feasible ? "true" : "false")
       << '\n';
  }
}

}  // namespace mosaic::workload
