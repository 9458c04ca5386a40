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

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/caching_allocator.hpp"
#include "mosaic/chunker.hpp"
#include "mosaic/graph.hpp"
#include "mosaic/liveness.hpp"

namespace mosaic::workload {

enum class LogitsMode { eager, mask_only };
enum class ShiftMode { none, concat, in_place };

struct MoeConfig {
  std::int64_t n_experts = 1;
  std::int64_t top_k = 1;
};

/// Transformer stack dimensions. Values are user supplied; the shipped
/// configs are illustrative only.
struct ModelConfig {
  std::string name = "model";
  std::int64_t n_layers = 1;
  std::int64_t d_model = 1;
  std::int64_t d_ff = 1;
  std::int64_t n_heads = 1;
  std::int64_t vocab_size = 1;
  std::uint32_t element_size = 2;
  Bytes weights_bytes = 0;
  bool gated_ffn = true;
  LogitsMode logits_mode = LogitsMode::mask_only;
  ShiftMode shift_mode = ShiftMode::none;
  std::optional<MoeConfig> moe;
  // Keep an [n_heads, L, L] score tensor instead of fused attention.
  bool materialize_scores = false;

  /// Throws InputError when a dimension is < 1 or element_size is not 1/2/4/8.
  void validate() const;
};

/// Small illustrative stacks used by the tests and the selftest: a dense
/// gated model, one with the concat logits shift, and a top-2 MoE.
std::vector<ModelConfig> toy_models();
/// Two layers, d_model 8, d_ff 32, V 100, fp32, gated, mask-only logits.
ModelConfig tiny_model();

ModelConfig model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig load_model(const std::string& path);

/// Template plus the ops before which a fragile capture would break the graph.
struct LayerTemplate {
  graph::GraphTemplate graph;
  std::vector<std::string> break_before;  // op ids
};

/// Builds the whole-step template over symbols {L, M, K_logits, K_FFN}:
/// token bookkeeping, n_layers of (attention block, FFN block chunked by
/// K_FFN) and the logits block chunked by K_logits.
LayerTemplate build_layer_template(const ModelConfig& cfg);

struct ScenarioConfig {
  std::int64_t context_len = 0;  // L
  double prompt_ratio = 0.0;     // r_p in [0, 1)
  std::int64_t steps = 1;        // N
  std::optional<Bytes> budget;   // device bytes, weights included
  bool pin_step0_config = false;
  Bytes alignment = planner::kDefaultAlignment;
};

/// round((1 - r_p) * L); throws InputError unless it is >= 1.
std::int64_t output_length(std::int64_t context_len, double prompt_ratio);
/// Linear unmasking: M_n = round(out * (1 - n / N)) for n in [0, N).
std::vector<std::int64_t> mask_schedule(std::int64_t output_len, std::int64_t steps);

Bindings step_bindings(std::int64_t context_len, std::int64_t masked);

struct StepState {
  std::int64_t step = 0;
  std::int64_t masked = 0;
  double mask_ratio = 0.0;
};

struct StepSample {
  std::size_t op_index = 0;
  std::string op_kind;
  Component component = Component::other;  // largest component live at the op
  Bytes live_bytes = 0;
};

struct StepTrace {
  std::vector<StepSample> samples;
  Bytes peak = 0;
  double average = 0.0;
};

struct TraceMetrics {
  double par = 0.0;
  Component peak_component = Component::other;
  Bytes theoretical_peak = 0;  // planned workspace
  Bytes peak = 0;
  double average = 0.0;
};

StepTrace trace_step(const graph::ConcreteGraph& g, const liveness::LifetimeTable& table);
TraceMetrics metrics_of(const StepTrace& trace, Bytes theoretical_peak);

struct StepResult {
  StepState state;
  chunker::ChunkConfig config;
  std::size_t evaluations = 0;
  StepTrace trace;
  TraceMetrics metrics;
};

/// Runs every diffusion step: instantiate, chunk lazily when a budget is
/// given, plan, and trace. Throws Infeasible naming the first step that
/// cannot fit.
std::vector<StepResult> simulate_run(const ModelConfig& cfg, const ScenarioConfig& scen);

/// Evaluates a single step at a fixed config.
StepResult evaluate_step(const LayerTemplate& tpl, std::int64_t context_len, std::int64_t masked,
                         chunker::ChunkConfig config, Bytes alignment);

struct FeatureSet {
  bool global_plan = true;
  bool mask_only = true;
  bool chunking = true;
};

/// The model as run under a feature set: eager logits without mask_only, and
/// the in-place shift when the global planner is on.
ModelConfig apply_features(ModelConfig cfg, FeatureSet features);

struct LmaxOptions {
  Bytes alignment = planner::kDefaultAlignment;
  allocsim::AllocatorConfig allocator;
  std::int64_t max_len = std::int64_t{1} << 22;
};

/// Largest L whose step-0 planned peak plus weights fits the budget; 0 when
/// even L = 1 does not. Throws AnalysisError if feasibility is not monotone
/// over the probed lengths.
std::int64_t find_lmax(const ModelConfig& cfg, double prompt_ratio, Bytes budget,
                       FeatureSet features, const LmaxOptions& options = {});

/// Step-0 activation peak under a feature set; nullopt when chunk search
/// finds no feasible config within `activation_budget`.
std::optional<Bytes> step0_peak(const ModelConfig& cfg, std::int64_t context_len,
                                double prompt_ratio, FeatureSet features,
                                Bytes activation_budget, const LmaxOptions& options = {});

struct ParRow {
  std::int64_t context_len = 0;
  double par_unchunked = 0.0;
  double par_mosaic = 0.0;
  chunker::ChunkConfig config;
  bool feasible = true;
  bool chunked() const { return config.k_logits > 1 || config.k_ffn > 1; }
};

/// Step-0 PAR of the unoptimized model (eager logits, no chunking) next to
/// mask-only logits with lazy chunking under `budget`.
std::vector<ParRow> par_curve(const ModelConfig& cfg, double prompt_ratio,
                              const std::vector<std::int64_t>& lengths, Bytes budget,
                              Bytes alignment = planner::kDefaultAlignment);

void write_trace_csv(std::ostream& os, const std::vector<StepResult>& steps);
/// L,r_m,peak,avg,PAR,peak_component,k_logits,k_ffn
void write_metrics_csv(std::ostream& os, std::int64_t context_len,
                       const std::vector<StepResult>& steps);
void write_par_csv(std::ostream& os, const std::vector<ParRow>& rows);

std::string_view to_string(LogitsMode m);
std::string_view to_string(ShiftMode m);

}  // namespace mosaic::workload
