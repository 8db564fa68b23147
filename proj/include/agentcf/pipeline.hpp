#pragma once

#include <string>

#include "agentcf/config.hpp"

namespace agentcf {

/// Run-directory commands shared by the CLI and the acceptance suite. Each
/// writes versioned artifacts into cfg.run_dir and refuses to clobber
/// existing outputs unless `force` is set. A frozen copy of the resolved
/// config is kept alongside the outputs.
struct PipelineOptions {
  bool force = false;
  bool resume = false;  // train only
};

void run_ingest(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_sample(const RunConfig& cfg, const PipelineOptions& opts = {});
std::string run_stats(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_train(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_eval_cmd(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_probe_bias(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_probe_propagation(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_warmup_cold(const RunConfig& cfg, const PipelineOptions& opts = {});
void run_reviews(const RunConfig& cfg, const PipelineOptions& opts = {});

/// The dataset the pipeline operates on: the sampled snapshot when present,
/// otherwise a fresh ingest of the configured source files.
Dataset pipeline_dataset(const RunConfig& cfg);

}  // namespace agentcf
