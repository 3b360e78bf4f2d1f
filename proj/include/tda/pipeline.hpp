#pragma once

#include "tda/config.hpp"

namespace tda {

inline constexpr const char* kVersion = "1.0.0";

// Each stage reads its inputs from disk, writes its outputs plus a
// manifest_<stage>.json into the output directory, and returns 0. Failures
// are reported by throwing: ConfigError, DataError, or anything else for
// internal faults; the binary maps those to exit codes.
int cmd_ingest(const PipelineConfig& config);
int cmd_norms(const PipelineConfig& config);
int cmd_score(const PipelineConfig& config);
int cmd_backtest(const PipelineConfig& config);
int cmd_report(const PipelineConfig& config);

}  // namespace tda
