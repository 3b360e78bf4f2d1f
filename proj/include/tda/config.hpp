#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "tda/backtest.hpp"
#include "tda/dates.hpp"
#include "tda/embedding.hpp"
#include "tda/landscape.hpp"
#include "tda/scoring.hpp"

namespace tda {

// Everything a run needs, resolved from defaults, an optional key=value
// config file, and command-line overrides, in that order of precedence
// (later wins). Unknown keys are rejected up front.
struct PipelineConfig {
    std::string data_source;  // data.source: CSV path or http(s) URL
    std::string cache_dir;    // data.cache_dir; empty -> <output.dir>/cache
    std::string date_column = "date";      // data.date_column
    std::string symbol_column = "symbol";  // data.symbol_column
    std::string close_column = "close";    // data.close_column
    int regularize_max_fill = 3;           // data.regularize_max_fill

    EmbeddingParams embedding;  // embedding.d, embedding.w, embedding.transform

    // persistence.threshold: "enclosing" (NaN here) or a number
    double threshold = std::numeric_limits<double>::quiet_NaN();
    bool dump_diagrams = false;  // persistence.dump_diagrams

    double landscape_p = 2.0;  // landscape.p
    bool include_h0 = false;   // landscape.include_h0

    int lookback = 30;                                        // rfm.lookback
    RecencyMode recency = RecencyMode::inverted;              // rfm.recency
    FrequencyVariant frequency = FrequencyVariant::count;     // rfm.frequency
    AllocationMode mode = AllocationMode::paper_literal;      // allocation.mode

    RebalanceFrequency rebalance = RebalanceFrequency::daily;  // backtest.rebalance
    Date from = Date::from_ymd(2017, 12, 17);                  // backtest.from
    Date to = Date::from_ymd(2019, 7, 5);                      // backtest.to

    std::string out_dir = "out";  // output.dir
    int jobs = 0;                 // 0 -> hardware concurrency
    int subset = 0;               // 0 -> all currencies, else N largest histories

    std::string report_symbol = "auto";  // report.symbol; auto -> longest history
    int volatility_window = 30;          // report.volatility_window
    int sharpe_window = 60;              // report.sharpe_window

    void validate() const;

    // Canonical key=value view of the resolved config; what the manifest
    // snapshots and what a round-trip reload must reproduce.
    std::map<std::string, std::string> snapshot() const;
};

struct CliOverrides {
    std::optional<int> jobs;
    std::optional<int> subset;
    std::optional<std::string> mode;
    std::optional<std::string> recency;
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::string> out_dir;
};

// Applies one `key = value` assignment. Unknown key or bad value -> ConfigError.
void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value);

// Lines of `key = value`; '#' starts a comment; blank lines ignored.
PipelineConfig load_config_file(const std::filesystem::path& path);

PipelineConfig resolve_config(const std::optional<std::filesystem::path>& file,
                              const CliOverrides& overrides);

}  // namespace tda
