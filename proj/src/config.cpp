#include "tda/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "tda/csv.hpp"
#include "tda/errors.hpp"

namespace tda {

namespace {

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out))
        throw ConfigError(key + ": expected a finite number, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

Date parse_date(const std::string& key, const std::string& value) {
    auto d = Date::parse(value);
    if (!d) throw ConfigError(key + ": expected YYYY-MM-DD, got '" + value + "'");
    return *d;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(PipelineConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "data.source") c.data_source = value;
        else if (key == "data.cache_dir") c.cache_dir = value;
        else if (key == "data.date_column") c.date_column = value;
        else if (key == "data.symbol_column") c.symbol_column = value;
        else if (key == "data.close_column") c.close_column = value;
        else if (key == "data.regularize_max_fill") c.regularize_max_fill = parse_int(key, value);
        else if (key == "embedding.d") c.embedding.d = parse_int(key, value);
        else if (key == "embedding.w") c.embedding.w = parse_int(key, value);
        else if (key == "embedding.transform") c.embedding.transform = transform_from_string(value);
        else if (key == "persistence.threshold") {
            if (value == "enclosing")
                c.threshold = std::numeric_limits<double>::quiet_NaN();
            else
                c.threshold = parse_real(key, value);
        }
        else if (key == "persistence.dump_diagrams") c.dump_diagrams = parse_bool(key, value);
        else if (key == "landscape.p") c.landscape_p = parse_real(key, value);
        else if (key == "landscape.include_h0") c.include_h0 = parse_bool(key, value);
        else if (key == "rfm.lookback") c.lookback = parse_int(key, value);
        else if (key == "rfm.recency") c.recency = recency_mode_from_string(value);
        else if (key == "rfm.frequency") c.frequency = frequency_variant_from_string(value);
        else if (key == "allocation.mode") c.mode = allocation_mode_from_string(value);
        else if (key == "backtest.rebalance") c.rebalance = rebalance_frequency_from_string(value);
        else if (key == "backtest.from") c.from = parse_date(key, value);
        else if (key == "backtest.to") c.to = parse_date(key, value);
        else if (key == "output.dir") c.out_dir = value;
        else if (key == "jobs") c.jobs = parse_int(key, value);
        else if (key == "subset") c.subset = parse_int(key, value);
        else if (key == "report.symbol") c.report_symbol = value;
        else if (key == "report.volatility_window") c.volatility_window = parse_int(key, value);
        else if (key == "report.sharpe_window") c.sharpe_window = parse_int(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ParameterError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    PipelineConfig c;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        apply_config_entry(c, key, value);
    }
    return c;
}

PipelineConfig resolve_config(const std::optional<std::filesystem::path>& file,
                              const CliOverrides& o) {
    PipelineConfig c = file ? load_config_file(*file) : PipelineConfig{};
    if (o.jobs) c.jobs = *o.jobs;
    if (o.subset) c.subset = *o.subset;
    if (o.mode) c.mode = allocation_mode_from_string(*o.mode);
    if (o.recency) c.recency = recency_mode_from_string(*o.recency);
    if (o.from) c.from = parse_date("--from", *o.from);
    if (o.to) c.to = parse_date("--to", *o.to);
    if (o.out_dir) c.out_dir = *o.out_dir;
    c.validate();
    return c;
}

void PipelineConfig::validate() const {
    embedding.validate();
    if (!std::isnan(threshold) && threshold < 0.0)
        throw ConfigError("persistence.threshold must be >= 0 or 'enclosing'");
    if (landscape_p < 1.0) throw ConfigError("landscape.p must be >= 1");
    if (lookback < 1) throw ConfigError("rfm.lookback must be >= 1");
    if (to < from) throw ConfigError("backtest.to precedes backtest.from");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    if (subset < 0) throw ConfigError("subset must be >= 0");
    if (regularize_max_fill < 0) throw ConfigError("data.regularize_max_fill must be >= 0");
    if (volatility_window < 2) throw ConfigError("report.volatility_window must be >= 2");
    if (sharpe_window < 2) throw ConfigError("report.sharpe_window must be >= 2");
    if (out_dir.empty()) throw ConfigError("output.dir must not be empty");
}

std::map<std::string, std::string> PipelineConfig::snapshot() const {
    std::map<std::string, std::string> m;
    m["data.source"] = data_source;
    m["data.cache_dir"] = cache_dir;
    m["data.date_column"] = date_column;
    m["data.symbol_column"] = symbol_column;
    m["data.close_column"] = close_column;
    m["data.regularize_max_fill"] = std::to_string(regularize_max_fill);
    m["embedding.d"] = std::to_string(embedding.d);
    m["embedding.w"] = std::to_string(embedding.w);
    m["embedding.transform"] = to_string(embedding.transform);
    m["persistence.threshold"] = std::isnan(threshold) ? "enclosing" : format_double(threshold);
    m["persistence.dump_diagrams"] = dump_diagrams ? "true" : "false";
    m["landscape.p"] = format_double(landscape_p);
    m["landscape.include_h0"] = include_h0 ? "true" : "false";
    m["rfm.lookback"] = std::to_string(lookback);
    m["rfm.recency"] = to_string(recency);
    m["rfm.frequency"] = to_string(frequency);
    m["allocation.mode"] = to_string(mode);
    m["backtest.rebalance"] = to_string(rebalance);
    m["backtest.from"] = from.to_string();
    m["backtest.to"] = to.to_string();
    m["output.dir"] = out_dir;
    m["jobs"] = std::to_string(jobs);
    m["subset"] = std::to_string(subset);
    m["report.symbol"] = report_symbol;
    m["report.volatility_window"] = std::to_string(volatility_window);
    m["report.sharpe_window"] = std::to_string(sharpe_window);
    return m;
}

}  // namespace tda
