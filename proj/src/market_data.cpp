#include "tda/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "tda/csv.hpp"
#include "tda/errors.hpp"

namespace tda {
namespace {

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    return v;
}

}  // namespace

PriceSeries::PriceSeries(std::string symbol, std::vector<PricePoint> observations)
    : symbol_(std::move(symbol)), obs_(std::move(observations)) {
    for (size_t i = 0; i < obs_.size(); ++i) {
        if (!(obs_[i].close > 0.0) || !std::isfinite(obs_[i].close))
            throw DataError(symbol_ + ": close must be positive and finite at " +
                            obs_[i].date.to_string());
        if (i > 0 && obs_[i].date <= obs_[i - 1].date)
            throw DataError(symbol_ + ": dates must be strictly increasing at " +
                            obs_[i].date.to_string());
    }
}

std::optional<double> PriceSeries::close_at(Date d) const {
    auto it = std::lower_bound(obs_.begin(), obs_.end(), d,
                               [](const PricePoint& p, Date x) { return p.date < x; });
    if (it == obs_.end() || it->date != d) return std::nullopt;
    return it->close;
}

MarketUniverse::MarketUniverse(std::vector<PriceSeries> all) {
    bool first_set = false;
    for (auto& s : all) {
        if (s.empty()) continue;
        if (!first_set) {
            first_ = s.first_date();
            last_ = s.last_date();
            first_set = true;
        } else {
            first_ = std::min(first_, s.first_date());
            last_ = std::max(last_, s.last_date());
        }
        auto [it, inserted] = series_.emplace(s.symbol(), std::move(s));
        if (!inserted) throw DataError("duplicate symbol: " + it->first);
    }
}

const PriceSeries* MarketUniverse::find(const std::string& symbol) const {
    auto it = series_.find(symbol);
    return it == series_.end() ? nullptr : &it->second;
}

std::vector<std::string> MarketUniverse::symbols() const {
    std::vector<std::string> out;
    out.reserve(series_.size());
    for (const auto& [sym, _] : series_) out.push_back(sym);
    return out;
}

std::vector<std::string> MarketUniverse::symbols_priced_at(Date d) const {
    std::vector<std::string> out;
    for (const auto& [sym, s] : series_)
        if (s.close_at(d)) out.push_back(sym);
    return out;
}

MarketUniverse ingest_csv(const std::filesystem::path& path, const CsvSchema& schema,
                          IngestReport* report) {
    CsvReader reader(path);
    const int date_col = reader.column(schema.date_column);
    const int symbol_col = reader.column(schema.symbol_column);
    const int close_col = reader.column(schema.close_column);
    if (date_col < 0) throw DataError(path.string() + ": missing column '" + schema.date_column + "'");
    if (symbol_col < 0)
        throw DataError(path.string() + ": missing column '" + schema.symbol_column + "'");
    if (close_col < 0)
        throw DataError(path.string() + ": missing column '" + schema.close_column + "'");
    const size_t needed = static_cast<size_t>(std::max({date_col, symbol_col, close_col})) + 1;

    IngestReport local;
    IngestReport& rep = report ? *report : local;

    struct RawRow {
        PricePoint point;
        size_t line;
    };
    std::unordered_map<std::string, std::vector<RawRow>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        ++rep.data_rows;
        const size_t line = reader.line_number();
        if (fields.size() < needed) {
            rep.rejected.push_back({line, "missing fields"});
            continue;
        }
        const std::string& symbol = fields[static_cast<size_t>(symbol_col)];
        if (symbol.empty()) {
            rep.rejected.push_back({line, "empty symbol"});
            continue;
        }
        if (symbol.find_first_of("\",\n") != std::string::npos) {
            rep.rejected.push_back({line, "symbol contains quote or separator"});
            continue;
        }
        auto date = Date::parse(fields[static_cast<size_t>(date_col)]);
        if (!date) {
            rep.rejected.push_back({line, "unparseable date '" +
                                              fields[static_cast<size_t>(date_col)] + "'"});
            continue;
        }
        auto close = parse_double(fields[static_cast<size_t>(close_col)]);
        if (!close) {
            rep.rejected.push_back({line, "unparseable close '" +
                                              fields[static_cast<size_t>(close_col)] + "'"});
            continue;
        }
        if (!std::isfinite(*close)) {
            rep.rejected.push_back({line, "non-finite close"});
            continue;
        }
        if (!(*close > 0.0)) {
            rep.rejected.push_back({line, "non-positive close"});
            continue;
        }
        rows[symbol].push_back({{*date, *close}, line});
    }

    std::vector<PriceSeries> series;
    series.reserve(rows.size());
    std::vector<std::string> syms;
    syms.reserve(rows.size());
    for (auto& [sym, _] : rows) syms.push_back(sym);
    std::sort(syms.begin(), syms.end());
    for (auto& sym : syms) {
        auto& raw = rows[sym];
        std::stable_sort(raw.begin(), raw.end(), [](const RawRow& a, const RawRow& b) {
            return a.point.date < b.point.date;
        });
        // Duplicate dates: keep the first occurrence in file order, report the rest.
        std::vector<PricePoint> obs;
        obs.reserve(raw.size());
        for (const auto& r : raw) {
            if (!obs.empty() && obs.back().date == r.point.date) {
                rep.rejected.push_back(
                    {r.line, sym + ": duplicate observation for " + r.point.date.to_string()});
                continue;
            }
            obs.push_back(r.point);
            ++rep.accepted;
        }
        series.emplace_back(sym, std::move(obs));
    }
    std::sort(rep.rejected.begin(), rep.rejected.end(),
              [](const RejectedRow& a, const RejectedRow& b) { return a.line < b.line; });
    return MarketUniverse(std::move(series));
}

ReturnSeries log_returns(const PriceSeries& series) {
    if (series.size() < 2)
        throw InsufficientDataError(series.symbol() + ": need at least 2 observations, have " +
                                    std::to_string(series.size()));
    ReturnSeries out;
    out.symbol = series.symbol();
    const auto& obs = series.observations();
    out.observations.reserve(obs.size() - 1);
    for (size_t i = 1; i < obs.size(); ++i)
        out.observations.push_back({obs[i].date, std::log(obs[i].close) - std::log(obs[i - 1].close)});
    return out;
}

namespace {

constexpr double kAnnualization = 19.1049731745428;  // sqrt(365)

struct WindowStats {
    double mean = 0.0;
    double sample_std = 0.0;
};

WindowStats window_stats(std::span<const ReturnPoint> window) {
    // A constant window has zero variance by definition, but the naive sums
    // below can land the mean an ulp off and report a tiny positive std,
    // turning a degenerate Sharpe window into a huge finite one.
    bool constant = true;
    for (const auto& r : window)
        if (r.log_return != window.front().log_return) {
            constant = false;
            break;
        }
    if (constant) return {window.front().log_return, 0.0};
    double mean = 0.0;
    for (const auto& r : window) mean += r.log_return;
    mean /= static_cast<double>(window.size());
    double ss = 0.0;
    for (const auto& r : window) {
        const double dev = r.log_return - mean;
        ss += dev * dev;
    }
    return {mean, std::sqrt(ss / static_cast<double>(window.size() - 1))};
}

}  // namespace

std::vector<DatedValue> rolling_volatility(const ReturnSeries& returns, int window) {
    if (window < 2) throw ParameterError("volatility window must be >= 2");
    std::vector<DatedValue> out;
    const auto& obs = returns.observations;
    if (obs.size() < static_cast<size_t>(window)) return out;
    for (size_t end = static_cast<size_t>(window); end <= obs.size(); ++end) {
        auto stats = window_stats(std::span(obs).subspan(end - window, window));
        out.push_back({obs[end - 1].date, stats.sample_std * kAnnualization});
    }
    return out;
}

std::vector<SharpePoint> rolling_sharpe(const ReturnSeries& returns, int window) {
    if (window < 2) throw ParameterError("sharpe window must be >= 2");
    std::vector<SharpePoint> out;
    const auto& obs = returns.observations;
    if (obs.size() < static_cast<size_t>(window)) return out;
    for (size_t end = static_cast<size_t>(window); end <= obs.size(); ++end) {
        auto stats = window_stats(std::span(obs).subspan(end - window, window));
        if (stats.sample_std == 0.0)
            out.push_back({obs[end - 1].date, std::nullopt});
        else
            out.push_back({obs[end - 1].date, stats.mean / stats.sample_std * kAnnualization});
    }
    return out;
}

PriceSeries regularize(const PriceSeries& series, int max_fill_days) {
    if (series.empty()) return series;
    const auto& obs = series.observations();
    std::vector<std::vector<PricePoint>> segments(1);
    segments.back().push_back(obs[0]);
    for (size_t i = 1; i < obs.size(); ++i) {
        const int32_t gap = obs[i].date - obs[i - 1].date;  // 1 = consecutive days
        if (gap <= 1 + max_fill_days) {
            const auto& prev = segments.back().back();
            for (int32_t k = 1; k < gap; ++k)
                segments.back().push_back({prev.date + k, prev.close});
            segments.back().push_back(obs[i]);
        } else {
            segments.emplace_back();
            segments.back().push_back(obs[i]);
        }
    }
    // Longest segment wins; on ties prefer the most recent one.
    size_t best = 0;
    for (size_t i = 1; i < segments.size(); ++i)
        if (segments[i].size() >= segments[best].size()) best = i;
    return PriceSeries(series.symbol(), std::move(segments[best]));
}

}  // namespace tda
