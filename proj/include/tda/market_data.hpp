#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tda/dates.hpp"

namespace tda {

struct PricePoint {
    Date date;
    double close = 0.0;  // USD, strictly positive
};

// One cryptocurrency's daily close series. Dates strictly increasing, at most
// one observation per day, all closes positive and finite.
class PriceSeries {
public:
    PriceSeries() = default;
    // Validates the invariants; throws DataError on violation.
    PriceSeries(std::string symbol, std::vector<PricePoint> observations);

    const std::string& symbol() const { return symbol_; }
    const std::vector<PricePoint>& observations() const { return obs_; }
    size_t size() const { return obs_.size(); }
    bool empty() const { return obs_.empty(); }
    Date first_date() const { return obs_.front().date; }
    Date last_date() const { return obs_.back().date; }
    std::optional<double> close_at(Date d) const;

private:
    std::string symbol_;
    std::vector<PricePoint> obs_;
};

struct ReturnPoint {
    Date date;
    double log_return = 0.0;
};

struct ReturnSeries {
    std::string symbol;
    std::vector<ReturnPoint> observations;
};

// Immutable collection of price series keyed by symbol; safe to share across
// worker threads once built.
class MarketUniverse {
public:
    MarketUniverse() = default;
    explicit MarketUniverse(std::vector<PriceSeries> series);

    const std::map<std::string, PriceSeries>& series() const { return series_; }
    const PriceSeries* find(const std::string& symbol) const;
    std::vector<std::string> symbols() const;
    size_t size() const { return series_.size(); }
    std::pair<Date, Date> date_range() const { return {first_, last_}; }
    // Symbols with an observation on exactly this date.
    std::vector<std::string> symbols_priced_at(Date d) const;

private:
    std::map<std::string, PriceSeries> series_;
    Date first_{0}, last_{0};
};

struct CsvSchema {
    std::string date_column = "date";
    std::string symbol_column = "symbol";
    std::string close_column = "close";
};

struct RejectedRow {
    size_t line;  // 1-based line number in the file, header = line 1
    std::string reason;
};

struct IngestReport {
    size_t data_rows = 0;  // non-blank rows after the header
    size_t accepted = 0;
    std::vector<RejectedRow> rejected;
};

// Loads and validates a price CSV. Rows violating the PriceSeries invariants
// are recorded in the report, never silently dropped. Throws DataError when
// the file is unreadable or a required column is missing.
MarketUniverse ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {},
                          IngestReport* report = nullptr);

// Downloads url into cache_dir/<sha256(url)>.csv, or returns the cached copy.
// Records the content checksum in a .sha256 sidecar (and via checksum_out).
std::filesystem::path fetch_dataset(const std::string& url, const std::filesystem::path& cache_dir,
                                    std::string* checksum_out = nullptr);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::filesystem::path& path);

// log_return_t = ln(close_t) - ln(close_{t-1}) over consecutive observations.
ReturnSeries log_returns(const PriceSeries& series);

struct DatedValue {
    Date date;
    double value = 0.0;
};

// Sample standard deviation over each full trailing window, annualized by
// sqrt(365); dated by window end. Windows that do not fill are omitted.
std::vector<DatedValue> rolling_volatility(const ReturnSeries& returns, int window);

struct SharpePoint {
    Date date;
    std::optional<double> sharpe;  // nullopt when the window std is zero
};

// (mean daily log return / sample std) * sqrt(365), risk-free rate 0.
std::vector<SharpePoint> rolling_sharpe(const ReturnSeries& returns, int window = 60);

// Gap policy ahead of delay embedding: gaps of at most max_fill_days missing
// days are forward-filled at the last close; a longer gap splits the series
// and only the longest contiguous segment (ties: the latest) is kept.
PriceSeries regularize(const PriceSeries& series, int max_fill_days = 3);

}  // namespace tda
