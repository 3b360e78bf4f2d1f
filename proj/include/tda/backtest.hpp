#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tda/dates.hpp"
#include "tda/market_data.hpp"
#include "tda/scoring.hpp"

namespace tda {

enum class RebalanceFrequency { daily, weekly, monthly };

RebalanceFrequency rebalance_frequency_from_string(const std::string& name);
std::string to_string(RebalanceFrequency f);

struct RebalanceSchedule {
    RebalanceFrequency frequency = RebalanceFrequency::daily;
    std::vector<Date> dates;  // strictly increasing, within the backtest range
};

// daily: every day; weekly: start + 7k; monthly: start, then the first day
// of each later calendar month in range.
RebalanceSchedule make_schedule(RebalanceFrequency f, Date start, Date end);

// Read access to the universe up to a fixed day. Any request for a later
// date throws LookaheadError; strategies see the market only through this.
class MarketView {
  public:
    MarketView(const MarketUniverse& universe, Date as_of)
        : universe_(&universe), as_of_(as_of) {}

    Date as_of() const { return as_of_; }

    // Exact observation at date, if the symbol traded that day.
    std::optional<double> close(const std::string& symbol, Date date) const;
    // Most recent observation at or before date.
    std::optional<double> last_close(const std::string& symbol, Date date) const;
    std::vector<std::string> symbols_priced(Date date) const;

  private:
    void guard(Date date) const;
    const MarketUniverse* universe_;
    Date as_of_;
};

using AllocationStrategy = std::function<AllocationVector(const MarketView&)>;

// Equal weight over every currency priced at the view's date.
AllocationVector naive_allocate(const MarketView& view);

struct DailyRow {
    Date date;
    double log_return = 0.0;
    double cumulative_log_return = 0.0;
    double cash_weight = 0.0;
};

struct BacktestResult {
    std::string strategy;
    std::vector<DailyRow> daily;
};

// Value-based accounting: holdings in units plus a zero-return cash bucket.
// Weights drift with prices between rebalances. A currency with no further
// prices is liquidated at its last close; a temporary gap carries at the
// last close. Target weights summing above 1 are scaled down to 1 (no
// leverage), so the cash weight stays in [0, 1].
BacktestResult run_backtest(const MarketUniverse& universe, const AllocationStrategy& strategy,
                            const RebalanceSchedule& schedule, Date start, Date end,
                            const std::string& name);

struct MonthlyRow {
    YearMonth month;
    double tda = 0.0;
    double naive = 0.0;
};

// 100 x sum of daily log returns per calendar month, one row per month.
std::vector<MonthlyRow> monthly_table(const BacktestResult& tda, const BacktestResult& naive);

}  // namespace tda
