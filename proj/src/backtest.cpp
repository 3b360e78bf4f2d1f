#include "tda/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tda/errors.hpp"

namespace tda {

RebalanceFrequency rebalance_frequency_from_string(const std::string& name) {
    if (name == "daily") return RebalanceFrequency::daily;
    if (name == "weekly") return RebalanceFrequency::weekly;
    if (name == "monthly") return RebalanceFrequency::monthly;
    throw ConfigError("unknown rebalance frequency '" + name +
                      "' (expected daily, weekly or monthly)");
}

std::string to_string(RebalanceFrequency f) {
    switch (f) {
        case RebalanceFrequency::daily: return "daily";
        case RebalanceFrequency::weekly: return "weekly";
        case RebalanceFrequency::monthly: return "monthly";
    }
    throw std::logic_error("unreachable");
}

RebalanceSchedule make_schedule(RebalanceFrequency f, Date start, Date end) {
    if (end < start) throw ParameterError("schedule end precedes start");
    RebalanceSchedule s;
    s.frequency = f;
    switch (f) {
        case RebalanceFrequency::daily:
            for (Date d = start; d <= end; d = d + 1) s.dates.push_back(d);
            break;
        case RebalanceFrequency::weekly:
            for (Date d = start; d <= end; d = d + 7) s.dates.push_back(d);
            break;
        case RebalanceFrequency::monthly:
            s.dates.push_back(start);
            for (Date d = start + 1; d <= end; d = d + 1)
                if (d.day() == 1) s.dates.push_back(d);
            break;
    }
    return s;
}

void MarketView::guard(Date date) const {
    if (date > as_of_)
        throw LookaheadError("request for " + date.to_string() + " from a view fixed at " +
                             as_of_.to_string());
}

std::optional<double> MarketView::close(const std::string& symbol, Date date) const {
    guard(date);
    const PriceSeries* s = universe_->find(symbol);
    if (!s) return std::nullopt;
    return s->close_at(date);
}

std::optional<double> MarketView::last_close(const std::string& symbol, Date date) const {
    guard(date);
    const PriceSeries* s = universe_->find(symbol);
    if (!s) return std::nullopt;
    const auto& obs = s->observations();
    auto it = std::upper_bound(obs.begin(), obs.end(), date,
                               [](Date d, const PricePoint& p) { return d < p.date; });
    if (it == obs.begin()) return std::nullopt;
    return (it - 1)->close;
}

std::vector<std::string> MarketView::symbols_priced(Date date) const {
    guard(date);
    return universe_->symbols_priced_at(date);
}

AllocationVector naive_allocate(const MarketView& view) {
    const auto symbols = view.symbols_priced(view.as_of());
    if (symbols.empty())
        throw DataError("no currency priced at " + view.as_of().to_string());
    AllocationVector out;
    out.as_of = view.as_of();
    out.mode = AllocationMode::normalized;
    const double w = 1.0 / static_cast<double>(symbols.size());
    out.weights.reserve(symbols.size());
    for (const auto& s : symbols) out.weights.push_back({s, w});
    return out;
}

BacktestResult run_backtest(const MarketUniverse& universe, const AllocationStrategy& strategy,
                            const RebalanceSchedule& schedule, Date start, Date end,
                            const std::string& name) {
    if (end < start) throw ParameterError("backtest end precedes start");
    const auto [ufirst, ulast] = universe.date_range();
    if (start < ufirst || end > ulast)
        throw ParameterError("backtest range " + start.to_string() + ".." + end.to_string() +
                             " outside universe range " + ufirst.to_string() + ".." +
                             ulast.to_string());
    for (size_t i = 0; i < schedule.dates.size(); ++i) {
        if (schedule.dates[i] < start || schedule.dates[i] > end)
            throw ParameterError("rebalance date outside backtest range");
        if (i > 0 && !(schedule.dates[i - 1] < schedule.dates[i]))
            throw ParameterError("rebalance dates not strictly increasing");
    }

    BacktestResult result;
    result.strategy = name;
    std::map<std::string, double> units;
    double cash = 1.0;
    double prev_value = 1.0;
    double cumulative = 0.0;
    size_t next_rebalance = 0;

    auto last_close_at = [](const PriceSeries& s, Date t) -> std::optional<double> {
        const auto& obs = s.observations();
        auto it = std::upper_bound(obs.begin(), obs.end(), t,
                                   [](Date d, const PricePoint& p) { return d < p.date; });
        if (it == obs.begin()) return std::nullopt;
        return (it - 1)->close;
    };

    for (Date t = start; t <= end; t = t + 1) {
        // Mark to market. Positions with no further prices are sold at their
        // last close; positions in a temporary gap keep their last value.
        double invested = 0.0;
        for (auto it = units.begin(); it != units.end();) {
            const PriceSeries* s = universe.find(it->first);
            if (!s) throw DataError("held position in " + it->first + " has no price history");
            if (s->last_date() < t) {
                cash += it->second * *s->close_at(s->last_date());
                it = units.erase(it);
                continue;
            }
            const auto price = s->close_at(t) ? s->close_at(t) : last_close_at(*s, t);
            if (!price)
                throw DataError("held position in " + it->first + " predates its price history");
            invested += it->second * *price;
            ++it;
        }
        const double value = cash + invested;
        const double log_ret = t == start ? 0.0 : std::log(value / prev_value);
        cumulative += log_ret;

        // Rebalancing reallocates value but never changes it.
        if (next_rebalance < schedule.dates.size() && schedule.dates[next_rebalance] == t) {
            ++next_rebalance;
            MarketView view(universe, t);
            AllocationVector target = strategy(view);
            double weight_sum = 0.0;
            for (const auto& w : target.weights) {
                if (w.weight < 0.0)
                    throw ParameterError("negative target weight for " + w.symbol);
                weight_sum += w.weight;
            }
            const double scale = weight_sum > 1.0 ? 1.0 / weight_sum : 1.0;
            units.clear();
            double applied = 0.0;
            for (const auto& w : target.weights) {
                if (w.weight == 0.0) continue;
                const PriceSeries* s = universe.find(w.symbol);
                const auto price = s ? s->close_at(t) : std::optional<double>{};
                if (!price) continue;  // unpriced target stays in cash
                const double weight = w.weight * scale;
                units[w.symbol] += weight * value / *price;
                applied += weight;
            }
            // applied can exceed 1 by an ulp when the scale rounds up; the
            // cash weight is contractually in [0, 1].
            cash = std::max(0.0, (1.0 - applied) * value);
        }

        result.daily.push_back({t, log_ret, cumulative, cash / value});
        prev_value = value;
    }
    return result;
}

std::vector<MonthlyRow> monthly_table(const BacktestResult& tda, const BacktestResult& naive) {
    if (tda.daily.size() != naive.daily.size() || tda.daily.empty() ||
        tda.daily.front().date != naive.daily.front().date ||
        tda.daily.back().date != naive.daily.back().date)
        throw ParameterError("backtest results cover different ranges");
    std::vector<MonthlyRow> rows;
    for (size_t i = 0; i < tda.daily.size(); ++i) {
        if (tda.daily[i].date != naive.daily[i].date)
            throw ParameterError("backtest results cover different dates");
        const YearMonth ym = year_month_of(tda.daily[i].date);
        if (rows.empty() || !(rows.back().month == ym)) rows.push_back({ym, 0.0, 0.0});
        rows.back().tda += 100.0 * tda.daily[i].log_return;
        rows.back().naive += 100.0 * naive.daily[i].log_return;
    }
    return rows;
}

}  // namespace tda
