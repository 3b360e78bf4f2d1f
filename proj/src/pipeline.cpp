#include "tda/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "tda/backtest.hpp"
#include "tda/csv.hpp"
#include "tda/errors.hpp"
#include "tda/landscape.hpp"
#include "tda/market_data.hpp"
#include "tda/persistence.hpp"
#include "tda/scoring.hpp"

namespace tda {

namespace {

namespace fs = std::filesystem;

class StageTimer {
  public:
    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        laps_.emplace_back(name, std::chrono::duration<double>(now - last_).count());
        last_ = now;
    }
    const std::vector<std::pair<std::string, double>>& laps() const { return laps_; }

  private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, double>> laps_;
};

// One manifest per stage: resolved config, input/output checksums, counts
// and timings. The config snapshot alone must be enough to reproduce every
// output byte for byte.
struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::pair<std::string, std::string>> outputs;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();

    void add_input(const fs::path& p) { inputs.emplace_back(p.filename().string(), sha256_file_hex(p)); }
    void add_output(const fs::path& p) { outputs.emplace_back(p.filename().string(), sha256_file_hex(p)); }

    void write(const PipelineConfig& config, const StageTimer& timer) const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["version"] = kVersion;
        j["config"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config.snapshot()) j["config"][k] = v;
        j["inputs"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : inputs) j["inputs"][k] = v;
        j["outputs"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : outputs) j["outputs"][k] = v;
        j["counts"] = counts;
        j["timings_seconds"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : timer.laps()) j["timings_seconds"][k] = v;
        const fs::path path = fs::path(config.out_dir) / ("manifest_" + command + ".json");
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw DataError("cannot write manifest: " + path.string());
        out << j.dump(2) << "\n";
    }
};

fs::path out_path(const PipelineConfig& config, const std::string& name) {
    fs::create_directories(config.out_dir);
    return fs::path(config.out_dir) / name;
}

fs::path require_file(const fs::path& p, const std::string& producing_stage) {
    if (!fs::exists(p))
        throw DataError(p.string() + " is missing; run the " + producing_stage + " stage first");
    return p;
}

void parallel_for(int jobs, size_t n, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t workers =
        std::min<size_t>(n, jobs > 0 ? static_cast<size_t>(jobs) : static_cast<size_t>(hw));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// URL sources go through the download cache; local paths are used in place.
fs::path resolve_source(const PipelineConfig& config, std::string* checksum) {
    if (config.data_source.empty())
        throw ConfigError("data.source is not set (path or http(s) url)");
    if (config.data_source.rfind("http://", 0) == 0 ||
        config.data_source.rfind("https://", 0) == 0) {
        const fs::path cache = config.cache_dir.empty()
                                   ? fs::path(config.out_dir) / "cache"
                                   : fs::path(config.cache_dir);
        return fetch_dataset(config.data_source, cache, checksum);
    }
    const fs::path p(config.data_source);
    if (!fs::exists(p)) throw DataError("data.source does not exist: " + p.string());
    if (checksum) *checksum = sha256_file_hex(p);
    return p;
}

// The ingest cache is canonical (default column names, sorted, shortest
// round-trip numbers), so compute stages read it with the default schema.
MarketUniverse load_cached_universe(const PipelineConfig& config) {
    const fs::path cache = require_file(out_path(config, "universe.csv"), "ingest");
    MarketUniverse raw = ingest_csv(cache);
    std::vector<PriceSeries> regular;
    regular.reserve(raw.size());
    for (const auto& [sym, series] : raw.series())
        regular.push_back(regularize(series, config.regularize_max_fill));
    if (config.subset > 0 && static_cast<size_t>(config.subset) < regular.size()) {
        std::sort(regular.begin(), regular.end(), [](const PriceSeries& a, const PriceSeries& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return a.symbol() < b.symbol();
        });
        regular.resize(static_cast<size_t>(config.subset));
    }
    return MarketUniverse(std::move(regular));
}

std::vector<DiffSeries> load_diffs(const PipelineConfig& config, fs::path* used_path) {
    const fs::path path = require_file(out_path(config, "diffs.csv"), "norms");
    if (used_path) *used_path = path;
    CsvReader reader(path);
    const int sym_col = reader.column("symbol");
    const int date_col = reader.column("date");
    const int diff_col = reader.column("diff_l2");
    if (sym_col < 0 || date_col < 0 || diff_col < 0)
        throw DataError(path.string() + ": expected columns symbol,date,diff_l2");
    std::map<std::string, DiffSeries> by_symbol;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() < 3)
            throw DataError(path.string() + ":" + std::to_string(reader.line_number()) +
                            ": short row");
        const auto date = Date::parse(fields[static_cast<size_t>(date_col)]);
        double value = 0.0;
        const auto& vs = fields[static_cast<size_t>(diff_col)];
        const auto [ptr, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), value);
        if (!date || ec != std::errc{} || ptr != vs.data() + vs.size())
            throw DataError(path.string() + ":" + std::to_string(reader.line_number()) +
                            ": unparseable row");
        auto& ds = by_symbol[fields[static_cast<size_t>(sym_col)]];
        ds.symbol = fields[static_cast<size_t>(sym_col)];
        ds.observations.push_back({*date, value});
    }
    std::vector<DiffSeries> out;
    out.reserve(by_symbol.size());
    for (auto& [sym, ds] : by_symbol) {
        std::sort(ds.observations.begin(), ds.observations.end(),
                  [](const DatedValue& a, const DatedValue& b) { return a.date < b.date; });
        out.push_back(std::move(ds));
    }
    return out;
}

struct DayScores {
    FeatureMatrix matrix;
    std::vector<ScoredSymbol> scores;
    AllocationVector alloc;
};

// Scores one rebalance day from diff history at or before it. Nothing is
// returned when no currency has full lookback coverage.
std::optional<DayScores> score_day(const std::vector<DiffSeries>& diffs, Date as_of,
                                   const PipelineConfig& config) {
    DayScores day;
    day.matrix.as_of = as_of;
    for (const auto& ds : diffs) {
        auto row = rfm_features(ds, as_of, config.lookback, config.frequency);
        if (row) day.matrix.rows.push_back(std::move(*row));
    }
    if (day.matrix.rows.empty()) return std::nullopt;
    day.scores = composite_score(day.matrix, config.recency);
    day.alloc = allocate(day.scores, config.mode, as_of);
    return day;
}

}  // namespace

int cmd_ingest(const PipelineConfig& config) {
    StageTimer timer;
    Manifest manifest;
    manifest.command = "ingest";

    std::string source_checksum;
    const fs::path source = resolve_source(config, &source_checksum);
    manifest.inputs.emplace_back(source.filename().string(), source_checksum);
    timer.lap("fetch");

    IngestReport report;
    const CsvSchema schema{config.date_column, config.symbol_column, config.close_column};
    const MarketUniverse universe = ingest_csv(source, schema, &report);
    timer.lap("parse");

    const fs::path universe_path = out_path(config, "universe.csv");
    {
        CsvWriter w(universe_path, {"date", "symbol", "close"});
        for (const auto& [sym, series] : universe.series())
            for (const auto& p : series.observations())
                w.write_row({p.date.to_string(), sym, format_double(p.close)});
        w.close();
    }
    const fs::path rejects_path = out_path(config, "rejections.csv");
    {
        CsvWriter w(rejects_path, {"row", "reason"});
        for (const auto& r : report.rejected)
            w.write_row({std::to_string(r.line), r.reason});
        w.close();
    }
    timer.lap("write");

    manifest.add_output(universe_path);
    manifest.add_output(rejects_path);
    manifest.counts["data_rows"] = report.data_rows;
    manifest.counts["accepted"] = report.accepted;
    manifest.counts["rejected"] = report.rejected.size();
    manifest.counts["symbols"] = universe.size();
    manifest.write(config, timer);

    std::cout << "ingest: " << report.data_rows << " rows, " << report.accepted << " accepted, "
              << report.rejected.size() << " rejected, " << universe.size() << " symbols\n";
    return 0;
}

int cmd_norms(const PipelineConfig& config) {
    StageTimer timer;
    Manifest manifest;
    manifest.command = "norms";

    const fs::path cache = require_file(out_path(config, "universe.csv"), "ingest");
    const MarketUniverse universe = load_cached_universe(config);
    const std::vector<std::string> symbols = universe.symbols();
    timer.lap("load");

    struct SymbolResult {
        NormSeries norms;
        std::optional<DiffSeries> diffs;
        std::vector<std::array<std::string, 5>> diagram_rows;
        std::string skip_reason;  // nonempty -> currency skipped
    };
    std::vector<SymbolResult> results(symbols.size());
    const NormOptions options{config.landscape_p, config.include_h0, config.threshold};

    parallel_for(config.jobs, symbols.size(), [&](size_t i) {
        const PriceSeries& series = *universe.find(symbols[i]);
        SymbolResult& r = results[i];
        try {
            if (!config.dump_diagrams) {
                r.norms = norm_series(series, config.embedding, options);
            } else {
                r.norms.symbol = series.symbol();
                for (const auto& cloud : window_clouds(series, config.embedding)) {
                    const auto dm = distance_matrix(cloud);
                    const double threshold = std::isnan(options.threshold)
                                                 ? enclosing_threshold(dm)
                                                 : options.threshold;
                    const auto diagram = compute_persistence(build_rips(dm, 2, threshold));
                    for (const auto& p : diagram.pairs)
                        r.diagram_rows.push_back({series.symbol(),
                                                  cloud.window_end_date.to_string(),
                                                  std::to_string(p.dim), format_double(p.birth),
                                                  format_double(p.death)});
                    r.norms.observations.push_back(
                        {cloud.window_end_date, norm_from_diagram(diagram, options)});
                }
            }
            if (r.norms.observations.size() >= 2) r.diffs = diff_series(r.norms);
        } catch (const InsufficientDataError& e) {
            r.skip_reason = e.what();
        }
    });
    timer.lap("compute");

    const fs::path norms_path = out_path(config, "norms.csv");
    const fs::path diffs_path = out_path(config, "diffs.csv");
    const fs::path skipped_path = out_path(config, "skipped.csv");
    size_t norm_rows = 0, diff_rows = 0, skipped = 0;
    {
        CsvWriter wn(norms_path, {"symbol", "date", "l2_norm"});
        CsvWriter wd(diffs_path, {"symbol", "date", "diff_l2"});
        CsvWriter ws(skipped_path, {"symbol", "reason"});
        for (size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            if (!r.skip_reason.empty()) {
                ws.write_row({symbols[i], r.skip_reason});
                ++skipped;
                continue;
            }
            for (const auto& o : r.norms.observations) {
                wn.write_row({r.norms.symbol, o.date.to_string(), format_double(o.value)});
                ++norm_rows;
            }
            if (r.diffs)
                for (const auto& o : r.diffs->observations) {
                    wd.write_row({r.diffs->symbol, o.date.to_string(), format_double(o.value)});
                    ++diff_rows;
                }
        }
        wn.close();
        wd.close();
        ws.close();
    }
    manifest.add_input(cache);
    manifest.add_output(norms_path);
    manifest.add_output(diffs_path);
    manifest.add_output(skipped_path);
    if (config.dump_diagrams) {
        const fs::path diagrams_path = out_path(config, "diagrams.csv");
        CsvWriter w(diagrams_path, {"symbol", "date", "dim", "birth", "death"});
        for (const auto& r : results)
            for (const auto& row : r.diagram_rows)
                w.write_row({row[0], row[1], row[2], row[3], row[4]});
        w.close();
        manifest.add_output(diagrams_path);
    }
    timer.lap("write");

    manifest.counts["currencies"] = symbols.size() - skipped;
    manifest.counts["skipped"] = skipped;
    manifest.counts["norm_rows"] = norm_rows;
    manifest.counts["diff_rows"] = diff_rows;
    manifest.write(config, timer);

    std::cout << "norms: " << symbols.size() - skipped << " currencies, " << skipped
              << " skipped, " << norm_rows << " norm rows, " << diff_rows << " diff rows\n";
    return 0;
}

int cmd_score(const PipelineConfig& config) {
    StageTimer timer;
    Manifest manifest;
    manifest.command = "score";

    fs::path diffs_path;
    const std::vector<DiffSeries> diffs = load_diffs(config, &diffs_path);
    const RebalanceSchedule schedule = make_schedule(config.rebalance, config.from, config.to);
    timer.lap("load");

    std::vector<std::optional<DayScores>> days(schedule.dates.size());
    parallel_for(config.jobs, schedule.dates.size(),
                 [&](size_t i) { days[i] = score_day(diffs, schedule.dates[i], config); });
    timer.lap("compute");

    const fs::path scores_path = out_path(config, "scores.csv");
    const fs::path weights_path = out_path(config, "weights.csv");
    size_t score_rows = 0, empty_days = 0;
    {
        CsvWriter ws(scores_path, {"date", "symbol", "recency", "frequency", "monetary", "r_z",
                                   "f_z", "m_z", "score"});
        CsvWriter ww(weights_path, {"date", "symbol", "weight", "mode"});
        for (size_t i = 0; i < days.size(); ++i) {
            if (!days[i]) {
                std::cerr << "warning: no eligible currency at "
                          << schedule.dates[i].to_string() << "; full-cash day\n";
                ++empty_days;
                continue;
            }
            const auto& day = *days[i];
            const std::string date = schedule.dates[i].to_string();
            for (size_t r = 0; r < day.scores.size(); ++r) {
                const auto& feat = day.matrix.rows[r];
                const auto& sc = day.scores[r];
                ws.write_row({date, sc.symbol, format_double(feat.recency),
                              format_double(feat.frequency), format_double(feat.monetary),
                              format_double(sc.r_z), format_double(sc.f_z),
                              format_double(sc.m_z), format_double(sc.score)});
                ww.write_row({date, sc.symbol, format_double(day.alloc.weights[r].weight),
                              to_string(day.alloc.mode)});
                ++score_rows;
            }
        }
        ws.close();
        ww.close();
    }
    timer.lap("write");

    manifest.add_input(diffs_path);
    manifest.add_output(scores_path);
    manifest.add_output(weights_path);
    manifest.counts["rebalance_dates"] = schedule.dates.size();
    manifest.counts["empty_days"] = empty_days;
    manifest.counts["score_rows"] = score_rows;
    manifest.write(config, timer);

    std::cout << "score: " << schedule.dates.size() << " rebalance dates, " << empty_days
              << " empty, " << score_rows << " scored rows\n";
    return 0;
}

int cmd_backtest(const PipelineConfig& config) {
    StageTimer timer;
    Manifest manifest;
    manifest.command = "backtest";

    const fs::path cache = require_file(out_path(config, "universe.csv"), "ingest");
    const MarketUniverse universe = load_cached_universe(config);
    if (universe.size() == 0) throw DataError("universe cache holds no series");
    fs::path diffs_path;
    const std::vector<DiffSeries> diffs = load_diffs(config, &diffs_path);
    timer.lap("load");

    const auto [ufirst, ulast] = universe.date_range();
    Date from = config.from < ufirst ? ufirst : config.from;
    Date to = config.to > ulast ? ulast : config.to;
    if (to < from)
        throw DataError("backtest window " + config.from.to_string() + ".." +
                        config.to.to_string() + " does not intersect the data range " +
                        ufirst.to_string() + ".." + ulast.to_string());
    if (from != config.from || to != config.to)
        std::cerr << "note: backtest window clamped to data range: " << from.to_string() << ".."
                  << to.to_string() << "\n";
    const RebalanceSchedule schedule = make_schedule(config.rebalance, from, to);

    size_t full_cash_days = 0;
    const AllocationStrategy tda_strategy = [&](const MarketView& view) {
        auto day = score_day(diffs, view.as_of(), config);
        if (!day) {
            std::cerr << "warning: no eligible currency at " << view.as_of().to_string()
                      << "; full-cash day\n";
            ++full_cash_days;
            return AllocationVector{view.as_of(), {}, config.mode};
        }
        return std::move(day->alloc);
    };
    const AllocationStrategy naive_strategy = [&](const MarketView& view) {
        return naive_allocate(view);
    };

    const BacktestResult tda = run_backtest(universe, tda_strategy, schedule, from, to, "tda");
    const BacktestResult naive =
        run_backtest(universe, naive_strategy, schedule, from, to, "naive");
    const std::vector<MonthlyRow> months = monthly_table(tda, naive);
    timer.lap("compute");

    const fs::path returns_path = out_path(config, "returns.csv");
    {
        CsvWriter w(returns_path, {"date", "strategy", "daily_log_return",
                                   "cumulative_log_return", "cash_weight"});
        for (const auto* result : {&tda, &naive})
            for (const auto& row : result->daily)
                w.write_row({row.date.to_string(), result->strategy,
                             format_double(row.log_return),
                             format_double(row.cumulative_log_return),
                             format_double(row.cash_weight)});
        w.close();
    }
    const fs::path monthly_path = out_path(config, "monthly.csv");
    {
        CsvWriter w(monthly_path, {"month", "tda", "naive"});
        for (const auto& m : months)
            w.write_row({m.month.to_string(), format_double(m.tda), format_double(m.naive)});
        w.close();
    }
    timer.lap("write");

    int months_won = 0;
    for (const auto& m : months)
        if (m.tda >= m.naive) ++months_won;
    const double tda_cum = tda.daily.empty() ? 0.0 : tda.daily.back().cumulative_log_return;
    const double naive_cum = naive.daily.empty() ? 0.0 : naive.daily.back().cumulative_log_return;

    manifest.add_input(cache);
    manifest.add_input(diffs_path);
    manifest.add_output(returns_path);
    manifest.add_output(monthly_path);
    manifest.counts["days"] = tda.daily.size();
    manifest.counts["months"] = months.size();
    manifest.counts["months_tda_ge_naive"] = months_won;
    manifest.counts["full_cash_days"] = full_cash_days;
    manifest.counts["tda_cumulative_log_return"] = tda_cum;
    manifest.counts["naive_cumulative_log_return"] = naive_cum;
    manifest.write(config, timer);

    std::cout << "backtest: " << from.to_string() << ".." << to.to_string() << ", "
              << tda.daily.size() << " days, rebalance " << to_string(config.rebalance) << "\n";
    std::cout << "tda    cumulative log return " << format_double(tda_cum) << " ("
              << format_double(std::expm1(tda_cum) * 100.0) << "%)\n";
    std::cout << "naive  cumulative log return " << format_double(naive_cum) << " ("
              << format_double(std::expm1(naive_cum) * 100.0) << "%)\n";
    std::cout << "months tda >= naive: " << months_won << " of " << months.size() << "\n";
    std::cout << "full-cash rebalance days: " << full_cash_days << "\n";
    return 0;
}

int cmd_report(const PipelineConfig& config) {
    StageTimer timer;
    Manifest manifest;
    manifest.command = "report";

    const fs::path cache = require_file(out_path(config, "universe.csv"), "ingest");
    const MarketUniverse universe = load_cached_universe(config);
    if (universe.size() == 0) throw DataError("universe cache holds no series");
    timer.lap("load");

    const fs::path counts_path = out_path(config, "currencies_by_day.csv");
    {
        std::map<Date, int> counts;
        for (const auto& [sym, series] : universe.series())
            for (const auto& p : series.observations()) ++counts[p.date];
        CsvWriter w(counts_path, {"date", "count"});
        for (const auto& [date, count] : counts)
            w.write_row({date.to_string(), std::to_string(count)});
        w.close();
    }

    std::string focus = config.report_symbol;
    if (focus == "auto") {
        size_t best = 0;
        for (const auto& [sym, series] : universe.series())
            if (series.size() > best) {
                best = series.size();
                focus = sym;
            }
    } else if (!universe.find(focus)) {
        throw DataError("report.symbol '" + focus + "' is not in the universe");
    }
    const PriceSeries& series = *universe.find(focus);

    const fs::path close_path = out_path(config, "focus_log_close.csv");
    {
        CsvWriter w(close_path, {"symbol", "date", "log_close"});
        for (const auto& p : series.observations())
            w.write_row({focus, p.date.to_string(), format_double(std::log(p.close))});
        w.close();
    }
    const fs::path returns_path = out_path(config, "focus_log_returns.csv");
    const fs::path vol_path = out_path(config, "focus_volatility.csv");
    const fs::path sharpe_path = out_path(config, "focus_sharpe.csv");
    {
        CsvWriter wr(returns_path, {"symbol", "date", "log_return"});
        CsvWriter wv(vol_path, {"symbol", "date", "volatility"});
        CsvWriter wsh(sharpe_path, {"symbol", "date", "sharpe"});
        if (series.size() >= 2) {
            const ReturnSeries returns = log_returns(series);
            for (const auto& r : returns.observations)
                wr.write_row({focus, r.date.to_string(), format_double(r.log_return)});
            if (static_cast<int>(returns.observations.size()) >= config.volatility_window)
                for (const auto& v : rolling_volatility(returns, config.volatility_window))
                    wv.write_row({focus, v.date.to_string(), format_double(v.value)});
            if (static_cast<int>(returns.observations.size()) >= config.sharpe_window)
                for (const auto& s : rolling_sharpe(returns, config.sharpe_window))
                    wsh.write_row({focus, s.date.to_string(),
                                   s.sharpe ? format_double(*s.sharpe) : ""});
        } else {
            std::cerr << "warning: " << focus
                      << " has fewer than 2 observations; report series are empty\n";
        }
        wr.close();
        wv.close();
        wsh.close();
    }
    timer.lap("write");

    manifest.add_input(cache);
    manifest.add_output(counts_path);
    manifest.add_output(close_path);
    manifest.add_output(returns_path);
    manifest.add_output(vol_path);
    manifest.add_output(sharpe_path);
    manifest.counts["symbols"] = universe.size();
    manifest.counts["focus_symbol"] = focus;
    manifest.write(config, timer);

    std::cout << "report: " << universe.size() << " currencies, focus " << focus << "\n";
    return 0;
}

}  // namespace tda
