#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// Same macro as the library's fetch translation unit; httplib's inline
// classes must have one definition across the binary.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "tda/errors.hpp"
#include "tda/market_data.hpp"

namespace fs = std::filesystem;
using tda::Date;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / ("tda_md_test_" + name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

tda::PriceSeries series(const std::string& sym, Date start, std::vector<double> closes) {
    std::vector<tda::PricePoint> obs;
    for (size_t i = 0; i < closes.size(); ++i)
        obs.push_back({start + static_cast<int32_t>(i), closes[i]});
    return tda::PriceSeries(std::move(sym), std::move(obs));
}

double sample_std(const std::vector<double>& xs) {
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (xs.size() - 1));
}

}  // namespace

TEST_CASE("PriceSeries enforces its invariants") {
    CHECK_NOTHROW(series("A", Date::from_ymd(2019, 1, 1), {1.0, 2.0, 3.0}));
    CHECK_THROWS_AS(tda::PriceSeries("A", {{Date(10), 1.0}, {Date(10), 2.0}}), tda::DataError);
    CHECK_THROWS_AS(tda::PriceSeries("A", {{Date(11), 1.0}, {Date(10), 2.0}}), tda::DataError);
    CHECK_THROWS_AS(tda::PriceSeries("A", {{Date(10), 0.0}}), tda::DataError);
    CHECK_THROWS_AS(tda::PriceSeries("A", {{Date(10), -1.0}}), tda::DataError);
    CHECK_THROWS_AS(tda::PriceSeries("A", {{Date(10), std::nan("")}}), tda::DataError);

    auto s = series("BTC", Date::from_ymd(2019, 1, 1), {10.0, 11.0});
    CHECK(s.close_at(Date::from_ymd(2019, 1, 2)) == 11.0);
    CHECK(!s.close_at(Date::from_ymd(2019, 1, 3)).has_value());
}

TEST_CASE("ingest loads a clean three-row file") {
    auto p = write_temp("clean.csv",
                        "date,symbol,close\n"
                        "2019-01-01,BTC,3843.52\n"
                        "2019-01-02,BTC,3943.41\n"
                        "2019-01-03,BTC,3836.74\n");
    tda::IngestReport rep;
    auto uni = tda::ingest_csv(p, {}, &rep);
    CHECK(uni.size() == 1);
    REQUIRE(uni.find("BTC") != nullptr);
    CHECK(uni.find("BTC")->size() == 3);
    CHECK(rep.data_rows == 3);
    CHECK(rep.accepted == 3);
    CHECK(rep.rejected.empty());
    CHECK(uni.date_range().first == Date::from_ymd(2019, 1, 1));
    CHECK(uni.date_range().second == Date::from_ymd(2019, 1, 3));
    fs::remove(p);
}

TEST_CASE("non-positive close becomes a rejection record, not an abort") {
    auto p = write_temp("dirty.csv",
                        "date,symbol,close\n"
                        "2019-01-01,BTC,3843.52\n"
                        "2019-01-02,BTC,0\n"
                        "2019-01-03,BTC,3836.74\n");
    tda::IngestReport rep;
    auto uni = tda::ingest_csv(p, {}, &rep);
    CHECK(uni.find("BTC")->size() == 2);
    REQUIRE(rep.rejected.size() == 1);
    CHECK(rep.rejected[0].line == 3);
    CHECK(rep.accepted == 2);
    fs::remove(p);
}

TEST_CASE("each malformed row is reported with its line number") {
    auto p = write_temp("reasons.csv",
                        "date,symbol,close\n"
                        "2019-01-01,BTC,100\n"
                        "2019/01/02,BTC,100\n"
                        "2019-01-03,,100\n"
                        "2019-01-04,BTC,abc\n"
                        "2019-01-05,BTC,-4\n"
                        "2019-01-05,BTC,inf\n"
                        "2019-01-06,BTC\n"
                        "2019-01-01,BTC,101\n");
    tda::IngestReport rep;
    auto uni = tda::ingest_csv(p, {}, &rep);
    CHECK(rep.data_rows == 8);
    CHECK(rep.accepted == 1);
    REQUIRE(rep.rejected.size() == 7);
    std::vector<size_t> lines;
    for (const auto& r : rep.rejected) {
        CHECK(!r.reason.empty());
        lines.push_back(r.line);
    }
    CHECK(lines == std::vector<size_t>{3, 4, 5, 6, 7, 8, 9});
    CHECK(uni.find("BTC")->size() == 1);
    fs::remove(p);
}

TEST_CASE("duplicate dates keep the first row and reject the rest") {
    auto p = write_temp("dups.csv",
                        "date,symbol,close\n"
                        "2019-01-01,BTC,100\n"
                        "2019-01-02,BTC,101\n"
                        "2019-01-02,BTC,999\n");
    tda::IngestReport rep;
    auto uni = tda::ingest_csv(p, {}, &rep);
    CHECK(uni.find("BTC")->close_at(Date::from_ymd(2019, 1, 2)) == 101.0);
    REQUIRE(rep.rejected.size() == 1);
    CHECK(rep.rejected[0].line == 4);
    fs::remove(p);
}

TEST_CASE("ingest is lossless-or-reported") {
    auto p = write_temp("lossless.csv",
                        "date,symbol,close\n"
                        "2019-01-01,A,1\n"
                        "bad,A,1\n"
                        "2019-01-02,A,2\n"
                        "2019-01-02,A,2\n"
                        "2019-01-03,B,-1\n"
                        "2019-01-04,B,5\n");
    tda::IngestReport rep;
    tda::ingest_csv(p, {}, &rep);
    CHECK(rep.data_rows == rep.accepted + rep.rejected.size());
    fs::remove(p);
}

TEST_CASE("ingest honors a custom column mapping") {
    auto p = write_temp("mapped.csv",
                        "day,px,ticker\n"
                        "2019-01-01,100,BTC\n");
    tda::CsvSchema schema;
    schema.date_column = "day";
    schema.close_column = "px";
    schema.symbol_column = "ticker";
    auto uni = tda::ingest_csv(p, schema);
    CHECK(uni.find("BTC") != nullptr);
    fs::remove(p);
}

TEST_CASE("missing column or unreadable file throws DataError") {
    auto p = write_temp("nocol.csv", "date,close\n2019-01-01,100\n");
    CHECK_THROWS_AS(tda::ingest_csv(p), tda::DataError);
    fs::remove(p);
    CHECK_THROWS_AS(tda::ingest_csv(fs::temp_directory_path() / "tda_md_test_absent.csv"),
                    tda::DataError);
}

TEST_CASE("log_returns closed forms") {
    auto r = tda::log_returns(series("A", Date(100), {100.0, 100.0}));
    REQUIRE(r.observations.size() == 1);
    CHECK(r.observations[0].log_return == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.observations[0].date == Date(101));

    r = tda::log_returns(series("A", Date(100), {100.0, 200.0}));
    CHECK(r.observations[0].log_return == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    double e = std::exp(1.0);
    r = tda::log_returns(series("A", Date(100), {e, e * e, std::pow(e, 4.0)}));
    REQUIRE(r.observations.size() == 2);
    CHECK(r.observations[0].log_return == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.observations[1].log_return == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("log_returns is invariant under price rescaling") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    std::vector<double> closes;
    for (int i = 0; i < 50; ++i) closes.push_back(u(rng));
    auto base = tda::log_returns(series("A", Date(0), closes));
    for (double c : {0.001, 7.25, 1e6}) {
        std::vector<double> scaled;
        for (double x : closes) scaled.push_back(c * x);
        auto got = tda::log_returns(series("A", Date(0), scaled));
        REQUIRE(got.observations.size() == base.observations.size());
        for (size_t i = 0; i < got.observations.size(); ++i)
            REQUIRE(got.observations[i].log_return ==
                    doctest::Approx(base.observations[i].log_return).epsilon(1e-12));
    }
}

TEST_CASE("rolling_volatility") {
    // Constant returns: zero std regardless of window placement.
    auto flat = tda::log_returns(series("A", Date(0), {1, 2, 4, 8, 16, 32}));
    auto vol = tda::rolling_volatility(flat, 4);
    REQUIRE(vol.size() == 2);
    CHECK(vol[0].value == doctest::Approx(0.0).epsilon(1e-12));

    // Alternating returns, window 4: direct sample std oracle.
    double r = 0.05;
    std::vector<double> closes{100.0};
    for (int i = 0; i < 8; ++i) closes.push_back(closes.back() * std::exp(i % 2 == 0 ? r : -r));
    auto rets = tda::log_returns(series("A", Date(0), closes));
    vol = tda::rolling_volatility(rets, 4);
    REQUIRE(!vol.empty());
    double expect = std::sqrt(365.0) * sample_std({r, -r, r, -r});
    for (const auto& v : vol) CHECK(v.value == doctest::Approx(expect).epsilon(1e-12));
    // Dated by window end: first full window ends at the 4th return date.
    CHECK(vol[0].date == rets.observations[3].date);

    CHECK(tda::rolling_volatility(rets, 100).empty());
}

TEST_CASE("rolling_volatility windows ignore outside observations") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    tda::ReturnSeries rets{"A", {}};
    for (int i = 0; i < 40; ++i) rets.observations.push_back({Date(i), u(rng)});
    auto full = tda::rolling_volatility(rets, 10);

    // Recompute each window in isolation.
    for (const auto& point : full) {
        size_t end = 0;
        while (rets.observations[end].date != point.date) ++end;
        std::vector<double> window;
        for (size_t i = end + 1 - 10; i <= end; ++i)
            window.push_back(rets.observations[i].log_return);
        REQUIRE(point.value == doctest::Approx(std::sqrt(365.0) * sample_std(window)).epsilon(1e-12));
    }
}

TEST_CASE("rolling_sharpe degenerate and symmetric windows") {
    tda::ReturnSeries rets{"A", {}};
    for (int i = 0; i < 60; ++i) rets.observations.push_back({Date(i), 0.01});
    auto sharpe = tda::rolling_sharpe(rets, 60);
    REQUIRE(sharpe.size() == 1);
    CHECK(!sharpe[0].sharpe.has_value());  // zero std

    rets.observations.clear();
    for (int i = 0; i < 60; ++i) rets.observations.push_back({Date(i), 0.0});
    sharpe = tda::rolling_sharpe(rets, 60);
    REQUIRE(sharpe.size() == 1);
    CHECK(!sharpe[0].sharpe.has_value());

    rets.observations.clear();
    for (int i = 0; i < 30; ++i) rets.observations.push_back({Date(i), 0.01});
    for (int i = 30; i < 60; ++i) rets.observations.push_back({Date(i), -0.01});
    sharpe = tda::rolling_sharpe(rets, 60);
    REQUIRE(sharpe.size() == 1);
    REQUIRE(sharpe[0].sharpe.has_value());
    CHECK(*sharpe[0].sharpe == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rolling_sharpe matches a direct computation") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.001, 0.02);
    tda::ReturnSeries rets{"A", {}};
    for (int i = 0; i < 80; ++i) rets.observations.push_back({Date(i), n(rng)});
    auto sharpe = tda::rolling_sharpe(rets, 60);
    REQUIRE(sharpe.size() == 21);
    for (size_t k = 0; k < sharpe.size(); ++k) {
        std::vector<double> window;
        for (size_t i = k; i < k + 60; ++i) window.push_back(rets.observations[i].log_return);
        double mean = std::accumulate(window.begin(), window.end(), 0.0) / window.size();
        double expect = mean / sample_std(window) * std::sqrt(365.0);
        REQUIRE(sharpe[k].sharpe.has_value());
        REQUIRE(*sharpe[k].sharpe == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("regularize forward-fills short gaps") {
    std::vector<tda::PricePoint> obs{{Date(0), 10.0}, {Date(1), 11.0}, {Date(4), 12.0}};
    auto reg = tda::regularize(tda::PriceSeries("A", obs), 3);
    REQUIRE(reg.size() == 5);
    CHECK(reg.close_at(Date(2)) == 11.0);
    CHECK(reg.close_at(Date(3)) == 11.0);
    CHECK(reg.close_at(Date(4)) == 12.0);
}

TEST_CASE("regularize splits on long gaps and keeps the longest segment") {
    std::vector<tda::PricePoint> obs;
    for (int i = 0; i < 5; ++i) obs.push_back({Date(i), 1.0 + i});
    for (int i = 0; i < 12; ++i) obs.push_back({Date(100 + i), 50.0 + i});
    auto reg = tda::regularize(tda::PriceSeries("A", obs), 3);
    CHECK(reg.size() == 12);
    CHECK(reg.first_date() == Date(100));

    // Tie in segment length: the later segment wins.
    obs.clear();
    for (int i = 0; i < 5; ++i) obs.push_back({Date(i), 1.0 + i});
    for (int i = 0; i < 5; ++i) obs.push_back({Date(100 + i), 9.0 + i});
    reg = tda::regularize(tda::PriceSeries("A", obs), 3);
    CHECK(reg.size() == 5);
    CHECK(reg.first_date() == Date(100));
}

TEST_CASE("regularize leaves contiguous series untouched") {
    auto s = series("A", Date(50), {1, 2, 3, 4});
    auto reg = tda::regularize(s, 3);
    CHECK(reg.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(reg.observations()[i].date == s.observations()[i].date);
        CHECK(reg.observations()[i].close == s.observations()[i].close);
    }
}

TEST_CASE("universe date range and per-day symbol lookup") {
    std::vector<tda::PriceSeries> all;
    all.push_back(series("A", Date(10), {1, 2, 3}));
    all.push_back(series("B", Date(11), {4, 5}));
    tda::MarketUniverse uni(std::move(all));
    CHECK(uni.date_range() == std::pair<Date, Date>{Date(10), Date(12)});
    CHECK(uni.symbols_priced_at(Date(10)) == std::vector<std::string>{"A"});
    CHECK(uni.symbols_priced_at(Date(11)) == std::vector<std::string>{"A", "B"});
    CHECK(uni.symbols_priced_at(Date(13)).empty());
    CHECK(uni.symbols() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("sha256 known vectors") {
    CHECK(tda::sha256_hex(std::string("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(tda::sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    auto p = write_temp("hash.bin", "abc");
    CHECK(tda::sha256_file_hex(p) == tda::sha256_hex(std::string("abc")));
    fs::remove(p);
}

TEST_CASE("fetch_dataset: cache hit, download, and 404") {
    const std::string body = "date,symbol,close\n2019-01-01,BTC,100\n";
    std::atomic<int> hits{0};
    httplib::Server server;
    server.Get("/data.csv", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(body, "text/csv");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    fs::path cache = fs::temp_directory_path() / "tda_md_test_cache";
    fs::remove_all(cache);
    std::string url = "http://127.0.0.1:" + std::to_string(port) + "/data.csv";

    std::string checksum;
    auto got = tda::fetch_dataset(url, cache, &checksum);
    CHECK(fs::exists(got));
    CHECK(checksum == tda::sha256_hex(body));
    CHECK(tda::sha256_file_hex(got) == checksum);
    CHECK(hits == 1);

    // Second call must come from the cache.
    std::string checksum2;
    auto again = tda::fetch_dataset(url, cache, &checksum2);
    CHECK(again == got);
    CHECK(checksum2 == checksum);
    CHECK(hits == 1);

    std::string missing = "http://127.0.0.1:" + std::to_string(port) + "/nope.csv";
    CHECK_THROWS_AS(tda::fetch_dataset(missing, cache), tda::DataError);

    server.stop();
    runner.join();
    fs::remove_all(cache);
}

TEST_CASE("fetch_dataset rejects non-http sources") {
    CHECK_THROWS_AS(tda::fetch_dataset("ftp://example.com/x.csv", fs::temp_directory_path()),
                    tda::ConfigError);
}
