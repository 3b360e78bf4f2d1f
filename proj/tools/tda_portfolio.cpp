// Command-line front end: ingest -> norms -> score -> backtest -> report.
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.
#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "tda/config.hpp"
#include "tda/errors.hpp"
#include "tda/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Topology-driven cryptocurrency portfolio pipeline"};
    app.set_version_flag("--version", tda::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    tda::CliOverrides overrides;
    int jobs = 0, subset = 0;
    std::string mode, recency, from, to, out_dir;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value configuration file");
        cmd->add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");
        cmd->add_option("--subset", subset, "use only the N largest-history currencies");
        cmd->add_option("--mode", mode, "allocation mode: paper_literal or normalized");
        cmd->add_option("--recency", recency, "recency polarity: literal or inverted");
        cmd->add_option("--from", from, "backtest start date (YYYY-MM-DD)");
        cmd->add_option("--to", to, "backtest end date (YYYY-MM-DD)");
        cmd->add_option("--out", out_dir, "output directory");
    };
    add_common(app.add_subcommand("ingest", "validate the dataset and build the universe cache"));
    add_common(app.add_subcommand("norms", "compute landscape norm and diff series"));
    add_common(app.add_subcommand("score", "compute RFM scores and portfolio weights"));
    add_common(app.add_subcommand("backtest", "run the portfolio against the 1/N benchmark"));
    add_common(app.add_subcommand("report", "emit descriptive market CSVs"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (jobs != 0) overrides.jobs = jobs;
        if (subset != 0) overrides.subset = subset;
        if (!mode.empty()) overrides.mode = mode;
        if (!recency.empty()) overrides.recency = recency;
        if (!from.empty()) overrides.from = from;
        if (!to.empty()) overrides.to = to;
        if (!out_dir.empty()) overrides.out_dir = out_dir;
        const auto config = tda::resolve_config(
            config_path.empty() ? std::nullopt
                                : std::optional<std::filesystem::path>(config_path),
            overrides);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "ingest") return tda::cmd_ingest(config);
        if (cmd == "norms") return tda::cmd_norms(config);
        if (cmd == "score") return tda::cmd_score(config);
        if (cmd == "backtest") return tda::cmd_backtest(config);
        if (cmd == "report") return tda::cmd_report(config);
        std::cerr << "error: unknown subcommand " << cmd << "\n";
        return 2;
    } catch (const tda::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tda::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tda::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
