// Command-line front end: simulate, train, exploit, compare.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "leo_madrl/experiment.hpp"

namespace {

using namespace leo;

void print_summary(const ExperimentResult& res) {
    const RunRecord record = make_record(res.report);
    const Summary s = summarize(record.packets);
    const auto ms = [](const std::optional<double>& v) { return v ? fmt::format("{:.3f} ms", *v * 1e3) : "n/a"; };
    fmt::print("{} seed {}: created {} delivered {} dropped {}\n", record.router, record.seed, s.created, s.delivered,
               s.dropped);
    fmt::print("  mean {}  median {}  p95 {}  tail {}\n", ms(s.mean_latency_s), ms(s.median_latency_s),
               ms(s.p95_latency_s), ms(tail_mean_latency(record.packets)));
    for (const auto& a : res.artifacts) fmt::print("  wrote {}\n", a.string());
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"LEO constellation routing simulator with multi-agent deep Q routing"};
    app.require_subcommand(1);

    std::string config_path, out_dir, router, weights;
    std::uint64_t seed = 0;
    std::vector<std::string> runs;

    auto* simulate = app.add_subcommand("simulate", "run one experiment with the configured router");
    simulate->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    auto* router_opt = simulate->add_option("--router", router, "dijkstra, qrouting or madrl");
    auto* seed_opt = simulate->add_option("--seed", seed, "traffic and learning seed");
    auto* sim_out = simulate->add_option("--out", out_dir, "output directory");

    auto* train = app.add_subcommand("train", "offline exploration: train the global network");
    train->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out_dir, "output directory")->required();
    auto* train_seed = train->add_option("--seed", seed, "traffic and learning seed");

    auto* exploit = app.add_subcommand("exploit", "online exploitation from pretrained weights");
    exploit->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    exploit->add_option("--weights", weights, "pretrained weight file")->required()->check(CLI::ExistingFile);
    exploit->add_option("--out", out_dir, "output directory")->required();
    auto* exploit_seed = exploit->add_option("--seed", seed, "traffic and learning seed");

    auto* compare = app.add_subcommand("compare", "compare finished runs over the same traffic");
    compare->add_option("runs", runs, "run output directories, the first is the reference")->required()->expected(2, -1);
    compare->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (compare->parsed()) {
            std::vector<RunRecord> records;
            for (const auto& r : runs) records.push_back(load_run(r));
            const Comparison cmp = compare_runs(records);
            write_comparison(out_dir, records, cmp);
            for (const auto& row : cmp.rows)
                fmt::print("{:<10} delivered {:>7}  tail {}  ratio {}\n", row.router, row.delivered,
                           row.tail_mean_latency_s ? fmt::format("{:.6f} s", *row.tail_mean_latency_s) : "n/a",
                           row.tail_ratio ? fmt::format("{:.4f}", *row.tail_ratio) : "n/a");
            return 0;
        }

        RunConfig cfg = load_config(config_path);
        if (simulate->parsed()) {
            if (*router_opt) cfg.router = router_from_string(router);
            if (*seed_opt) cfg.set_seed(seed);
            if (*sim_out) cfg.output_dir = out_dir;
        } else if (train->parsed()) {
            cfg.router = RouterKind::Madrl;
            cfg.phase.mode = Phase::OfflineExploration;
            cfg.output_dir = out_dir;
            if (*train_seed) cfg.set_seed(seed);
        } else {
            cfg.router = RouterKind::Madrl;
            cfg.phase.mode = Phase::OnlineExploitation;
            cfg.weights_path = weights;
            cfg.output_dir = out_dir;
            if (*exploit_seed) cfg.set_seed(seed);
        }
        print_summary(run_experiment(cfg));
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
