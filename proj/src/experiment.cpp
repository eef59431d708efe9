#include "leo_madrl/experiment.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace leo {

std::string agent_weights_filename(const OrbitalShell& shell, int sat) {
    const SatelliteId id = satellite_id(shell, sat);
    return fmt::format("dnn_p{}_s{}.bin", id.plane, id.slot);
}

void configure_logging() {
    const char* env = std::getenv("MADRL_LOG");
    auto level = spdlog::level::warn;
    if (env && *env) {
        level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
    }
    spdlog::set_level(level);
}

ExperimentResult run_experiment(const RunConfig& cfg, bool write_artifacts) {
    check_runnable(cfg);
    const Scenario scenario = cfg.scenario();
    scenario.validate();
    const SimTime until = from_seconds(scenario.traffic.duration_s + scenario.sim.drain_s);
    spdlog::info("running {} on {}x{} shell, {} gateways, seed {}", to_string(cfg.router),
                 cfg.constellation.num_planes, cfg.constellation.sats_per_plane, cfg.gateways.size(), cfg.seed);

    ExperimentResult out;
    switch (cfg.router) {
        case RouterKind::Dijkstra: {
            DijkstraRouter router;
            out.report = run_simulation(scenario, router, until);
            break;
        }
        case RouterKind::QRouting: {
            QRoutingRouter router(cfg.constellation.num_satellites(), static_cast<int>(cfg.gateways.size()),
                                  cfg.qrouting, cfg.reward, cfg.seed);
            out.report = run_simulation(scenario, router, until);
            out.training_log = router.training_log();
            break;
        }
        case RouterKind::Madrl: {
            if (cfg.phase.mode == Phase::OfflineExploration) {
                auto res = offline_explore(scenario, cfg.phase, cfg.training, cfg.reward);
                out.report = std::move(res.report);
                out.training_log = std::move(res.log);
                out.global_weights = std::move(res.weights);
            } else {
                const MlpParams pretrained = load_weights(*cfg.weights_path);
                auto res = online_exploit(scenario, pretrained, cfg.phase, cfg.training, cfg.reward);
                out.report = std::move(res.report);
                out.training_log = std::move(res.log);
                out.agent_weights = std::move(res.agent_weights);
            }
            break;
        }
    }
    const auto& c = out.report.counters;
    spdlog::info("{}: created {}, delivered {}, dropped {}", out.report.router, c.created, c.delivered, c.dropped());

    if (!write_artifacts) return out;
    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const auto record = make_record(out.report);
    const auto add = [&](const std::string& name) { return out.artifacts.emplace_back(dir / name); };

    {
        std::ofstream f(add("config.json"), std::ios::binary);
        f << to_json(cfg).dump(2) << "\n";
        if (!f) throw std::runtime_error("cannot write " + out.artifacts.back().string());
    }
    write_packets_csv(add("packets.csv"), record);
    write_summary_csv(add("summary.csv"), record);
    {
        std::ofstream f(add("latency.svg"), std::ios::binary);
        f << render_latency_svg({latency_series(record)}, fmt::format("E2E latency, {} (seed {})", record.router,
                                                                       record.seed));
        if (!f) throw std::runtime_error("cannot write " + out.artifacts.back().string());
    }
    if (cfg.router != RouterKind::Dijkstra) write_training_csv(add("training.csv"), out.training_log);
    if (out.global_weights) save_weights(*out.global_weights, add(kGlobalWeightsFilename));
    for (std::size_t i = 0; i < out.agent_weights.size(); ++i)
        save_weights(out.agent_weights[i], add(agent_weights_filename(cfg.constellation, static_cast<int>(i))));
    spdlog::info("wrote {} artifacts to {}", out.artifacts.size(), dir.string());
    return out;
}

}  // namespace leo
