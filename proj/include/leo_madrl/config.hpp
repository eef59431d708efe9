#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "leo_madrl/baseline.hpp"
#include "leo_madrl/madrl.hpp"

namespace leo {

// Configuration problem tied to a dotted key path such as "phase.epsilon_start".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class RouterKind { Dijkstra, QRouting, Madrl };

const char* to_string(RouterKind r);
RouterKind router_from_string(const std::string& s);  // throws ConfigError("router", ...)

struct NamedGateway {
    std::string name;
    GeoPosition position;
};

struct RunConfig {
    OrbitalShell constellation;
    InterplanePolicy interplane_policy = InterplanePolicy::Nearest;
    std::vector<NamedGateway> gateways;
    LinkBudgetParams isl;
    LinkBudgetParams gsl;
    ModcodTable modcod = default_modcod_table();
    TrafficConfig traffic;  // seed mirrors the top-level seed
    SimConfig simulator;
    RouterKind router = RouterKind::Dijkstra;
    PhaseConfig phase;
    std::optional<std::string> weights_path;
    TrainConfig training;
    RewardConfig reward;
    QRoutingConfig qrouting;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    Scenario scenario() const;
    void set_seed(std::uint64_t s) {
        seed = s;
        traffic.seed = s;
    }
};

// The shipped defaults: 10x10 shell at 600 km, eight gateways.
RunConfig default_config();

// Strict parse: unknown keys are rejected and every failure names its key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

// Cross-module requirements checked right before a run (after CLI overrides).
void check_runnable(const RunConfig& cfg);

}  // namespace leo
