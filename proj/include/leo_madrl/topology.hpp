#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "leo_madrl/geometry.hpp"
#include "leo_madrl/link.hpp"

namespace leo {

// Antenna slots of a satellite. The four ISL slots double as the action space
// of the learning routers; slot 4 is the ground link.
enum class Antenna : int { IntraForward = 0, IntraBackward = 1, InterLeft = 2, InterRight = 3, Ground = 4 };

inline constexpr int kIslSlots = 4;
inline constexpr int kGslSlot = 4;
inline constexpr int kSlotsPerSatellite = 5;

enum class NodeKind { Satellite, Gateway };

struct NodeRef {
    NodeKind kind = NodeKind::Satellite;
    int index = 0;  // flattened satellite index or gateway index

    auto operator<=>(const NodeRef&) const = default;
};

enum class LinkKind { IntraPlane, InterPlane, Ground };

enum class InterplanePolicy { Nearest, SameSlot };

struct Edge {
    NodeRef a;
    NodeRef b;
    LinkKind kind = LinkKind::IntraPlane;
    double distance_km = 0.0;
    double data_rate_bps = 0.0;
    int antenna_slot = 0;  // slot at endpoint a
};

// One direction of a link as seen from its owner.
struct LinkState {
    int neighbor = -1;  // satellite index (for GSL rows: the serving satellite)
    double distance_km = 0.0;
    double rate_bps = 0.0;

    bool present() const { return neighbor >= 0; }
    bool operator==(const LinkState&) const = default;
};

using IslAdjacency = std::vector<std::array<LinkState, kIslSlots>>;

// Immutable snapshot of the constellation graph at one instant.
struct NetworkGraph {
    double snapshot_time_s = 0.0;
    OrbitalShell shell;
    std::vector<EcefVector> satellite_positions;
    std::vector<EcefVector> gateway_positions;
    IslAdjacency isl;                             // per satellite, per ISL antenna
    std::vector<LinkState> gsl;                   // per gateway
    std::vector<std::vector<int>> served_gateways;  // per satellite, ascending

    int num_satellites() const { return static_cast<int>(satellite_positions.size()); }
    int num_gateways() const { return static_cast<int>(gateway_positions.size()); }
    int serving_satellite(int gateway) const { return gsl.at(gateway).neighbor; }
    bool serves(int sat, int gateway) const { return gsl.at(gateway).neighbor == sat; }

    std::vector<NodeRef> nodes() const;
    // Every link once; ISL edges listed from the lower-indexed endpoint, GSL
    // edges from the gateway.
    std::vector<Edge> edges() const;
    bool operator==(const NetworkGraph&) const = default;
};

class InfeasibleGatewayError : public std::runtime_error {
public:
    explicit InfeasibleGatewayError(int gateway)
        : std::runtime_error("gateway " + std::to_string(gateway) + " has no feasible link to any satellite"),
          gateway_(gateway) {}
    int gateway() const { return gateway_; }

private:
    int gateway_;
};

std::vector<EcefVector> satellite_positions(const OrbitalShell& shell, double t_s);

IslAdjacency build_isl_edges(const OrbitalShell& shell, const LinkBudgetParams& params, const ModcodTable& table,
                             double t_s, InterplanePolicy policy = InterplanePolicy::Nearest);

// Attaches every gateway to its minimum-slant-range satellite with a feasible
// MODCOD; ties go to the smaller satellite index.
void attach_gateways(NetworkGraph& graph, const std::vector<GeoPosition>& gateways, const LinkBudgetParams& gsl_params,
                     const ModcodTable& table, double t_s);

struct TopologyInputs {
    OrbitalShell shell;
    std::vector<GeoPosition> gateways;
    LinkBudgetParams isl_params;
    LinkBudgetParams gsl_params;
    ModcodTable modcod = default_modcod_table();
    InterplanePolicy interplane_policy = InterplanePolicy::Nearest;
};

NetworkGraph refresh_topology(const TopologyInputs& in, double t_s);

// True if every satellite reaches every other one over ISLs.
bool satellites_connected(const NetworkGraph& graph);

}  // namespace leo
