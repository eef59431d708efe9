#include "leo_madrl/config.hpp"

#include <fstream>
#include <set>

namespace leo {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be rejected.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j.is_object(), path_, "expected an object");
    }

    std::string key(const std::string& k) const { return join(path_, k); }
    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k) && !j_.at(k).is_null();
    }
    const json& at(const std::string& k) { return (seen_.insert(k), j_.at(k)); }

    double number(const std::string& k, double fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        require(v.is_number(), key(k), "expected a number");
        return v.get<double>();
    }
    std::int64_t integer(const std::string& k, std::int64_t fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        require(v.is_number_integer(), key(k), "expected an integer");
        return v.get<std::int64_t>();
    }
    bool boolean(const std::string& k, bool fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        require(v.is_boolean(), key(k), "expected true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& k, const std::string& fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        require(v.is_string(), key(k), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

OrbitalShell parse_shell(Section& s, InterplanePolicy& policy) {
    OrbitalShell shell;
    shell.num_planes = static_cast<int>(s.integer("num_planes", shell.num_planes));
    require(shell.num_planes >= 1, s.key("num_planes"), "must be >= 1");
    shell.sats_per_plane = static_cast<int>(s.integer("sats_per_plane", shell.sats_per_plane));
    require(shell.sats_per_plane >= 1, s.key("sats_per_plane"), "must be >= 1");
    shell.altitude_km = s.number("altitude_km", shell.altitude_km);
    require(shell.altitude_km > 0.0, s.key("altitude_km"), "must be > 0");
    shell.inclination_deg = s.number("inclination_deg", shell.inclination_deg);
    require(shell.inclination_deg >= 0.0 && shell.inclination_deg <= 180.0, s.key("inclination_deg"),
            "must be in [0, 180]");
    shell.phasing_offset_deg = s.number("phasing_offset_deg", shell.phasing_offset_deg);
    shell.raan_spread_deg = s.number("raan_spread_deg", shell.raan_spread_deg);
    require(shell.raan_spread_deg > 0.0 && shell.raan_spread_deg <= 360.0, s.key("raan_spread_deg"),
            "must be in (0, 360]");
    const std::string p = s.text("interplane_policy", "nearest");
    if (p == "nearest") policy = InterplanePolicy::Nearest;
    else if (p == "same_slot") policy = InterplanePolicy::SameSlot;
    else throw ConfigError(s.key("interplane_policy"), "expected \"nearest\" or \"same_slot\"");
    s.finish();
    return shell;
}

LinkBudgetParams parse_link(const json& j, const std::string& path, LinkBudgetParams p) {
    Section s(j, path);
    p.tx_power_dbw = s.number("tx_power_dbw", p.tx_power_dbw);
    p.tx_gain_dbi = s.number("tx_gain_dbi", p.tx_gain_dbi);
    p.rx_gain_dbi = s.number("rx_gain_dbi", p.rx_gain_dbi);
    p.frequency_ghz = s.number("frequency_ghz", p.frequency_ghz);
    require(p.frequency_ghz > 0.0, s.key("frequency_ghz"), "must be > 0");
    p.symbol_rate_baud = s.number("symbol_rate_baud", p.symbol_rate_baud);
    require(p.symbol_rate_baud > 0.0, s.key("symbol_rate_baud"), "must be > 0");
    p.noise_temperature_k = s.number("noise_temperature_k", p.noise_temperature_k);
    require(p.noise_temperature_k > 0.0, s.key("noise_temperature_k"), "must be > 0");
    p.losses_misc_db = s.number("losses_misc_db", p.losses_misc_db);
    s.finish();
    return p;
}

std::vector<NamedGateway> parse_gateways(const json& j) {
    require(j.is_array(), "gateways", "expected a list");
    std::vector<NamedGateway> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Section s(j[i], "gateways[" + std::to_string(i) + "]");
        NamedGateway g;
        g.name = s.text("name", "gw" + std::to_string(i));
        g.position.latitude_deg = s.number("lat", 0.0);
        require(g.position.latitude_deg >= -90.0 && g.position.latitude_deg <= 90.0, s.key("lat"),
                "must be in [-90, 90]");
        g.position.longitude_deg = s.number("lon", 0.0);
        require(g.position.longitude_deg >= -180.0 && g.position.longitude_deg < 180.0, s.key("lon"),
                "must be in [-180, 180)");
        g.position.altitude_km = s.number("alt_km", 0.0);
        require(g.position.altitude_km >= 0.0, s.key("alt_km"), "must be >= 0");
        s.finish();
        out.push_back(std::move(g));
    }
    require(out.size() >= 2, "gateways", "at least two gateways are required");
    return out;
}

ModcodTable parse_modcod(const json& j) {
    require(j.is_array(), "modcod", "expected a list");
    require(!j.empty(), "modcod", "table is empty");
    std::vector<ModcodRow> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Section s(j[i], "modcod[" + std::to_string(i) + "]");
        ModcodRow r;
        r.name = s.text("name", "row" + std::to_string(i));
        r.spectral_efficiency = s.number("efficiency", 0.0);
        require(r.spectral_efficiency > 0.0, s.key("efficiency"), "must be > 0");
        require(s.has("required_snr_db"), s.key("required_snr_db"), "missing");
        r.required_snr_db = s.number("required_snr_db", 0.0);
        s.finish();
        rows.push_back(std::move(r));
    }
    try {
        return ModcodTable(std::move(rows));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("modcod", e.what());
    }
}

void parse_traffic(Section& s, TrafficConfig& t) {
    t.per_gateway_rate = s.number("per_gateway_rate", t.per_gateway_rate);
    require(t.per_gateway_rate >= 0.0, s.key("per_gateway_rate"), "must be >= 0");
    t.packet_size_bits = s.number("packet_size_bits", t.packet_size_bits);
    require(t.packet_size_bits > 0.0, s.key("packet_size_bits"), "must be > 0");
    t.duration_s = s.number("duration_s", t.duration_s);
    require(t.duration_s >= 0.0, s.key("duration_s"), "must be >= 0");
    s.finish();
}

void parse_simulator(Section& s, SimConfig& c, const OrbitalShell& shell) {
    c.queue_capacity = static_cast<int>(s.integer("queue_capacity", c.queue_capacity));
    require(c.queue_capacity > 0, s.key("queue_capacity"), "must be > 0");
    c.ttl_hops = static_cast<int>(s.integer("ttl_hops", c.ttl_hops));
    require(c.ttl_hops > 0, s.key("ttl_hops"), "must be > 0");
    c.topology_refresh_s = s.number("topology_refresh_s", c.topology_refresh_s);
    require(c.topology_refresh_s > 0.0, s.key("topology_refresh_s"), "must be > 0");
    c.drain_s = s.number("drain_s", c.drain_s);
    require(c.drain_s >= 0.0, s.key("drain_s"), "must be >= 0");
    c.start_time_s = s.number("start_time_s", c.start_time_s);
    require(c.start_time_s >= 0.0, s.key("start_time_s"), "must be >= 0");
    c.feedback_consumes_bandwidth = s.boolean("feedback_consumes_bandwidth", c.feedback_consumes_bandwidth);
    c.feedback_bits = s.number("feedback_bits", c.feedback_bits);
    require(c.feedback_bits > 0.0, s.key("feedback_bits"), "must be > 0");
    if (s.has("corridor")) {
        Section cs(s.at("corridor"), s.key("corridor"));
        Corridor corridor;
        corridor.plane = static_cast<int>(cs.integer("plane", 0));
        require(corridor.plane >= 0 && corridor.plane < shell.num_planes, cs.key("plane"), "outside the shell");
        corridor.fill_fraction = cs.number("fill_fraction", corridor.fill_fraction);
        require(corridor.fill_fraction >= 0.0 && corridor.fill_fraction < 1.0, cs.key("fill_fraction"),
                "must be in [0, 1)");
        cs.finish();
        c.corridor = corridor;
    }
    s.finish();
}

void parse_phase(Section& s, PhaseConfig& p, std::optional<std::string>& weights) {
    const std::string mode = s.text("mode", "offline-exploration");
    if (mode == "offline-exploration") p.mode = Phase::OfflineExploration;
    else if (mode == "online-exploitation") p.mode = Phase::OnlineExploitation;
    else throw ConfigError(s.key("mode"), "expected \"offline-exploration\" or \"online-exploitation\"");
    p.epsilon_start = s.number("epsilon_start", p.epsilon_start);
    require(p.epsilon_start >= 0.0 && p.epsilon_start <= 1.0, s.key("epsilon_start"), "must be in [0, 1]");
    p.epsilon_end = s.number("epsilon_end", p.epsilon_end);
    require(p.epsilon_end >= 0.0 && p.epsilon_end <= p.epsilon_start, s.key("epsilon_end"),
            "must be in [0, epsilon_start]");
    p.epsilon_decay_per_step = s.number("epsilon_decay_per_step", p.epsilon_decay_per_step);
    require(p.epsilon_decay_per_step > 0.0 && p.epsilon_decay_per_step < 1.0, s.key("epsilon_decay_per_step"),
            "must be in (0, 1)");
    p.train_every_s = s.number("train_every_s", p.train_every_s);
    require(p.train_every_s > 0.0, s.key("train_every_s"), "must be > 0");
    const auto cap = s.integer("buffer_capacity", static_cast<std::int64_t>(p.buffer_capacity));
    require(cap > 0, s.key("buffer_capacity"), "must be > 0");
    p.buffer_capacity = static_cast<std::size_t>(cap);
    const auto local = s.integer("local_buffer_capacity", static_cast<std::int64_t>(p.local_buffer_capacity));
    require(local > 0, s.key("local_buffer_capacity"), "must be > 0");
    p.local_buffer_capacity = static_cast<std::size_t>(local);
    p.online_learning_enabled = s.boolean("online_learning_enabled", p.online_learning_enabled);
    const std::string metric = s.text("congestion_metric", "occupancy");
    if (metric == "occupancy") p.congestion_metric = CongestionMetric::Occupancy;
    else if (metric == "queue_delay") p.congestion_metric = CongestionMetric::QueueDelay;
    else throw ConfigError(s.key("congestion_metric"), "expected \"occupancy\" or \"queue_delay\"");
    if (s.has("weights_path")) weights = s.text("weights_path", "");
    s.finish();
}

void parse_training(Section& s, TrainConfig& t) {
    t.learning_rate = s.number("learning_rate", t.learning_rate);
    require(t.learning_rate > 0.0, s.key("learning_rate"), "must be > 0");
    t.batch_size = static_cast<int>(s.integer("batch_size", t.batch_size));
    require(t.batch_size > 0, s.key("batch_size"), "must be > 0");
    t.discount = s.number("discount", t.discount);
    require(t.discount > 0.0 && t.discount <= 1.0, s.key("discount"), "must be in (0, 1]");
    t.target_sync_every = static_cast<int>(s.integer("target_sync_every", t.target_sync_every));
    require(t.target_sync_every > 0, s.key("target_sync_every"), "must be > 0");
    if (s.has("hidden_layers")) {
        const json& h = s.at("hidden_layers");
        require(h.is_array(), s.key("hidden_layers"), "expected a list of widths");
        t.hidden_layers.clear();
        for (const auto& w : h) {
            require(w.is_number_integer() && w.get<int>() > 0, s.key("hidden_layers"), "widths must be positive integers");
            t.hidden_layers.push_back(w.get<int>());
        }
    }
    s.finish();
}

void parse_reward(Section& s, RewardConfig& r) {
    r.distance_ref_km = s.number("distance_ref_km", r.distance_ref_km);
    require(r.distance_ref_km > 0.0, s.key("distance_ref_km"), "must be > 0");
    r.queue_time_ref_s = s.number("queue_time_ref_s", r.queue_time_ref_s);
    require(r.queue_time_ref_s > 0.0, s.key("queue_time_ref_s"), "must be > 0");
    r.queue_weight = s.number("queue_weight", r.queue_weight);
    require(r.queue_weight >= 0.0, s.key("queue_weight"), "must be >= 0");
    s.finish();
}

void parse_qrouting(Section& s, QRoutingConfig& q) {
    q.alpha = s.number("alpha", q.alpha);
    require(q.alpha > 0.0 && q.alpha <= 1.0, s.key("alpha"), "must be in (0, 1]");
    q.discount = s.number("discount", q.discount);
    require(q.discount > 0.0 && q.discount <= 1.0, s.key("discount"), "must be in (0, 1]");
    q.epsilon_start = s.number("epsilon_start", q.epsilon_start);
    require(q.epsilon_start >= 0.0 && q.epsilon_start <= 1.0, s.key("epsilon_start"), "must be in [0, 1]");
    q.epsilon_end = s.number("epsilon_end", q.epsilon_end);
    require(q.epsilon_end >= 0.0 && q.epsilon_end <= q.epsilon_start, s.key("epsilon_end"),
            "must be in [0, epsilon_start]");
    q.epsilon_decay_per_step = s.number("epsilon_decay_per_step", q.epsilon_decay_per_step);
    require(q.epsilon_decay_per_step > 0.0 && q.epsilon_decay_per_step < 1.0, s.key("epsilon_decay_per_step"),
            "must be in (0, 1)");
    q.step_every_s = s.number("step_every_s", q.step_every_s);
    require(q.step_every_s > 0.0, s.key("step_every_s"), "must be > 0");
    s.finish();
}

json link_json(const LinkBudgetParams& p) {
    return {{"tx_power_dbw", p.tx_power_dbw},       {"tx_gain_dbi", p.tx_gain_dbi},
            {"rx_gain_dbi", p.rx_gain_dbi},         {"frequency_ghz", p.frequency_ghz},
            {"symbol_rate_baud", p.symbol_rate_baud}, {"noise_temperature_k", p.noise_temperature_k},
            {"losses_misc_db", p.losses_misc_db}};
}

}  // namespace

const char* to_string(RouterKind r) {
    switch (r) {
        case RouterKind::Dijkstra: return "dijkstra";
        case RouterKind::QRouting: return "qrouting";
        case RouterKind::Madrl: return "madrl";
    }
    return "unknown";
}

RouterKind router_from_string(const std::string& s) {
    if (s == "dijkstra") return RouterKind::Dijkstra;
    if (s == "qrouting") return RouterKind::QRouting;
    if (s == "madrl") return RouterKind::Madrl;
    throw ConfigError("router", "expected \"dijkstra\", \"qrouting\" or \"madrl\", got \"" + s + "\"");
}

Scenario RunConfig::scenario() const {
    Scenario s;
    s.topology.shell = constellation;
    for (const auto& g : gateways) s.topology.gateways.push_back(g.position);
    s.topology.isl_params = isl;
    s.topology.gsl_params = gsl;
    s.topology.modcod = modcod;
    s.topology.interplane_policy = interplane_policy;
    s.traffic = traffic;
    s.traffic.seed = seed;
    s.sim = simulator;
    return s;
}

RunConfig default_config() {
    RunConfig c;
    c.gateways = {
        {"London", {51.5074, -0.1278, 0.0}},     {"New York", {40.7128, -74.0060, 0.0}},
        {"Tokyo", {35.6762, 139.6503, 0.0}},     {"Sydney", {-33.8688, 151.2093, 0.0}},
        {"Sao Paulo", {-23.5505, -46.6333, 0.0}}, {"Johannesburg", {-26.2041, 28.0473, 0.0}},
        {"Mumbai", {19.0760, 72.8777, 0.0}},     {"Los Angeles", {34.0522, -118.2437, 0.0}},
    };
    c.gsl = {10.0, 32.0, 32.0, 20.0, 20e6, 500.0, 3.0};
    return c;
}

RunConfig parse_config(const json& doc) {
    RunConfig c = default_config();
    Section root(doc, "");
    c.set_seed(static_cast<std::uint64_t>(root.integer("seed", static_cast<std::int64_t>(c.seed))));
    c.output_dir = root.text("output_dir", c.output_dir);
    if (root.has("router")) c.router = router_from_string(root.text("router", "dijkstra"));
    if (root.has("constellation")) {
        Section s(root.at("constellation"), "constellation");
        c.constellation = parse_shell(s, c.interplane_policy);
    }
    if (root.has("gateways")) c.gateways = parse_gateways(root.at("gateways"));
    if (root.has("links")) {
        Section s(root.at("links"), "links");
        if (s.has("isl")) c.isl = parse_link(s.at("isl"), "links.isl", c.isl);
        if (s.has("gsl")) c.gsl = parse_link(s.at("gsl"), "links.gsl", c.gsl);
        s.finish();
    }
    if (root.has("modcod")) c.modcod = parse_modcod(root.at("modcod"));
    if (root.has("traffic")) {
        Section s(root.at("traffic"), "traffic");
        parse_traffic(s, c.traffic);
    }
    if (root.has("simulator")) {
        Section s(root.at("simulator"), "simulator");
        parse_simulator(s, c.simulator, c.constellation);
    }
    if (root.has("phase")) {
        Section s(root.at("phase"), "phase");
        parse_phase(s, c.phase, c.weights_path);
    }
    if (root.has("training")) {
        Section s(root.at("training"), "training");
        parse_training(s, c.training);
    }
    if (root.has("reward")) {
        Section s(root.at("reward"), "reward");
        parse_reward(s, c.reward);
    }
    if (root.has("qrouting")) {
        Section s(root.at("qrouting"), "qrouting");
        parse_qrouting(s, c.qrouting);
    }
    root.finish();
    c.traffic.seed = c.seed;
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json gateways = json::array();
    for (const auto& g : c.gateways)
        gateways.push_back({{"name", g.name},
                            {"lat", g.position.latitude_deg},
                            {"lon", g.position.longitude_deg},
                            {"alt_km", g.position.altitude_km}});
    json modcod = json::array();
    for (const auto& r : c.modcod.rows())
        modcod.push_back({{"name", r.name}, {"efficiency", r.spectral_efficiency}, {"required_snr_db", r.required_snr_db}});
    json simulator = {{"queue_capacity", c.simulator.queue_capacity},
                      {"ttl_hops", c.simulator.ttl_hops},
                      {"topology_refresh_s", c.simulator.topology_refresh_s},
                      {"drain_s", c.simulator.drain_s},
                      {"start_time_s", c.simulator.start_time_s},
                      {"feedback_consumes_bandwidth", c.simulator.feedback_consumes_bandwidth},
                      {"feedback_bits", c.simulator.feedback_bits},
                      {"corridor", nullptr}};
    if (c.simulator.corridor)
        simulator["corridor"] = {{"plane", c.simulator.corridor->plane},
                                 {"fill_fraction", c.simulator.corridor->fill_fraction}};
    json phase = {
        {"mode", c.phase.mode == Phase::OfflineExploration ? "offline-exploration" : "online-exploitation"},
        {"epsilon_start", c.phase.epsilon_start},
        {"epsilon_end", c.phase.epsilon_end},
        {"epsilon_decay_per_step", c.phase.epsilon_decay_per_step},
        {"train_every_s", c.phase.train_every_s},
        {"buffer_capacity", c.phase.buffer_capacity},
        {"local_buffer_capacity", c.phase.local_buffer_capacity},
        {"online_learning_enabled", c.phase.online_learning_enabled},
        {"congestion_metric", c.phase.congestion_metric == CongestionMetric::Occupancy ? "occupancy" : "queue_delay"},
        {"weights_path", c.weights_path ? json(*c.weights_path) : json(nullptr)}};
    return {
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"router", to_string(c.router)},
        {"constellation",
         {{"num_planes", c.constellation.num_planes},
          {"sats_per_plane", c.constellation.sats_per_plane},
          {"altitude_km", c.constellation.altitude_km},
          {"inclination_deg", c.constellation.inclination_deg},
          {"phasing_offset_deg", c.constellation.phasing_offset_deg},
          {"raan_spread_deg", c.constellation.raan_spread_deg},
          {"interplane_policy", c.interplane_policy == InterplanePolicy::Nearest ? "nearest" : "same_slot"}}},
        {"gateways", gateways},
        {"links", {{"isl", link_json(c.isl)}, {"gsl", link_json(c.gsl)}}},
        {"modcod", modcod},
        {"traffic",
         {{"per_gateway_rate", c.traffic.per_gateway_rate},
          {"packet_size_bits", c.traffic.packet_size_bits},
          {"duration_s", c.traffic.duration_s}}},
        {"simulator", simulator},
        {"phase", phase},
        {"training",
         {{"learning_rate", c.training.learning_rate},
          {"batch_size", c.training.batch_size},
          {"discount", c.training.discount},
          {"target_sync_every", c.training.target_sync_every},
          {"hidden_layers", c.training.hidden_layers}}},
        {"reward",
         {{"distance_ref_km", c.reward.distance_ref_km},
          {"queue_time_ref_s", c.reward.queue_time_ref_s},
          {"queue_weight", c.reward.queue_weight}}},
        {"qrouting",
         {{"alpha", c.qrouting.alpha},
          {"discount", c.qrouting.discount},
          {"epsilon_start", c.qrouting.epsilon_start},
          {"epsilon_end", c.qrouting.epsilon_end},
          {"epsilon_decay_per_step", c.qrouting.epsilon_decay_per_step},
          {"step_every_s", c.qrouting.step_every_s}}},
    };
}

void check_runnable(const RunConfig& c) {
    if (c.gateways.size() < 2) throw ConfigError("gateways", "at least two gateways are required");
    if (c.router == RouterKind::Madrl && c.phase.mode == Phase::OnlineExploitation &&
        (!c.weights_path || c.weights_path->empty()))
        throw ConfigError("phase.weights_path", "online exploitation needs pretrained weights");
}

}  // namespace leo
