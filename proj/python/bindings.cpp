#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "leo_madrl/experiment.hpp"

namespace py = pybind11;
using namespace leo;

namespace {

py::dict summary_dict(const RunRecord& run) {
    const Summary s = summarize(run.packets);
    py::dict d;
    d["router"] = run.router;
    d["seed"] = run.seed;
    d["created"] = s.created;
    d["delivered"] = s.delivered;
    d["dropped"] = s.dropped;
    d["mean_latency_s"] = s.mean_latency_s;
    d["median_latency_s"] = s.median_latency_s;
    d["p95_latency_s"] = s.p95_latency_s;
    d["tail_mean_latency_s"] = tail_mean_latency(run.packets);
    return d;
}

py::list packet_rows(const RunRecord& run) {
    py::list rows;
    for (const auto& r : run.packets) {
        py::dict d;
        d["id"] = r.id;
        d["src"] = r.src;
        d["dst"] = r.dst;
        d["created_at"] = to_seconds(r.created_at);
        d["delivered_at"] = r.delivered_at ? py::cast(to_seconds(*r.delivered_at)) : py::none();
        d["hops"] = r.hops;
        d["e2e_latency_s"] = r.latency() ? py::cast(to_seconds(*r.latency())) : py::none();
        d["dropped"] = r.dropped;
        rows.append(d);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "LEO constellation routing simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<EcefVector>(m, "EcefVector")
        .def(py::init([](double x, double y, double z) { return EcefVector{x, y, z}; }), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
        .def_readwrite("x", &EcefVector::x)
        .def_readwrite("y", &EcefVector::y)
        .def_readwrite("z", &EcefVector::z)
        .def("norm", &EcefVector::norm)
        .def("__iter__", [](const EcefVector& v) { return py::iter(py::make_tuple(v.x, v.y, v.z)); })
        .def("__repr__", [](const EcefVector& v) {
            return "EcefVector(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " + std::to_string(v.z) + ")";
        });

    py::class_<GeoPosition>(m, "GeoPosition")
        .def(py::init([](double lat, double lon, double alt) { return GeoPosition{lat, lon, alt}; }), py::arg("latitude_deg"), py::arg("longitude_deg"),
             py::arg("altitude_km") = 0.0)
        .def_readwrite("latitude_deg", &GeoPosition::latitude_deg)
        .def_readwrite("longitude_deg", &GeoPosition::longitude_deg)
        .def_readwrite("altitude_km", &GeoPosition::altitude_km);

    py::class_<OrbitalShell>(m, "OrbitalShell")
        .def(py::init<>())
        .def_readwrite("num_planes", &OrbitalShell::num_planes)
        .def_readwrite("sats_per_plane", &OrbitalShell::sats_per_plane)
        .def_readwrite("altitude_km", &OrbitalShell::altitude_km)
        .def_readwrite("inclination_deg", &OrbitalShell::inclination_deg)
        .def_readwrite("phasing_offset_deg", &OrbitalShell::phasing_offset_deg)
        .def_readwrite("raan_spread_deg", &OrbitalShell::raan_spread_deg)
        .def("num_satellites", &OrbitalShell::num_satellites)
        .def("period_s", &OrbitalShell::period_s)
        .def("validate", &OrbitalShell::validate);

    m.def(
        "satellite_position",
        [](const OrbitalShell& shell, int plane, int slot, double t) { return satellite_position(shell, {plane, slot}, t); },
        py::arg("shell"), py::arg("plane"), py::arg("slot"), py::arg("t_s"));
    m.def("geodetic_to_ecef", &geodetic_to_ecef);
    m.def("gateway_position", &gateway_position, py::arg("gateway"), py::arg("t_s"));
    m.def("slant_range", &slant_range);

    py::class_<LinkBudgetParams>(m, "LinkBudgetParams")
        .def(py::init<>())
        .def_readwrite("tx_power_dbw", &LinkBudgetParams::tx_power_dbw)
        .def_readwrite("tx_gain_dbi", &LinkBudgetParams::tx_gain_dbi)
        .def_readwrite("rx_gain_dbi", &LinkBudgetParams::rx_gain_dbi)
        .def_readwrite("frequency_ghz", &LinkBudgetParams::frequency_ghz)
        .def_readwrite("symbol_rate_baud", &LinkBudgetParams::symbol_rate_baud)
        .def_readwrite("noise_temperature_k", &LinkBudgetParams::noise_temperature_k)
        .def_readwrite("losses_misc_db", &LinkBudgetParams::losses_misc_db);

    m.def("free_space_path_loss_db", &free_space_path_loss_db, py::arg("distance_km"), py::arg("frequency_ghz"));
    m.def("link_snr_db", &link_snr_db, py::arg("params"), py::arg("distance_km"));
    m.def(
        "link_data_rate_bps",
        [](const LinkBudgetParams& p, double d) { return link_data_rate_bps(p, default_modcod_table(), d); },
        py::arg("params"), py::arg("distance_km"), "Rate under the default MODCOD table, None if infeasible.");
    m.def(
        "select_modcod",
        [](double snr) -> std::optional<py::tuple> {
            const auto row = select_modcod(default_modcod_table(), snr);
            if (!row) return std::nullopt;
            return py::make_tuple(row->name, row->spectral_efficiency, row->required_snr_db);
        },
        py::arg("snr_db"), "Default-table row as (name, efficiency, required_snr_db), None if infeasible.");

    m.def(
        "hop_latency",
        [](double q, double size, double rate, double dist) {
            const HopLatency h = hop_latency(q, size, rate, dist);
            return py::make_tuple(h.tx_delay_s, h.prop_delay_s, h.total_s);
        },
        py::arg("queue_delay_s"), py::arg("size_bits"), py::arg("rate_bps"), py::arg("distance_km"));
    m.def(
        "compute_reward",
        [](double before, double after, double q, double l_ref, double t_ref, double beta) {
            return compute_reward(before, after, q, RewardConfig{l_ref, t_ref, beta});
        },
        py::arg("d_before_km"), py::arg("d_after_km"), py::arg("queue_time_s"), py::arg("distance_ref_km") = 1000.0,
        py::arg("queue_time_ref_s") = 0.010, py::arg("queue_weight") = 1.0);

    py::class_<MlpParams>(m, "MlpParams")
        .def_readonly("layer_dims", &MlpParams::layer_dims)
        .def_readonly("weights", &MlpParams::weights)
        .def_readonly("biases", &MlpParams::biases)
        .def("parameter_count", &MlpParams::parameter_count)
        .def("__eq__", [](const MlpParams& a, const MlpParams& b) { return a == b; });
    m.def(
        "init_mlp",
        [](std::vector<int> dims, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return init_mlp(std::move(dims), rng);
        },
        py::arg("layer_dims"), py::arg("seed") = 1);
    m.def(
        "forward", [](const MlpParams& p, std::vector<double> x) { return forward(p, x); }, py::arg("params"),
        py::arg("input"));
    m.def("save_weights", &save_weights, py::arg("params"), py::arg("path"));
    m.def("load_weights", &load_weights, py::arg("path"));
    m.def(
        "serialize_weights",
        [](const MlpParams& p) {
            const auto b = serialize_weights(p);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        },
        py::arg("params"));

    py::class_<RunConfig>(m, "RunConfig")
        .def_property(
            "seed", [](const RunConfig& c) { return c.seed; }, [](RunConfig& c, std::uint64_t s) { c.set_seed(s); })
        .def_property(
            "router", [](const RunConfig& c) { return std::string(to_string(c.router)); },
            [](RunConfig& c, const std::string& r) { c.router = router_from_string(r); })
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("weights_path", &RunConfig::weights_path)
        .def_readwrite("constellation", &RunConfig::constellation)
        .def_property(
            "duration_s", [](const RunConfig& c) { return c.traffic.duration_s; },
            [](RunConfig& c, double d) { c.traffic.duration_s = d; })
        .def_property(
            "per_gateway_rate", [](const RunConfig& c) { return c.traffic.per_gateway_rate; },
            [](RunConfig& c, double r) { c.traffic.per_gateway_rate = r; })
        .def_property(
            "phase", [](const RunConfig& c) { return c.phase.mode == Phase::OfflineExploration ? "offline-exploration" : "online-exploitation"; },
            [](RunConfig& c, const std::string& p) {
                if (p == "offline-exploration") c.phase.mode = Phase::OfflineExploration;
                else if (p == "online-exploitation") c.phase.mode = Phase::OnlineExploitation;
                else throw ConfigError("phase.mode", "unknown phase \"" + p + "\"");
            })
        .def_property_readonly("gateway_names",
                               [](const RunConfig& c) {
                                   std::vector<std::string> n;
                                   for (const auto& g : c.gateways) n.push_back(g.name);
                                   return n;
                               })
        .def("to_json", [](const RunConfig& c) { return to_json(c).dump(2); });

    m.def("default_config", &default_config);
    m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));
    m.def(
        "parse_config", [](const std::string& text) { return parse_config(nlohmann::json::parse(text)); },
        py::arg("json_text"));

    m.def(
        "run_experiment",
        [](const RunConfig& cfg, bool write_artifacts) {
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg, write_artifacts);
            }
            const RunRecord run = make_record(res.report);
            py::dict out;
            out["summary"] = summary_dict(run);
            out["packets"] = packet_rows(run);
            std::vector<std::string> artifacts;
            for (const auto& a : res.artifacts) artifacts.push_back(a.string());
            out["artifacts"] = artifacts;
            out["training_steps"] = res.training_log.size();
            return out;
        },
        py::arg("config"), py::arg("write_artifacts") = true);

    m.def(
        "load_run", [](const std::filesystem::path& dir) {
            const RunRecord run = load_run(dir);
            py::dict out;
            out["summary"] = summary_dict(run);
            out["packets"] = packet_rows(run);
            return out;
        },
        py::arg("run_dir"));

    m.def(
        "compare_runs",
        [](const std::vector<std::filesystem::path>& dirs, std::optional<std::filesystem::path> out_dir) {
            std::vector<RunRecord> runs;
            for (const auto& d : dirs) runs.push_back(load_run(d));
            const Comparison cmp = compare_runs(runs);
            if (out_dir) write_comparison(*out_dir, runs, cmp);
            py::list rows;
            for (const auto& r : cmp.rows) {
                py::dict d;
                d["router"] = r.router;
                d["delivered"] = r.delivered;
                d["mean_latency_s"] = r.mean_latency_s;
                d["tail_mean_latency_s"] = r.tail_mean_latency_s;
                d["tail_ratio"] = r.tail_ratio;
                rows.append(d);
            }
            return rows;
        },
        py::arg("run_dirs"), py::arg("out_dir") = std::nullopt);
}
