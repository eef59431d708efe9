#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "leo_madrl/experiment.hpp"

using namespace leo;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("leo_madrl_unit_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string key_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

RunConfig tiny_config(const std::filesystem::path& out) {
    RunConfig c = default_config();
    c.constellation.num_planes = 4;
    c.constellation.sats_per_plane = 5;
    c.gateways.resize(3);
    c.traffic.per_gateway_rate = 12.0;
    c.traffic.duration_s = 3.0;
    c.set_seed(3);
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST_CASE("shipped default config loads") {
    const RunConfig c = load_config(LEO_MADRL_SOURCE_DIR "/configs/default.json");
    CHECK(c.gateways.size() == 8);
    CHECK(c.constellation == OrbitalShell{});
    CHECK(c.modcod.rows().size() == 8);
    const RunConfig again = parse_config(to_json(c));
    CHECK(to_json(again) == to_json(c));
}

TEST_CASE("config errors name their key") {
    CHECK(key_of({{"phase", {{"epsilon_start", 1.5}}}}) == "phase.epsilon_start");
    CHECK(key_of({{"gateways", {{{"name", "A"}, {"lat", 0.0}, {"lon", 0.0}}}}}) == "gateways");
    CHECK(key_of({{"constellation", {{"num_plane", 3}}}}) == "constellation.num_plane");
    CHECK(key_of({{"bogus", 1}}) == "bogus");
    CHECK(key_of({{"router", "ospf"}}) == "router");
    CHECK(key_of({{"traffic", {{"packet_size_bits", -1}}}}) == "traffic.packet_size_bits");
    CHECK(key_of({{"gateways", {{{"lat", 91.0}, {"lon", 0.0}}, {{"lat", 0.0}, {"lon", 0.0}}}}}) == "gateways[0].lat");
    CHECK(key_of({{"training", {{"hidden_layers", {64, 0}}}}}) == "training.hidden_layers");
    CHECK(key_of({{"modcod", {{{"name", "a"}, {"efficiency", 2.0}, {"required_snr_db", 1.0}},
                              {{"name", "b"}, {"efficiency", 1.0}, {"required_snr_db", 2.0}}}}}) == "modcod");
    CHECK(key_of({{"seed", "seven"}}) == "seed");
    CHECK(key_of({{"simulator", {{"corridor", {{"plane", 12}}}}}}) == "simulator.corridor.plane");
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("online exploitation without weights is refused") {
    RunConfig c = default_config();
    c.router = RouterKind::Madrl;
    c.phase.mode = Phase::OnlineExploitation;
    try {
        check_runnable(c);
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "phase.weights_path");
    }
    c.weights_path = "w.bin";
    CHECK_NOTHROW(check_runnable(c));
}

TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const auto f = parse_csv_line("1,\"a,b\",\"say \"\"hi\"\"\",");
    CHECK(f == std::vector<std::string>{"1", "a,b", "say \"hi\"", ""});
    CHECK(parse_seconds("12.000000345") == SimTime{12000000345});
    CHECK(parse_seconds("0.5") == SimTime{500000000});
    CHECK_THROWS(parse_seconds("1.0000000001"));
    CHECK_THROWS(parse_seconds("abc"));
}

TEST_CASE("dijkstra experiment writes consistent artifacts") {
    const auto dir = fresh_dir("dijkstra");
    const RunConfig cfg = tiny_config(dir);
    const ExperimentResult res = run_experiment(cfg);
    for (const char* name : {"config.json", "packets.csv", "summary.csv", "latency.svg"})
        CHECK(std::filesystem::exists(dir / name));
    CHECK_FALSE(std::filesystem::exists(dir / "training.csv"));

    const RunRecord run = load_run(dir);
    CHECK(run.router == "dijkstra");
    CHECK(run.seed == 3);
    REQUIRE(run.packets.size() == res.report.packets.size());
    CHECK(run.packets == make_record(res.report).packets);
    for (std::size_t i = 0; i < run.packets.size(); ++i) {
        const Packet& p = res.report.packets[i];
        CHECK(p.delivered());
        CHECK(run.packets[i].latency() == p.logged_latency());
    }

    // aggregates recomputed from the per-packet rows
    std::map<std::string, std::string> kv;
    {
        std::ifstream in(dir / "summary.csv");
        std::string line;
        while (std::getline(in, line)) {
            const auto f = parse_csv_line(line);
            kv[f[0]] = f[1];
        }
    }
    std::int64_t sum = 0;
    std::vector<std::int64_t> lat;
    for (const auto& r : run.packets) {
        sum += r.latency()->count();
        lat.push_back(r.latency()->count());
    }
    std::sort(lat.begin(), lat.end());
    const double mean = static_cast<double>(sum) * 1e-9 / static_cast<double>(lat.size());
    CHECK(std::stod(kv["mean_latency_s"]) == mean);
    CHECK(std::stod(kv["median_latency_s"]) == to_seconds(SimTime{lat[(lat.size() + 1) / 2 - 1]}));
    const auto k95 = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lat.size())));
    CHECK(std::stod(kv["p95_latency_s"]) == to_seconds(SimTime{lat[k95 - 1]}));
    CHECK(kv["delivered"] == std::to_string(lat.size()));

    const std::string svg = slurp(dir / "latency.svg");
    CHECK(svg.find("width=\"800\" height=\"500\"") != std::string::npos);
    CHECK(svg.find("dijkstra") != std::string::npos);
}

TEST_CASE("repeat runs are byte identical") {
    const auto a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b");
    RunConfig cfg = tiny_config(a);
    cfg.router = RouterKind::QRouting;
    run_experiment(cfg);
    cfg.output_dir = b.string();
    run_experiment(cfg);
    for (const char* name : {"packets.csv", "summary.csv", "training.csv"}) CHECK(slurp(a / name) == slurp(b / name));
}

TEST_CASE("madrl experiments write weight files") {
    const auto dir = fresh_dir("madrl_offline");
    RunConfig cfg = tiny_config(dir);
    cfg.router = RouterKind::Madrl;
    cfg.training.hidden_layers = {8};
    cfg.training.batch_size = 8;
    run_experiment(cfg);
    CHECK(std::filesystem::exists(dir / "training.csv"));
    REQUIRE(std::filesystem::exists(dir / kGlobalWeightsFilename));

    const auto online = fresh_dir("madrl_online");
    cfg.output_dir = online.string();
    cfg.phase.mode = Phase::OnlineExploitation;
    cfg.weights_path = (dir / kGlobalWeightsFilename).string();
    run_experiment(cfg);
    CHECK(agent_weights_filename(cfg.constellation, 7) == "dnn_p1_s2.bin");
    for (int s = 0; s < cfg.constellation.num_satellites(); ++s)
        CHECK(std::filesystem::exists(online / agent_weights_filename(cfg.constellation, s)));
    CHECK(slurp(online / "dnn_p0_s0.bin") == slurp(dir / kGlobalWeightsFilename));
}

TEST_CASE("comparison") {
    const auto a = fresh_dir("cmp_a"), b = fresh_dir("cmp_b"), out = fresh_dir("cmp_out");
    RunConfig cfg = tiny_config(a);
    run_experiment(cfg);
    cfg.router = RouterKind::QRouting;
    cfg.output_dir = b.string();
    run_experiment(cfg);
    const RunRecord ra = load_run(a), rb = load_run(b);

    const Comparison self = compare_runs({ra, ra});
    CHECK(*self.rows[1].tail_ratio == 1.0);

    const Comparison cmp = compare_runs({ra, rb});
    CHECK(cmp.rows.size() == 2);
    CHECK(*cmp.rows[1].tail_ratio == *tail_mean_latency(rb.packets) / *tail_mean_latency(ra.packets));
    write_comparison(out, {ra, rb}, cmp);
    for (const char* name : {"comparison.csv", "aligned.csv", "latency.svg"}) CHECK(std::filesystem::exists(out / name));

    RunRecord other = rb;
    other.seed = 4;
    CHECK_THROWS_AS(compare_runs({ra, other}), std::invalid_argument);
    CHECK_THROWS_AS(compare_runs({ra}), std::invalid_argument);
}

TEST_CASE("windows over packet ids") {
    std::vector<PacketRow> rows(20);
    for (int i = 0; i < 20; ++i) {
        rows[i].id = i;
        rows[i].created_at = SimTime{i * 1000};
        rows[i].delivered_at = SimTime{i * 1000 + (i < 10 ? 4000 : 2000)};
    }
    rows[19].delivered_at.reset();
    rows[19].dropped = "ttl_expired";
    CHECK(*window_mean_latency(rows, 0.9, 1.0) == doctest::Approx(2e-6).epsilon(1e-12));  // only id 18
    CHECK(*leading_mean_latency(rows, 5) == doctest::Approx(4e-6).epsilon(1e-12));
    const Summary s = summarize(rows);
    CHECK(s.delivered == 19);
    CHECK(s.dropped == 1);
}
