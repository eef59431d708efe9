#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leo_madrl/sim.hpp"

namespace leo {

// One line of packets.csv.
struct PacketRow {
    std::int64_t id = 0;
    int src = 0;
    int dst = 0;
    SimTime created_at{};
    std::optional<SimTime> delivered_at;
    int hops = 0;
    std::string dropped = "none";  // drop reason, "none" when delivered

    std::optional<SimTime> latency() const {
        if (!delivered_at) return std::nullopt;
        return *delivered_at - created_at;
    }
    bool operator==(const PacketRow&) const = default;
};

// A finished run as persisted on disk: enough to summarize and compare.
struct RunRecord {
    std::string router;
    std::uint64_t seed = 0;
    std::vector<PacketRow> packets;  // ordered by id
};

RunRecord make_record(const SimReport& report);

struct Summary {
    std::int64_t created = 0;
    std::int64_t delivered = 0;
    std::int64_t dropped = 0;
    // Seconds. The mean is (total ns * 1e-9) / delivered; median and p95 are
    // nearest-rank order statistics.
    std::optional<double> mean_latency_s;
    std::optional<double> median_latency_s;
    std::optional<double> p95_latency_s;
};

Summary summarize(const std::vector<PacketRow>& rows);

// Mean latency of the delivered packets among rows [floor(lo*n), floor(hi*n)).
std::optional<double> window_mean_latency(const std::vector<PacketRow>& rows, double lo_frac, double hi_frac);
// Same over the first `count` rows.
std::optional<double> leading_mean_latency(const std::vector<PacketRow>& rows, std::size_t count);

inline constexpr double kTailFraction = 0.10;
inline std::optional<double> tail_mean_latency(const std::vector<PacketRow>& rows) {
    return window_mean_latency(rows, 1.0 - kTailFraction, 1.0);
}

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::vector<std::string> parse_csv_line(const std::string& line);

// Exact inverse of format_seconds; throws std::invalid_argument.
SimTime parse_seconds(const std::string& s);

void write_packets_csv(const std::filesystem::path& path, const RunRecord& run);
std::vector<PacketRow> read_packets_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, const RunRecord& run);
void write_training_csv(const std::filesystem::path& path, const std::vector<TrainingLogRow>& log);

// Reads packets.csv and summary.csv from a run directory.
RunRecord load_run(const std::filesystem::path& dir);

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (creation time s, latency s)
};

PlotSeries latency_series(const RunRecord& run);
// 800x500 scatter of latency against creation time with a rolling mean per series.
std::string render_latency_svg(const std::vector<PlotSeries>& series, const std::string& title);

struct ComparisonRow {
    std::string router;
    std::int64_t delivered = 0;
    std::optional<double> mean_latency_s;
    std::optional<double> tail_mean_latency_s;
    std::optional<double> tail_ratio;  // tail mean / reference tail mean
};

struct Comparison {
    std::uint64_t seed = 0;
    std::vector<ComparisonRow> rows;  // first row is the reference
};

// Throws std::invalid_argument for fewer than two runs or differing seeds.
Comparison compare_runs(const std::vector<RunRecord>& runs);

// comparison.csv, aligned.csv (per-packet latency per run) and latency.svg.
void write_comparison(const std::filesystem::path& dir, const std::vector<RunRecord>& runs, const Comparison& cmp);

}  // namespace leo
