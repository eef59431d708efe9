#include "leo_madrl/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace leo {

namespace {

std::string fmt_double(double v) { return fmt::format("{}", v); }
std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

std::optional<double> mean_of(const std::vector<PacketRow>& rows, std::size_t lo, std::size_t hi) {
    std::int64_t sum = 0;
    std::int64_t n = 0;
    for (std::size_t i = lo; i < hi && i < rows.size(); ++i) {
        if (auto l = rows[i].latency()) {
            sum += l->count();
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(sum) * 1e-9 / static_cast<double>(n);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

RunRecord make_record(const SimReport& report) {
    RunRecord run;
    run.router = report.router;
    run.seed = report.seed;
    run.packets.reserve(report.packets.size());
    for (const Packet& p : report.packets) {
        PacketRow r;
        r.id = p.id;
        r.src = p.src_gateway;
        r.dst = p.dst_gateway;
        r.created_at = p.created_at;
        r.delivered_at = p.delivered_at;
        r.hops = p.hops();
        r.dropped = to_string(p.drop_reason);
        run.packets.push_back(std::move(r));
    }
    return run;
}

Summary summarize(const std::vector<PacketRow>& rows) {
    Summary s;
    s.created = static_cast<std::int64_t>(rows.size());
    std::vector<std::int64_t> lat;
    for (const auto& r : rows) {
        if (auto l = r.latency()) lat.push_back(l->count());
        else if (r.dropped != "none") ++s.dropped;
    }
    s.delivered = static_cast<std::int64_t>(lat.size());
    if (lat.empty()) return s;
    s.mean_latency_s = mean_of(rows, 0, rows.size());
    std::sort(lat.begin(), lat.end());
    const auto rank = [&](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
        return to_seconds(SimTime{lat[std::max<std::size_t>(k, 1) - 1]});
    };
    s.median_latency_s = rank(0.5);
    s.p95_latency_s = rank(0.95);
    return s;
}

std::optional<double> window_mean_latency(const std::vector<PacketRow>& rows, double lo_frac, double hi_frac) {
    const double n = static_cast<double>(rows.size());
    return mean_of(rows, static_cast<std::size_t>(std::floor(lo_frac * n)),
                   static_cast<std::size_t>(std::floor(hi_frac * n)));
}

std::optional<double> leading_mean_latency(const std::vector<PacketRow>& rows, std::size_t count) {
    return mean_of(rows, 0, count);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    return fields;
}

SimTime parse_seconds(const std::string& s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && s[i] == '-') {
        neg = true;
        ++i;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int digits = 0;
    bool any = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, any = true) whole = whole * 10 + (s[i] - '0');
    if (i < s.size() && s[i] == '.') {
        for (++i; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i, any = true) {
            if (++digits > 9) throw std::invalid_argument("more than nine decimals in \"" + s + "\"");
            frac = frac * 10 + (s[i] - '0');
        }
    }
    if (!any || i != s.size()) throw std::invalid_argument("not a seconds value: \"" + s + "\"");
    for (; digits < 9; ++digits) frac *= 10;
    const std::int64_t ns = whole * 1000000000 + frac;
    return SimTime{neg ? -ns : ns};
}

void write_packets_csv(const std::filesystem::path& path, const RunRecord& run) {
    auto out = open_out(path);
    out << "id,src,dst,created_at,delivered_at,hops,e2e_latency_s,dropped\r\n";
    for (const auto& r : run.packets) {
        const auto l = r.latency();
        out << r.id << ',' << r.src << ',' << r.dst << ',' << format_seconds(r.created_at) << ','
            << (r.delivered_at ? format_seconds(*r.delivered_at) : "") << ',' << r.hops << ','
            << (l ? format_seconds(*l) : "") << ',' << csv_field(r.dropped) << "\r\n";
    }
}

std::vector<PacketRow> read_packets_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    if (parse_csv_line(line) !=
        std::vector<std::string>{"id", "src", "dst", "created_at", "delivered_at", "hops", "e2e_latency_s", "dropped"})
        throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<PacketRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = parse_csv_line(line);
        if (f.size() != 8) throw std::runtime_error(fmt::format("{}:{}: expected 8 fields", path.string(), lineno));
        try {
            PacketRow r;
            r.id = std::stoll(f[0]);
            r.src = std::stoi(f[1]);
            r.dst = std::stoi(f[2]);
            r.created_at = parse_seconds(f[3]);
            if (!f[4].empty()) r.delivered_at = parse_seconds(f[4]);
            r.hops = std::stoi(f[5]);
            r.dropped = f[7];
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return rows;
}

void write_summary_csv(const std::filesystem::path& path, const RunRecord& run) {
    const Summary s = summarize(run.packets);
    auto out = open_out(path);
    out << "key,value\r\n";
    out << "router," << csv_field(run.router) << "\r\n";
    out << "seed," << run.seed << "\r\n";
    out << "created," << s.created << "\r\n";
    out << "delivered," << s.delivered << "\r\n";
    out << "dropped," << s.dropped << "\r\n";
    out << "mean_latency_s," << fmt_opt(s.mean_latency_s) << "\r\n";
    out << "median_latency_s," << fmt_opt(s.median_latency_s) << "\r\n";
    out << "p95_latency_s," << fmt_opt(s.p95_latency_s) << "\r\n";
    out << "tail_mean_latency_s," << fmt_opt(tail_mean_latency(run.packets)) << "\r\n";
}

void write_training_csv(const std::filesystem::path& path, const std::vector<TrainingLogRow>& log) {
    auto out = open_out(path);
    out << "step,sim_time,epsilon,loss,window_mean_latency_s,buffer_size\r\n";
    for (const auto& r : log)
        out << r.step << ',' << format_seconds(r.sim_time) << ',' << fmt_double(r.epsilon) << ',' << fmt_opt(r.loss)
            << ',' << fmt_opt(r.window_mean_latency_s) << ',' << r.buffer_size << "\r\n";
}

RunRecord load_run(const std::filesystem::path& dir) {
    RunRecord run;
    auto in = open_in(dir / "summary.csv");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto f = parse_csv_line(line);
        if (f.size() == 2) kv[f[0]] = f[1];
    }
    if (!kv.count("router") || !kv.count("seed"))
        throw std::runtime_error((dir / "summary.csv").string() + ": missing router or seed");
    run.router = kv["router"];
    run.seed = std::stoull(kv["seed"]);
    run.packets = read_packets_csv(dir / "packets.csv");
    return run;
}

PlotSeries latency_series(const RunRecord& run) {
    PlotSeries s{run.router, {}};
    for (const auto& r : run.packets)
        if (auto l = r.latency()) s.points.emplace_back(to_seconds(r.created_at), to_seconds(*l));
    return s;
}

std::string render_latency_svg(const std::vector<PlotSeries>& series, const std::string& title) {
    constexpr double W = 800, H = 500, L = 70, R = 20, T = 40, B = 50;
    double xmax = 0.0, ymax = 0.0;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    xmax = xmax > 0.0 ? xmax : 1.0;
    ymax = ymax > 0.0 ? ymax * 1.05 : 1.0;
    const auto px = [&](double x) { return L + x / xmax * (W - L - R); };
    const auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };

    std::string escaped;
    for (char c : title) {
        if (c == '<') escaped += "&lt;";
        else if (c == '>') escaped += "&gt;";
        else if (c == '&') escaped += "&amp;";
        else escaped += c;
    }

    std::ostringstream svg;
    svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width="800" height="500" viewBox="0 0 800 500" font-family="sans-serif" font-size="12">)"
        << "\n";
    svg << R"(<rect width="800" height="500" fill="white"/>)" << "\n";
    svg << fmt::format(R"(<text x="400" y="22" text-anchor="middle" font-size="15">{}</text>)", escaped) << "\n";
    svg << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, H - B, W - R, H - B) << "\n";
    svg << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, T, L, H - B) << "\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmax * i / 5.0, yv = ymax * i / 5.0;
        svg << fmt::format(R"(<text x="{:.1f}" y="{}" text-anchor="middle">{:.3g}</text>)", px(xv), H - B + 18, xv)
            << "\n";
        svg << fmt::format(R"(<line x1="{:.1f}" y1="{}" x2="{:.1f}" y2="{}" stroke="black"/>)", px(xv), H - B, px(xv),
                           H - B + 5)
            << "\n";
        svg << fmt::format(R"(<text x="{}" y="{:.1f}" text-anchor="end">{:.3g}</text>)", L - 8, py(yv) + 4, yv * 1e3)
            << "\n";
        svg << fmt::format(R"(<line x1="{}" y1="{:.1f}" x2="{}" y2="{:.1f}" stroke="#dddddd"/>)", L, py(yv), W - R,
                           py(yv))
            << "\n";
    }
    svg << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">packet creation time (s)</text>)", (L + W - R) / 2,
                       H - 12)
        << "\n";
    svg << fmt::format(R"svg(<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">E2E latency (ms)</text>)svg",
                       (T + H - B) / 2, (T + H - B) / 2)
        << "\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        svg << fmt::format(R"(<g fill="{}" fill-opacity="0.35">)", color) << "\n";
        for (const auto& [x, y] : s.points)
            svg << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="1.3"/>)", px(x), py(y)) << "\n";
        svg << "</g>\n";

        // rolling mean over a window of about 2% of the series
        const std::size_t win = std::max<std::size_t>(1, s.points.size() / 50);
        if (s.points.size() >= 2) {
            svg << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="2" points=")", color);
            double sum = 0.0;
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                sum += s.points[i].second;
                if (i >= win) sum -= s.points[i - win].second;
                if (i + 1 >= win)
                    svg << fmt::format("{:.1f},{:.1f} ", px(s.points[i].first), py(sum / static_cast<double>(win)));
            }
            svg << "\"/>\n";
        }

        const double ly = T + 12 + 18.0 * static_cast<double>(k);
        svg << fmt::format(R"(<rect x="{}" y="{:.1f}" width="14" height="4" fill="{}"/>)", W - R - 150, ly - 4, color)
            << "\n";
        std::string name;
        for (char c : s.name) name += (c == '<' || c == '>' || c == '&') ? '_' : c;
        svg << fmt::format(R"(<text x="{}" y="{:.1f}">{}</text>)", W - R - 130, ly + 1, name) << "\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

Comparison compare_runs(const std::vector<RunRecord>& runs) {
    if (runs.size() < 2) throw std::invalid_argument("comparison needs at least two runs");
    for (const auto& r : runs)
        if (r.seed != runs.front().seed)
            throw std::invalid_argument(fmt::format(
                "runs use different traffic seeds ({} has {}, {} has {}); per-packet comparison needs identical traffic",
                runs.front().router, runs.front().seed, r.router, r.seed));
    Comparison cmp;
    cmp.seed = runs.front().seed;
    const auto reference = tail_mean_latency(runs.front().packets);
    for (const auto& r : runs) {
        ComparisonRow row;
        row.router = r.router;
        const Summary s = summarize(r.packets);
        row.delivered = s.delivered;
        row.mean_latency_s = s.mean_latency_s;
        row.tail_mean_latency_s = tail_mean_latency(r.packets);
        if (reference && row.tail_mean_latency_s) row.tail_ratio = *row.tail_mean_latency_s / *reference;
        cmp.rows.push_back(row);
    }
    return cmp;
}

void write_comparison(const std::filesystem::path& dir, const std::vector<RunRecord>& runs, const Comparison& cmp) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "comparison.csv");
        out << "router,seed,delivered,mean_latency_s,tail_mean_latency_s,tail_ratio\r\n";
        for (const auto& r : cmp.rows)
            out << csv_field(r.router) << ',' << cmp.seed << ',' << r.delivered << ',' << fmt_opt(r.mean_latency_s)
                << ',' << fmt_opt(r.tail_mean_latency_s) << ',' << fmt_opt(r.tail_ratio) << "\r\n";
    }
    {
        auto out = open_out(dir / "aligned.csv");
        out << "id,created_at";
        for (const auto& r : runs) out << ',' << csv_field(r.router);
        out << "\r\n";
        std::size_t n = 0;
        for (const auto& r : runs) n = std::max(n, r.packets.size());
        for (std::size_t i = 0; i < n; ++i) {
            const PacketRow* first = nullptr;
            for (const auto& r : runs)
                if (i < r.packets.size()) {
                    first = &r.packets[i];
                    break;
                }
            out << first->id << ',' << format_seconds(first->created_at);
            for (const auto& r : runs) {
                out << ',';
                if (i < r.packets.size())
                    if (auto l = r.packets[i].latency()) out << format_seconds(*l);
            }
            out << "\r\n";
        }
    }
    std::vector<PlotSeries> series;
    for (const auto& r : runs) series.push_back(latency_series(r));
    auto out = open_out(dir / "latency.svg");
    out << render_latency_svg(series, "E2E latency vs packet creation time");
}

}  // namespace leo
