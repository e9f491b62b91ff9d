#include "stakesim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stakesim/errors.hpp"

namespace stakesim::harness {

std::string format_double(double x) {
    if (std::isnan(x)) throw NumericError("refusing to emit NaN");
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("cannot parse number '" + std::string(s) + "'");
    return x;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
    out << kTrajectoryHeader << '\n';
    for (const auto& m : record) {
        out << m.h << ',' << format_double(m.gini) << ',' << format_double(m.norm_ratio) << ','
            << format_double(m.supply_ratio) << ',' << format_double(m.frac_defaulted);
        if (m.weights) {
            for (double w : *m.weights) out << ',' << format_double(w);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows)
        out << r.axis1_name << ',' << format_double(r.axis1_value) << ',' << r.axis2_name << ','
            << format_double(r.axis2_value) << ',' << r.metric << ',' << r.stat << ',' << format_double(r.value) << '\n';
}

void write_analytic_csv(std::ostream& out, const std::vector<AnalyticRow>& rows) {
    out << kAnalyticHeader << '\n';
    for (const auto& r : rows)
        out << format_double(r.p) << ',' << format_double(r.gamma) << ',' << format_double(r.beta) << ','
            << format_double(r.aleph) << ',' << format_double(r.k) << ',' << format_double(r.sigma_s2) << ','
            << format_double(r.s_star) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader) throw IoError("sweep CSV header mismatch");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 7) throw IoError("sweep CSV row has " + std::to_string(f.size()) + " fields");
        rows.push_back({f[0], parse_double(f[1]), f[2], parse_double(f[3]), f[4], f[5], parse_double(f[6])});
    }
    return rows;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace stakesim::harness
