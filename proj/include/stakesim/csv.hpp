#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stakesim/metrics.hpp"

namespace stakesim::harness {

/// Shortest text that parses back to the same double; "inf" for +infinity.
/// Throws NumericError for NaN, which never goes into an emitted row.
std::string format_double(double x);
double parse_double(std::string_view s);

struct SweepRow {
    std::string axis1_name;
    double axis1_value = 0.0;
    std::string axis2_name;
    double axis2_value = 0.0;
    std::string metric;
    std::string stat;
    double value = 0.0;

    bool operator==(const SweepRow&) const = default;
};

struct AnalyticRow {
    double p = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double aleph = 0.0;
    double k = 0.0;
    double sigma_s2 = 0.0;
    double s_star = 0.0;
};

inline constexpr std::string_view kTrajectoryHeader = "h,gini,norm_ratio,supply_ratio,frac_defaulted,w_s,w_d,w_l";
inline constexpr std::string_view kSweepHeader = "axis1_name,axis1_value,axis2_name,axis2_value,metric,stat,value";
inline constexpr std::string_view kAnalyticHeader = "p,gamma,beta,aleph,k,sigma_s2,s_star";

/// Weight columns stay empty for rows without weights.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_analytic_csv(std::ostream& out, const std::vector<AnalyticRow>& rows);

std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Writes `contents` to a sibling temp file and renames it over `path`.
/// Throws IoError naming the path.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace stakesim::harness
