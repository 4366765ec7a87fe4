#pragma once

#include "fgeo/config.hpp"
#include "fgeo/csv.hpp"

#include <string>

namespace fgeo {

inline constexpr const char* kVersion = "fgeo 0.1.0";

enum class ReportKind { Curvature, Partition, Theorems, WeightGrid, Entropy };

const char* to_string(ReportKind k);
ReportKind parse_report_kind(const std::string& name);

// Every report carries a "flagged" column (1 for a failed or out-of-tolerance row).
bool has_flagged_rows(const CsvTable& t);

// Version, family, seeds, config hash, gate results.
void add_run_metadata(CsvTable& t, const RunConfig& cfg, const std::string& report);

// Columns theta, Z_quadrature, Z_closed, P, Rbar_over_6, rel_gap, flagged. axial-2d only.
CsvTable run_convergence_scan(const RunConfig& cfg);

// Profile f(x) = int_0^x sqrt((1 - (1 - s^2)^3) / (1 - s^2)^3) ds.
double surface_profile(double x);

// Columns t, z = theta f(t / theta), arc (arc length of the profile from 0), r = theta t / sqrt(theta^2 - t^2),
// for `resolution` values of t in [0, 0.999 theta].
CsvTable emit_surface_mesh(double theta, int resolution);

CsvTable run_report(const RunConfig& cfg, ReportKind which);

struct EntropyComparison {
    double diff_gauss = 0.0;
    double diff_cauchy = 0.0;
    double inv_gauss = 0.0;
    double inv_cauchy = 0.0;
    double mean_log_jacobian = 0.0;  // <log |dx'/dx|> over the gaussian
};

// A 1-D gaussian (mu, sigma) and its image under the gaussian-to-cauchy map onto (nu, gamma).
EntropyComparison entropy_comparison(double mu, double sigma, double nu, double gamma);

// log |dx'/dx| of the gaussian-to-cauchy map, finite deep in the tails.
double log_gauss_to_cauchy_jacobian(double x, double mu, double sigma, double gamma);

} // namespace fgeo
