#pragma once

#include "fgeo/families.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fgeo {

// INI-style run configuration:
//
//   [run]
//   family = axial-2d
//   theta = 3; 5; 10          # ';' separates vectors, ',' separates components, '-' is empty
//   k = 1
//   seeds = 1, 2
//   samples = 100000
//   out = out
//   resolution = 64
//   extent = 3
//   [tolerances]
//   gate = 1e-5
//   [entropy]
//   maps = 0, 1, 0, 1        # mu, sigma, nu, gamma per entry
//   [expression]             # optional; replaces the built-in family
//   id = custom
//   dim = 1
//   params = 1
//   density = exp(-x1^2/2)/sqrt(2*pi)
//   metric = 1               # ';'-separated row-major entries; omit to solve in 1-D
//   lower = -12
//   upper = 12
//   grid = -8, -7.5, ...
struct RunConfig {
    std::string family = "axial-2d";
    std::vector<Vec> thetas;
    double k = 1.0;
    std::vector<std::uint64_t> seeds{1};
    std::size_t samples = 100000;
    std::string out_dir = "out";
    int resolution = 64;
    double extent = 3.0;
    std::map<std::string, double> tolerances;
    std::vector<Vec> entropy_maps;
    std::optional<ExpressionFamilyConfig> expression;

    double tolerance(const std::string& key, double fallback) const;
    ControlParams params(std::size_t i) const { return ControlParams(thetas.at(i), k); }
};

bool operator==(const RunConfig& a, const RunConfig& b);

// Default theta grid of a built-in family.
std::vector<Vec> default_thetas(const std::string& family);

// Fills defaults and checks invariants; ConfigError on violation.
void validate_config(RunConfig& cfg);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string print_config(const RunConfig& cfg);

// FNV-1a (64-bit) of the printed configuration.
std::uint64_t config_hash(const RunConfig& cfg);

// "3; 5, 1; -" -> {[3], [5, 1], []}
std::vector<Vec> parse_theta_list(const std::string& text);
std::string print_theta_list(const std::vector<Vec>& thetas);

// Family spec for row i of the configuration.
FamilySpec config_family(const RunConfig& cfg, std::size_t i);

} // namespace fgeo
