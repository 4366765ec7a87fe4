#include "fgeo/reports.hpp"

#include "fgeo/numerics.hpp"
#include "fgeo/special.hpp"
#include "fgeo/theorems.hpp"
#include "fgeo/thermo.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace fgeo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Point family_mode(const FamilySpec& spec, const ControlParams& th) {
    return spec.closed.mode ? spec.closed.mode(th) : find_mode(spec.density(), spec.metric(), th).mode;
}

std::string gate_text(const FamilySpec& s) {
    return std::string(s.gate.passed ? "pass" : "fail") + " (max residual " + format_double(s.gate.max_residual) +
           ", " + s.gate.note + ")";
}
} // namespace

const char* to_string(ReportKind k) {
    switch (k) {
    case ReportKind::Curvature: return "curvature";
    case ReportKind::Partition: return "partition";
    case ReportKind::Theorems: return "theorems";
    case ReportKind::WeightGrid: return "weight-grid";
    case ReportKind::Entropy: return "entropy";
    }
    return "?";
}

ReportKind parse_report_kind(const std::string& name) {
    for (auto k : {ReportKind::Curvature, ReportKind::Partition, ReportKind::Theorems, ReportKind::WeightGrid,
                   ReportKind::Entropy})
        if (name == to_string(k)) return k;
    throw ConfigError("unknown report '" + name + "'");
}

bool has_flagged_rows(const CsvTable& t) {
    const std::size_t c = t.column("flagged");
    for (const auto& r : t.rows)
        if (r[c] != 0.0) return true;
    return false;
}

void add_run_metadata(CsvTable& t, const RunConfig& cfg, const std::string& report) {
    t.add_meta("report", report);
    t.add_meta("version", kVersion);
    t.add_meta("family", cfg.family);
    t.add_meta("theta", print_theta_list(cfg.thetas));
    t.add_meta("k", format_double(cfg.k));
    std::string seeds;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(cfg.seeds[i]);
    t.add_meta("seed", seeds);
    t.add_meta("samples", std::to_string(cfg.samples));
    t.add_meta("config_hash", hex(config_hash(cfg)));
}

CsvTable run_convergence_scan(const RunConfig& cfg) {
    if (cfg.family != "axial-2d") throw ConfigError("the convergence scan runs on axial-2d only");
    CsvTable t;
    add_run_metadata(t, cfg, "convergence");
    t.header = {"theta", "Z_quadrature", "Z_closed", "P", "Rbar_over_6", "rel_gap", "flagged"};
    const double tol = cfg.tolerance("partition", 1e-6);
    struct Row {
        std::vector<double> cells;
        std::string gate, error;
    };
    const auto rows = parallel_map<Row>(cfg.thetas.size(), [&](std::size_t i) {
        Row row;
        const ControlParams th = cfg.params(i);
        const double theta = th.size() > 0 ? th[0] : kNaN;
        try {
            const FamilySpec spec = config_family(cfg, i);
            row.gate = gate_text(spec);
            require_gate(spec);
            const Point mode = family_mode(spec, th);
            const PartitionResult z = gaussian_partition(spec.density(), spec.metric(), mode, th);
            const double zc = spec.closed.Z(th);
            const double rbar6 = curvature_at(spec.metric(), mode, th).scalar / 6.0;
            const double gap = std::abs(z.P - rbar6) / rbar6;
            const bool bad = !(std::abs(z.Z - zc) <= tol * zc);
            row.cells = {theta, z.Z, zc, z.P, rbar6, gap, bad ? 1.0 : 0.0};
        } catch (const Error& e) {
            row.cells = {theta, kNaN, kNaN, kNaN, kNaN, kNaN, 1.0};
            row.error = e.what();
        }
        return row;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.add_meta("gate[" + std::to_string(i) + "]", rows[i].gate);
        if (!rows[i].error.empty()) t.add_meta("error[" + std::to_string(i) + "]", rows[i].error);
        t.add_row(rows[i].cells);
    }
    return t;
}

double surface_profile(double x) {
    if (x < 0.0 || x >= 1.0) throw DomainError("surface_profile: x must lie in [0, 1)");
    auto f = [](double s) {
        const double q = s * s, c = 1.0 - q;
        return std::sqrt(q * (3.0 - 3.0 * q + q * q) / (c * c * c));
    };
    QuadOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-12;
    return integrate_or_throw(f, 0.0, x, o, "surface_profile");
}

CsvTable emit_surface_mesh(double theta, int resolution) {
    if (!(theta > 0.0)) throw DomainError("emit_surface_mesh: theta must be positive");
    if (resolution < 2) throw DomainError("emit_surface_mesh: resolution must be at least 2");
    CsvTable t;
    t.add_meta("report", "surface");
    t.add_meta("version", kVersion);
    t.add_meta("theta", format_double(theta));
    t.add_meta("truncation", "t <= 0.999 theta; the profile diverges as t -> theta");
    t.header = {"t", "z", "arc", "r"};
    const double tmax = 0.999 * theta;
    QuadOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-12;
    for (int j = 0; j < resolution; ++j) {
        const double tj = tmax * j / (resolution - 1);
        const double x = tj / theta;
        // Arc length of (t, theta f(t / theta)): |d/dt| = (1 - x^2)^(-3/2).
        const double arc = theta * integrate_or_throw([](double s) { return std::pow(1.0 - s * s, -1.5); }, 0.0, x, o,
                                                      "surface arc");
        t.add_row({tj, theta * surface_profile(x), arc, theta * tj / std::sqrt((theta - tj) * (theta + tj))});
    }
    return t;
}

double log_gauss_to_cauchy_jacobian(double x, double mu, double sigma, double gamma) {
    const double z = (x - mu) / (std::sqrt(2.0) * sigma);
    const double az = std::abs(z);
    // x' = nu + gamma tan(u), u = (pi/2) erf(z); cos u = sin((pi/2) erfc|z|).
    const double e = std::erfc(az);
    const double log_cos = e < 1e-8 ? std::log(0.5 * kPi) + std::log(erfcx(az)) - az * az : std::log(std::sin(0.5 * kPi * e));
    const double log_du = std::log(0.5 * kPi) + std::log(2.0 / std::sqrt(kPi)) - z * z - std::log(std::sqrt(2.0) * sigma);
    return std::log(gamma) + log_du - 2.0 * log_cos;
}

EntropyComparison entropy_comparison(double mu, double sigma, double nu, double gamma) {
    Mat prec(1, 1);
    prec(0, 0) = 1.0 / (sigma * sigma);
    const FamilySpec g = builtin_family("gaussian-nd", gaussian_params(vec({mu}), prec));
    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{nu, gamma});
    QuadOptions o;
    o.abs_tol = 1e-12;
    o.rel_tol = 1e-11;
    o.max_intervals = 20000;
    const EntropyValues eg = entropies(g.density(), g.metric(), g.theta, o);
    const EntropyValues ec = entropies(c.density(), c.metric(), c.theta, o);
    EntropyComparison r;
    r.diff_gauss = eg.differential;
    r.diff_cauchy = ec.differential;
    r.inv_gauss = eg.invariant;
    r.inv_cauchy = ec.invariant;
    auto f = [&](double x) {
        const double u = (x - mu) / sigma;
        return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * kPi) * sigma) * log_gauss_to_cauchy_jacobian(x, mu, sigma, gamma);
    };
    r.mean_log_jacobian = integrate_or_throw(f, -kInf, kInf, o, "mean log jacobian");
    return r;
}

namespace {

CsvTable curvature_report(const RunConfig& cfg) {
    CsvTable t;
    add_run_metadata(t, cfg, "curvature");
    const double tol = cfg.tolerance("curvature", 1e-5);
    const FamilySpec first = config_family(cfg, 0);
    const int n = first.dim;
    t.header = {"theta_index", "probe"};
    for (int i = 0; i < n; ++i) t.header.push_back("x" + std::to_string(i + 1));
    for (const char* h : {"R", "R_closed", "rel_err", "flagged"}) t.header.push_back(h);
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
        const FamilySpec spec = config_family(cfg, i);
        t.add_meta("gate[" + std::to_string(i) + "]", gate_text(spec));
        require_gate(spec);
        const ControlParams th = cfg.params(i);
        for (std::size_t p = 0; p < spec.probes.size(); ++p) {
            const Point& x = spec.probes[p];
            std::vector<double> row{static_cast<double>(i), static_cast<double>(p)};
            for (int d = 0; d < n; ++d) row.push_back(x.x(d));
            try {
                const double R = curvature_at(spec.metric(), x, th).scalar;
                const double Rc = spec.closed.R ? spec.closed.R(x, th) : kNaN;
                const double err = std::isnan(Rc) ? kNaN : std::abs(R - Rc) / std::max(std::abs(Rc), 1e-300);
                const bool bad = !std::isnan(Rc) && !(Rc == 0.0 ? std::abs(R) <= 1e-8 : err <= tol);
                row.insert(row.end(), {R, Rc, Rc == 0.0 ? std::abs(R) : err, bad ? 1.0 : 0.0});
            } catch (const Error& e) {
                t.add_meta("error[" + std::to_string(i) + "," + std::to_string(p) + "]", e.what());
                row.insert(row.end(), {kNaN, kNaN, kNaN, 1.0});
            }
            t.add_row(row);
        }
    }
    return t;
}

CsvTable partition_report(const RunConfig& cfg) {
    CsvTable t;
    add_run_metadata(t, cfg, "partition");
    t.header = {"theta_index", "Z", "Z_closed", "P", "error", "Rbar_over_6", "ell_c", "nkR", "applicable", "flagged"};
    const double tol = cfg.tolerance("partition", 1e-6);
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
        const FamilySpec spec = config_family(cfg, i);
        t.add_meta("gate[" + std::to_string(i) + "]", gate_text(spec));
        require_gate(spec);
        const ControlParams th = cfg.params(i);
        try {
            const Point mode = family_mode(spec, th);
            const PartitionResult z = gaussian_partition(spec.density(), spec.metric(), mode, th);
            const double zc = spec.closed.Z ? spec.closed.Z(th) : kNaN;
            const CurvatureValue curv = curvature_at(spec.metric(), mode, th);
            const Applicability app = gaussian_applicability(curv, spec.dim, th.k);
            const bool bad = !std::isnan(zc) && !(std::abs(z.Z - zc) <= tol * zc);
            t.add_row({static_cast<double>(i), z.Z, zc, z.P, z.error, curv.scalar / 6.0, curvature_radius(curv).ell_c,
                       app.product, app.applicable ? 1.0 : 0.0, bad ? 1.0 : 0.0});
        } catch (const Error& e) {
            t.add_meta("error[" + std::to_string(i) + "]", e.what());
            t.add_row({static_cast<double>(i), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, 1.0});
        }
    }
    return t;
}

CsvTable theorems_report(const RunConfig& cfg) {
    CsvTable t;
    add_run_metadata(t, cfg, "theorems");
    t.header = {"theta_index", "seed", "theorem", "estimate", "std_error", "theoretical", "z", "n", "flagged"};
    const double zmax = cfg.tolerance("z", 3.0);
    bool named = false;
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
        const FamilySpec spec = config_family(cfg, i);
        t.add_meta("gate[" + std::to_string(i) + "]", gate_text(spec));
        require_gate(spec);
        for (std::uint64_t seed : cfg.seeds) {
            FluctuationOptions o;
            o.samples = cfg.samples;
            o.seed = seed;
            std::vector<TheoremReport> reps;
            try {
                reps = fluctuation_suite(spec, cfg.params(i), o);
            } catch (const SuiteFailure& f) {
                reps = f.reports;
            } catch (const Error& e) {
                t.add_meta("error[" + std::to_string(i) + "," + std::to_string(seed) + "]", e.what());
                t.add_row({static_cast<double>(i), static_cast<double>(seed), -1, kNaN, kNaN, kNaN, kNaN, 0, 1.0});
                continue;
            }
            if (!named) {
                std::string names;
                for (std::size_t r = 0; r < reps.size(); ++r) names += (r ? "," : "") + std::to_string(r) + "=" + reps[r].name;
                t.add_meta("theorems", names);
                named = true;
            }
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const auto& x = reps[r];
                t.add_row({static_cast<double>(i), static_cast<double>(seed), static_cast<double>(r), x.estimate,
                           x.std_error, x.theoretical, x.z, static_cast<double>(x.n),
                           std::abs(x.z) <= zmax ? 0.0 : 1.0});
            }
        }
    }
    return t;
}

CsvTable weight_grid_report(const RunConfig& cfg) {
    CsvTable t;
    add_run_metadata(t, cfg, "weight-grid");
    t.header = {"theta_index", "a", "b", "omega", "omega_gaussian", "flagged"};
    const int m = cfg.resolution;
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
        const FamilySpec spec = config_family(cfg, i);
        t.add_meta("gate[" + std::to_string(i) + "]", gate_text(spec));
        require_gate(spec);
        if (spec.dim > 2) throw UnsupportedError("weight-grid needs a 1-D or 2-D family");
        const ControlParams th = cfg.params(i);
        const ChartView& pc = spec.primary();
        bool use_t = false;
        for (const auto& c : spec.charts) use_t = use_t || c.name == "t";
        if (use_t) t.add_meta("coordinates[" + std::to_string(i) + "]", "a = t cos(phi), b = t sin(phi) in the t chart");
        const int mb = spec.dim == 2 ? m : 1;
        for (int ia = 0; ia < m; ++ia)
            for (int ib = 0; ib < mb; ++ib) {
                const double a = -cfg.extent + 2.0 * cfg.extent * ia / (m - 1);
                const double b = spec.dim == 2 ? -cfg.extent + 2.0 * cfg.extent * ib / (m - 1) : 0.0;
                const double gauss = std::exp(-0.5 * (a * a + b * b));
                double omega = 0.0;
                bool bad = false;
                try {
                    Point x;
                    if (use_t) {
                        const double tt = std::hypot(a, b);
                        if (tt >= th[0]) {
                            t.add_row({static_cast<double>(i), a, b, 0.0, gauss, 0.0});
                            continue;
                        }
                        if (tt == 0.0) {
                            // the polar charts exclude their own origin; t = 0 is the cartesian origin
                            x = Point("cartesian", Vec::Zero(2));
                            if (pc.name != "cartesian") x = spec.change("cartesian", pc.name).apply(x);
                        } else {
                            double phi = std::atan2(b, a);
                            if (phi < 0.0) phi += 2 * kPi;
                            x = spec.change("t", pc.name).apply(Point("t", vec({tt, phi})));
                        }
                    } else {
                        x = spec.dim == 2 ? Point(pc.name, vec({a, b})) : Point(pc.name, vec({a}));
                    }
                    omega = probability_weight(pc.density, pc.metric, x, th);
                } catch (const Error&) {
                    omega = kNaN;
                    bad = true;
                }
                t.add_row({static_cast<double>(i), a, b, omega, gauss, bad ? 1.0 : 0.0});
            }
    }
    return t;
}

CsvTable entropy_report(const RunConfig& cfg) {
    CsvTable t;
    add_run_metadata(t, cfg, "entropy");
    t.add_meta("pair", "gaussian (mu, sigma) and its cauchy image (nu, gamma) under the gaussian-to-cauchy map");
    t.header = {"mu", "sigma", "nu", "gamma", "H_diff_gauss", "H_diff_cauchy", "H_inv_gauss", "H_inv_cauchy",
                "mean_log_jacobian", "inv_gap", "diff_gap_minus_jacobian", "flagged"};
    const double tol_inv = cfg.tolerance("entropy_invariant", 1e-5);
    const double tol_diff = cfg.tolerance("entropy_differential", 1e-4);
    for (const Vec& m : cfg.entropy_maps) {
        try {
            const EntropyComparison c = entropy_comparison(m(0), m(1), m(2), m(3));
            const double inv_gap = std::abs(c.inv_gauss - c.inv_cauchy);
            const double dgap = std::abs((c.diff_cauchy - c.diff_gauss) - c.mean_log_jacobian);
            const bool bad = !(inv_gap <= tol_inv) || !(dgap <= tol_diff);
            t.add_row({m(0), m(1), m(2), m(3), c.diff_gauss, c.diff_cauchy, c.inv_gauss, c.inv_cauchy,
                       c.mean_log_jacobian, inv_gap, dgap, bad ? 1.0 : 0.0});
        } catch (const Error& e) {
            t.add_meta("error", e.what());
            t.add_row({m(0), m(1), m(2), m(3), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, 1.0});
        }
    }
    return t;
}

} // namespace

CsvTable run_report(const RunConfig& cfg, ReportKind which) {
    switch (which) {
    case ReportKind::Curvature: return curvature_report(cfg);
    case ReportKind::Partition: return partition_report(cfg);
    case ReportKind::Theorems: return theorems_report(cfg);
    case ReportKind::WeightGrid: return weight_grid_report(cfg);
    case ReportKind::Entropy: return entropy_report(cfg);
    }
    throw ConfigError("unknown report kind");
}

} // namespace fgeo
