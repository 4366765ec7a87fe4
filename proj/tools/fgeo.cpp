// fgeo: workbench CLI. Every subcommand writes one CSV into --out.
#include "fgeo/acceptance.hpp"
#include "fgeo/config.hpp"
#include "fgeo/reports.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

struct Common {
    std::string config;
    std::string family;
    std::string theta;
    std::string out;
    std::uint64_t seed = 0;
    bool have_seed = false;
    std::size_t samples = 0;
};

fgeo::RunConfig make_config(const Common& c) {
    fgeo::RunConfig cfg = c.config.empty() ? fgeo::RunConfig{} : fgeo::load_config(c.config);
    if (!c.family.empty() && c.family != cfg.family) {
        cfg.family = c.family;
        cfg.expression.reset();
        cfg.thetas.clear();
    }
    if (!c.theta.empty()) cfg.thetas = fgeo::parse_theta_list(c.theta);
    if (c.have_seed) cfg.seeds = {c.seed};
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (c.samples > 0) cfg.samples = c.samples;
    fgeo::validate_config(cfg);
    return cfg;
}

int finish(const fgeo::CsvTable& t, const fgeo::RunConfig& cfg, const std::string& name) {
    const std::string path = (std::filesystem::path(cfg.out_dir) / (name + ".csv")).string();
    t.save(path);
    const bool flagged = t.header.end() != std::find(t.header.begin(), t.header.end(), "flagged") &&
                         fgeo::has_flagged_rows(t);
    std::printf("%s: %zu rows -> %s%s\n", name.c_str(), t.rows.size(), path.c_str(), flagged ? " (flagged rows)" : "");
    return flagged ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluctuation-geometry workbench"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "run configuration file");
        sub->add_option("--family", common.family, "family id");
        sub->add_option("--theta", common.theta, "theta list, e.g. \"3; 5; 10\"");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--samples", common.samples, "Monte Carlo sample size");
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
            common.seed = s;
            common.have_seed = true;
        }, "RNG seed");
    };
    std::vector<std::pair<std::string, CLI::App*>> reports;
    for (const char* name : {"curvature", "partition", "theorems", "weight-grid", "entropy"}) {
        auto* sub = app.add_subcommand(name, std::string(name) + " report");
        add_common(sub);
        reports.emplace_back(name, sub);
    }
    auto* conv = app.add_subcommand("convergence", "P(theta) against Rbar/6 on axial-2d");
    add_common(conv);
    auto* surf = app.add_subcommand("surface", "revolution-surface profile of axial-2d");
    add_common(surf);
    auto* verify = app.add_subcommand("verify", "run the full acceptance suite");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const fgeo::RunConfig cfg = make_config(common);
        for (const auto& [name, sub] : reports)
            if (sub->parsed()) return finish(fgeo::run_report(cfg, fgeo::parse_report_kind(name)), cfg, name);
        if (conv->parsed()) return finish(fgeo::run_convergence_scan(cfg), cfg, "convergence");
        if (surf->parsed()) {
            if (cfg.thetas[0].size() < 1) throw fgeo::ConfigError("surface needs theta");
            return finish(fgeo::emit_surface_mesh(cfg.thetas[0](0), cfg.resolution), cfg, "surface");
        }
        if (verify->parsed()) {
            fgeo::AcceptanceOptions opts;
            if (common.have_seed) opts.seed = common.seed;
            opts.progress = [](const fgeo::CriterionResult& r) {
                std::printf("%s\n", fgeo::format_result(r).c_str());
                std::fflush(stdout);
            };
            const auto results = fgeo::run_acceptance(opts);
            fgeo::CsvTable t;
            fgeo::add_run_metadata(t, cfg, "verify");
            t.header = {"criterion", "passed", "seconds", "flagged"};
            for (const auto& r : results) {
                t.add_meta("C" + std::to_string(r.id), r.name + ": " + r.detail);
                t.add_row({static_cast<double>(r.id), r.passed ? 1.0 : 0.0, r.seconds, r.passed ? 0.0 : 1.0});
            }
            return finish(t, cfg, "verify");
        }
    } catch (const fgeo::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
