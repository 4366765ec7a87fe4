#include <doctest.h>

#include "fgeo/reports.hpp"
#include "fgeo/special.hpp"
#include "fgeo/theorems.hpp"

#include <cmath>
#include <filesystem>

using namespace fgeo;

namespace {

RunConfig axial(std::vector<double> thetas) {
    RunConfig cfg;
    cfg.family = "axial-2d";
    for (double t : thetas) cfg.thetas.push_back(vec({t}));
    validate_config(cfg);
    return cfg;
}

std::vector<double> column(const CsvTable& t, const std::string& name) {
    const std::size_t c = t.column(name);
    std::vector<double> v;
    for (const auto& r : t.rows) v.push_back(r[c]);
    return v;
}

} // namespace

TEST_CASE("built-in family catalog") {
    const FamilySpec g = builtin_family("gaussian-nd", gaussian_params(vec({0.0, 0.0, 0.0}), Mat::Identity(3, 3)));
    const Point x("x", vec({0.4, -1.0, 2.0}));
    CHECK((g.metric().at(x, g.theta) - Mat::Identity(3, 3)).norm() == 0.0);
    CHECK(curvature_at(g.metric(), x, g.theta).scalar == 0.0);

    const FamilySpec a = builtin_family("axial-2d", ControlParams{2.5});
    CHECK(a.charts.size() == 3);
    CHECK(a.closed.R(Point("cartesian", vec({1.0, 1.0})), a.theta) == doctest::Approx(6 * 6.25 / (8.25 * 8.25)));
    CHECK(a.closed.ell(Point("cartesian", vec({3.0, 4.0})), a.theta) == 5.0);

    CHECK_THROWS_AS(builtin_family("nope", ControlParams{}), ConfigError);
    CHECK_THROWS_AS(builtin_family("xy-coupled", ControlParams{1.0}), DomainError);
}

TEST_CASE("xy-coupled decouples under its rotation") {
    const FamilySpec s = builtin_family("xy-coupled", ControlParams{});
    const ChartView& rv = s.chart("rotated");
    const Point o("rotated", Vec::Zero(2));
    const Mat g = rv.metric.at(o, s.theta);
    CHECK(g(0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(g(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
    // product of 1-D gaussians with variances 1/3 and 1
    for (const Vec& u : {vec({0.3, -0.8}), vec({1.2, 0.5}), vec({-0.1, 2.0})}) {
        const double prod = std::sqrt(3.0) * normal_pdf(u(0) * std::sqrt(3.0)) * normal_pdf(u(1));
        CHECK(rv.density.rho(Point("rotated", u), s.theta) == doctest::Approx(prod).epsilon(1e-12));
    }
    const SampleBatch b = sample_family(s, s.theta, 100000, 3);
    const CoordinateChange& rc = s.change("cartesian", "rotated");
    std::vector<double> u0, u1;
    for (const Point& p : b.points) {
        const Point q = rc.apply(p);
        u0.push_back(q.x(0));
        u1.push_back(q.x(1));
    }
    CHECK(ks_test(u0, [](double t) { return normal_cdf(t * std::sqrt(3.0)); }).passed);
    CHECK(ks_test(u1, [](double t) { return normal_cdf(t); }).passed);
}

TEST_CASE("expression families") {
    ExpressionFamilyConfig e;
    e.id = "gauss-expr";
    e.dim = 1;
    e.nparams = 1;
    e.density = "exp(-x1^2/(2*t1^2))/(sqrt(2*pi)*t1)";
    e.metric = {"1/t1^2"};
    e.lower = vec({-40.0});
    e.upper = vec({40.0});
    const FamilySpec s = expression_family(e, ControlParams{1.5});
    CHECK(s.gate.passed);
    CHECK(s.density().rho(Point("x", vec({0.5})), s.theta) == doctest::Approx(normal_pdf(0.5 / 1.5) / 1.5).epsilon(1e-12));

    e.metric.clear();
    for (double x = -6.0; x <= 6.0 + 1e-9; x += 0.5) e.grid.push_back(x);
    const FamilySpec solved = expression_family(e, ControlParams{1.5});
    CHECK(solved.metric().provenance == Provenance::Solved);
    CHECK(solved.metric().at(Point("x", vec({1.0})), solved.theta)(0, 0) == doctest::Approx(1.0 / 2.25).epsilon(1e-8));

    e.metric = {"2/t1^2"};
    e.grid.clear();
    const FamilySpec bad = expression_family(e, ControlParams{1.5});
    CHECK_FALSE(bad.gate.passed);
    CHECK_THROWS_AS(require_gate(bad), ConsistencyError);
    e.metric = {"1", "0"};
    CHECK_THROWS_AS(expression_family(e, ControlParams{1.5}), ConfigError);
}

TEST_CASE("config round trip and hashing") {
    const std::string text = R"(
# axial scan
[run]
family = axial-2d
theta = 3; 5; 10.5
k = 2
seeds = 4, 9
samples = 5000
out = results/a
resolution = 17
extent = 2.5
[tolerances]
gate = 1e-6
[entropy]
maps = 0, 1, 0, 1; 0.25, 3, -1, 0.5
)";
    const RunConfig c = parse_config(text);
    CHECK(c.thetas.size() == 3);
    CHECK(c.thetas[2](0) == 10.5);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 9});
    CHECK(c.tolerance("gate", 0.0) == 1e-6);
    CHECK(c.tolerance("other", 0.5) == 0.5);
    CHECK(c.entropy_maps.size() == 2);
    const RunConfig back = parse_config(print_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    RunConfig d = c;
    d.k = 3.0;
    CHECK_FALSE(d == c);
    CHECK(config_hash(d) != config_hash(c));

    RunConfig ex;
    ex.expression = ExpressionFamilyConfig{};
    ex.expression->density = "exp(-x1^2/2)/sqrt(2*pi)";
    ex.expression->metric = {"1"};
    ex.expression->lower = vec({-10.0});
    ex.expression->upper = vec({10.0});
    ex.thetas = {Vec()};
    validate_config(ex);
    CHECK(parse_config(print_config(ex)) == ex);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("family = nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nk = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nk = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[weird]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nsamples = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[entropy]\nmaps = 0, -1, 0, 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("theta lists") {
    const auto t = parse_theta_list("3; 5, 1; -");
    REQUIRE(t.size() == 3);
    CHECK(t[1].size() == 2);
    CHECK(t[2].size() == 0);
    CHECK(parse_theta_list(print_theta_list(t)).size() == 3);
    CHECK(default_thetas("axial-2d").size() == 5);
    CHECK(default_thetas("xy-coupled").front().size() == 0);
}

TEST_CASE("csv tables") {
    CsvTable t;
    t.add_meta("seed", "7");
    t.header = {"a", "b"};
    t.add_row({0.1, 1.0 / 3.0});
    t.add_row({-1e-300, 12345678.901234567});
    CHECK_THROWS_AS(t.add_row({1.0}), DimensionError);
    const CsvTable back = parse_csv(t.str());
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);
    REQUIRE(back.find_meta("seed"));
    CHECK(*back.find_meta("seed") == "7");
    CHECK(back.column("b") == 1);
    CHECK(t.str().find("# seed: 7") == 0);

    const auto dir = std::filesystem::temp_directory_path() / "fgeo_csv_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    t.save((dir / "t.csv").string());
    CHECK(read_csv((dir / "t.csv").string()).rows.size() == 2);
    std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("convergence scan") {
    const CsvTable t = run_convergence_scan(axial({3, 5, 10, 20, 30}));
    CHECK_FALSE(has_flagged_rows(t));
    const auto th = column(t, "theta"), gap = column(t, "rel_gap"), P = column(t, "P");
    const auto zq = column(t, "Z_quadrature"), zc = column(t, "Z_closed"), r6 = column(t, "Rbar_over_6");
    for (std::size_t i = 0; i < th.size(); ++i) {
        CHECK(std::abs(zq[i] - zc[i]) <= 1e-6 * zc[i]);
        CHECK(r6[i] == doctest::Approx(1.0 / (th[i] * th[i])).epsilon(1e-12));
        if (th[i] == 10.0) CHECK(gap[i] <= 0.05);
        if (i > 0) {
            CHECK(gap[i] < gap[i - 1]);
            CHECK(P[i] < P[i - 1]);
            CHECK(r6[i] < r6[i - 1]);
        }
    }
    CHECK(*t.find_meta("family") == "axial-2d");
    CHECK(t.find_meta("config_hash"));

    RunConfig wrong;
    wrong.family = "gaussian-nd";
    validate_config(wrong);
    CHECK_THROWS(run_convergence_scan(wrong));
}

TEST_CASE("surface mesh") {
    const double th = 3.0;
    const CsvTable t = emit_surface_mesh(th, 80);
    const auto tt = column(t, "t"), z = column(t, "z"), arc = column(t, "arc"), r = column(t, "r");
    CHECK(tt.front() == 0.0);
    CHECK(z.front() == 0.0);
    CHECK(tt.back() == doctest::Approx(0.999 * th));
    for (std::size_t i = 1; i < tt.size(); ++i) {
        CHECK(z[i] > z[i - 1]);
        CHECK(r[i] == doctest::Approx(th * tt[i] / std::sqrt(th * th - tt[i] * tt[i])).epsilon(1e-12));
        CHECK(std::abs(arc[i] - r[i]) <= 1e-4 * std::max(1.0, r[i]));
    }
    CHECK(surface_profile(0.0) == 0.0);
}

TEST_CASE("curvature and partition reports") {
    const CsvTable c = run_report(axial({2, 8}), ReportKind::Curvature);
    CHECK_FALSE(has_flagged_rows(c));
    CHECK(c.rows.size() == 18);
    for (double e : column(c, "rel_err")) CHECK(e <= 1e-5);

    const CsvTable p = run_report(axial({4, 12}), ReportKind::Partition);
    CHECK(p.rows.size() == 2);
    const auto app = column(p, "applicable");
    CHECK(app[0] == 1.0);  // 12/16 < 1
    CHECK(p.find_meta("gate[0]"));
}

TEST_CASE("theorems report on the flat family") {
    RunConfig cfg;
    cfg.family = "gaussian-nd";
    cfg.seeds = {11};
    validate_config(cfg);
    const CsvTable t = run_report(cfg, ReportKind::Theorems);
    CHECK_FALSE(has_flagged_rows(t));
    for (double z : column(t, "z")) CHECK(std::abs(z) <= 3.0);
    CHECK(t.find_meta("theorems"));
}

TEST_CASE("weight grid approaches the gaussian weight") {
    RunConfig cfg = axial({10, 30, 100});
    cfg.resolution = 21;
    const CsvTable t = run_report(cfg, ReportKind::WeightGrid);
    CHECK_FALSE(has_flagged_rows(t));
    CHECK(t.rows.size() == 3u * 21 * 21);
    std::vector<double> worst(3, 0.0);
    const std::size_t ci = t.column("theta_index"), co = t.column("omega"), cg = t.column("omega_gaussian");
    for (const auto& r : t.rows) {
        const auto i = static_cast<std::size_t>(r[ci]);
        worst[i] = std::max(worst[i], std::abs(r[co] - r[cg]));
    }
    CHECK(worst[1] < worst[0]);
    CHECK(worst[2] < worst[1]);
    CHECK(worst[2] <= 1e-3);
}

TEST_CASE("entropy report") {
    RunConfig cfg = axial({3});
    const CsvTable t = run_report(cfg, ReportKind::Entropy);
    CHECK_FALSE(has_flagged_rows(t));
    REQUIRE(t.rows.size() == 2);
    for (const auto& r : t.rows) {
        CHECK(std::abs(r[t.column("H_inv_gauss")] - r[t.column("H_inv_cauchy")]) <= 1e-5);
        CHECK(std::abs(r[t.column("H_diff_gauss")] - r[t.column("H_diff_cauchy")]) > 0.1);
        CHECK(r[t.column("diff_gap_minus_jacobian")] <= 1e-4);
    }
    // differential entropy of the cauchy law is log(4 pi gamma)
    const EntropyComparison e = entropy_comparison(0.0, 1.0, 0.0, 2.0);
    CHECK(e.diff_cauchy == doctest::Approx(std::log(8 * kPi)).epsilon(1e-6));
    CHECK(std::isfinite(log_gauss_to_cauchy_jacobian(40.0, 0.0, 1.0, 1.0)));
}

TEST_CASE("reports are reproducible") {
    RunConfig cfg;
    cfg.family = "axial-2d";
    cfg.thetas = {vec({5.0})};
    cfg.samples = 5000;
    validate_config(cfg);
    CHECK(run_report(cfg, ReportKind::Theorems).str() == run_report(cfg, ReportKind::Theorems).str());
    CHECK(parse_report_kind("weight-grid") == ReportKind::WeightGrid);
    CHECK(std::string(to_string(ReportKind::Entropy)) == "entropy");
    CHECK_THROWS_AS(parse_report_kind("nope"), ConfigError);
}
