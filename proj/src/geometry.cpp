#include "fgeo/geometry.hpp"

#include "fgeo/numerics.hpp"

#include <cmath>

namespace fgeo {

const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::Transported: return "transported";
    case Provenance::Solved: return "solved";
    }
    return "?";
}

Mat MetricField::at(const Point& x, const ControlParams& theta) const {
    require_chart(x, chart);
    if (x.dim() != dim) throw DimensionError("metric: point dimension mismatch");
    if (!support.contains(x.x)) throw DomainError("metric: point outside support of chart '" + chart + "'");
    return eval(x.x, theta);
}

double Rank4::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

void require_positive_definite(const Mat& g, const char* where) {
    if (!g.allFinite()) throw GeometryError(std::string(where) + ": metric is not finite");
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw GeometryError(std::string(where) + ": metric is not positive definite");
}

Mat spd_inverse(const Mat& g) {
    Eigen::LLT<Mat> llt(g);
    if (!g.allFinite() || llt.info() != Eigen::Success)
        throw GeometryError("metric is not positive definite");
    return llt.solve(Mat::Identity(g.rows(), g.cols()));
}

MetricField constant_metric(const std::string& chart, const Mat& g) {
    require_positive_definite(g, "constant_metric");
    const int n = static_cast<int>(g.rows());
    MetricField m;
    m.dim = n;
    m.chart = chart;
    m.eval = [g](const Vec&, const ControlParams&) { return g; };
    m.d1 = [n](const Vec&, const ControlParams&) { return std::vector<Mat>(n, Mat::Zero(n, n)); };
    m.d2 = [n](const Vec&, const ControlParams&) {
        return std::vector<Mat>(static_cast<std::size_t>(n * n), Mat::Zero(n, n));
    };
    m.support = Support::whole(n);
    return m;
}

MetricField transport_metric(const MetricField& g, const CoordinateChange& change) {
    if (change.from != g.chart) throw DomainError("transport_metric: change does not start in the metric's chart");
    MetricField out;
    out.dim = g.dim;
    out.chart = change.to;
    out.provenance = Provenance::Transported;
    out.support = change.codomain;
    auto base = g.eval;
    auto ch = change;
    out.eval = [base, ch](const Vec& xc, const ControlParams& theta) -> Mat {
        const Vec x = ch.inverse(xc);
        const Mat j = ch.jacobian_at(Point(ch.from, x));
        const Mat jinv = j.inverse();
        Mat m = jinv.transpose() * base(x, theta) * jinv;
        return 0.5 * (m + m.transpose());
    };
    return out;
}

std::vector<Mat> metric_first_derivatives(const MetricField& g, const Point& x, const ControlParams& theta) {
    require_chart(x, g.chart);
    if (g.d1) return g.d1(x.x, theta);
    auto f = [&](const Vec& y) { return g.eval(y, theta); };
    std::vector<Mat> d(static_cast<std::size_t>(g.dim));
    for (int k = 0; k < g.dim; ++k) d[static_cast<std::size_t>(k)] = diff1(f, x.x, k, first_step(x.x(k)), &g.support);
    return d;
}

std::vector<Mat> metric_second_derivatives(const MetricField& g, const Point& x, const ControlParams& theta) {
    require_chart(x, g.chart);
    if (g.d2) return g.d2(x.x, theta);
    const int n = g.dim;
    auto f = [&](const Vec& y) { return g.eval(y, theta); };
    std::vector<Mat> d(static_cast<std::size_t>(n * n));
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            Mat v = diff2_o4(f, x.x, k, l, second_step(x.x(k)), second_step(x.x(l)), &g.support);
            d[static_cast<std::size_t>(k * n + l)] = v;
            d[static_cast<std::size_t>(l * n + k)] = v;
        }
    return d;
}

namespace {

// Gamma_lij = 1/2 (d_j g_li + d_i g_lj - d_l g_ij), stored first[l](i, j).
std::vector<Mat> christoffel_first_kind(const std::vector<Mat>& d1, int n) {
    std::vector<Mat> first(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                first[static_cast<std::size_t>(l)](i, j) =
                    0.5 * (d1[static_cast<std::size_t>(j)](l, i) + d1[static_cast<std::size_t>(i)](l, j) -
                           d1[static_cast<std::size_t>(l)](i, j));
    return first;
}

} // namespace

ConnectionValue christoffel_from(const Mat& g, const std::vector<Mat>& d1) {
    const int n = static_cast<int>(g.rows());
    const Mat ginv = spd_inverse(g);
    const auto first = christoffel_first_kind(d1, n);
    ConnectionValue c;
    c.n = n;
    c.gamma.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) c.gamma[static_cast<std::size_t>(k)] += ginv(k, l) * first[static_cast<std::size_t>(l)];
    for (auto& m : c.gamma) m = 0.5 * (m + m.transpose()).eval();
    return c;
}

ConnectionValue christoffel_at(const MetricField& g, const Point& x, const ControlParams& theta) {
    const Mat gx = g.at(x, theta);
    require_positive_definite(gx, "christoffel_at");
    return christoffel_from(gx, metric_first_derivatives(g, x, theta));
}

std::vector<ConnectionValue> christoffel_derivatives_at(const MetricField& g, const Point& x,
                                                        const ControlParams& theta) {
    const int n = g.dim;
    const Mat gx = g.at(x, theta);
    const Mat ginv = spd_inverse(gx);
    const auto d1 = metric_first_derivatives(g, x, theta);
    const auto d2 = metric_second_derivatives(g, x, theta);
    const auto first = christoffel_first_kind(d1, n);
    std::vector<ConnectionValue> out(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const Mat dginv = -ginv * d1[static_cast<std::size_t>(m)] * ginv;
        // d_m Gamma_lij from second derivatives
        std::vector<Mat> dfirst(static_cast<std::size_t>(n), Mat::Zero(n, n));
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dfirst[static_cast<std::size_t>(l)](i, j) =
                        0.5 * (d2[static_cast<std::size_t>(m * n + j)](l, i) + d2[static_cast<std::size_t>(m * n + i)](l, j) -
                               d2[static_cast<std::size_t>(m * n + l)](i, j));
        ConnectionValue c;
        c.n = n;
        c.gamma.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                c.gamma[static_cast<std::size_t>(k)] += dginv(k, l) * first[static_cast<std::size_t>(l)] +
                                                        ginv(k, l) * dfirst[static_cast<std::size_t>(l)];
        out[static_cast<std::size_t>(m)] = std::move(c);
    }
    return out;
}

void contract_curvature(CurvatureValue& c) {
    const int n = c.riemann.n();
    const Mat ginv = spd_inverse(c.metric);
    c.ricci = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) s += ginv(i, k) * c.riemann(i, j, k, l);
            c.ricci(j, l) = s;
        }
    c.ricci = 0.5 * (c.ricci + c.ricci.transpose()).eval();
    c.scalar = (ginv.cwiseProduct(c.ricci)).sum();
}

CurvatureValue curvature_from(const Mat& g, const std::vector<Mat>& d1, const std::vector<Mat>& d2) {
    const int n = static_cast<int>(g.rows());
    const ConnectionValue gam = christoffel_from(g, d1);
    auto dd = [&](int a, int b, int c, int d) { return d2[static_cast<std::size_t>(a * n + b)](c, d); };
    CurvatureValue out;
    out.metric = g;
    out.riemann = Rank4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = 0.5 * (dd(j, k, i, l) + dd(i, l, j, k) - dd(i, k, j, l) - dd(j, l, i, k));
                    for (int m = 0; m < n; ++m)
                        for (int p = 0; p < n; ++p)
                            v += g(m, p) * (gam(m, i, l) * gam(p, j, k) - gam(m, j, l) * gam(p, i, k));
                    out.riemann(i, j, k, l) = v;
                }
    contract_curvature(out);
    return out;
}

CurvatureValue curvature_at(const MetricField& g, const Point& x, const ControlParams& theta) {
    const Mat gx = g.at(x, theta);
    require_positive_definite(gx, "curvature_at");
    return curvature_from(gx, metric_first_derivatives(g, x, theta), metric_second_derivatives(g, x, theta));
}

CurvatureValue normal_coordinate_curvature(const MetricField& g, const Point& x, const ControlParams& theta) {
    const Mat gx = g.at(x, theta);
    require_positive_definite(gx, "normal_coordinate_curvature");
    const std::vector<Mat> zero(static_cast<std::size_t>(g.dim), Mat::Zero(g.dim, g.dim));
    return curvature_from(gx, zero, metric_second_derivatives(g, x, theta));
}

Mat metric_residual(const DensityFamily& family, const MetricField& g, const Point& x, const ControlParams& theta) {
    require_chart(x, family.chart);
    require_chart(x, g.chart);
    if (!family.support.contains(x.x)) throw BoundaryError("metric_residual: point not interior to the support");
    const int n = g.dim;
    const Mat gx = g.at(x, theta);
    const Vec l1 = family.grad_log_rho(x, theta);
    const Mat l2 = family.hess_log_rho(x, theta);
    const ConnectionValue gam = christoffel_at(g, x, theta);
    const auto dgam = christoffel_derivatives_at(g, x, theta);
    Vec trace(n);  // Gamma^l_kl
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gam(l, k, l);
        trace(k) = s;
    }
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = gx(i, j) + l2(i, j);
            for (int k = 0; k < n; ++k) {
                v -= gam(k, i, j) * l1(k);
                v -= dgam[static_cast<std::size_t>(i)](k, j, k);
                v += gam(k, i, j) * trace(k);
            }
            r(i, j) = v;
        }
    return 0.5 * (r + r.transpose());
}

double metric_compatibility_defect(const MetricField& g, const Point& x, const ControlParams& theta) {
    const int n = g.dim;
    const Mat gx = g.at(x, theta);
    const auto d1 = metric_first_derivatives(g, x, theta);
    const ConnectionValue gam = christoffel_from(gx, d1);
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = d1[static_cast<std::size_t>(k)](i, j);
                for (int l = 0; l < n; ++l) v -= gam(l, k, i) * gx(l, j) + gam(l, k, j) * gx(i, l);
                worst = std::max(worst, std::abs(v));
            }
    return worst;
}

double SymmetryReport::worst() const {
    return std::max({antisym_first, antisym_second, pair_symmetry, bianchi});
}

SymmetryReport curvature_symmetries(const CurvatureValue& c) {
    const Rank4& r = c.riemann;
    const int n = r.n();
    SymmetryReport s;
    s.scale = r.max_abs();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    s.antisym_first = std::max(s.antisym_first, std::abs(r(i, j, k, l) + r(j, i, k, l)));
                    s.antisym_second = std::max(s.antisym_second, std::abs(r(i, j, k, l) + r(i, j, l, k)));
                    s.pair_symmetry = std::max(s.pair_symmetry, std::abs(r(i, j, k, l) - r(k, l, i, j)));
                    s.bianchi = std::max(s.bianchi, std::abs(r(i, j, k, l) + r(i, k, l, j) + r(i, l, j, k)));
                }
    return s;
}

} // namespace fgeo
