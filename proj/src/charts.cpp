#include "fgeo/charts.hpp"

#include "fgeo/numerics.hpp"

#include <cmath>

namespace fgeo {

void require_same_chart(const Point& a, const Point& b) {
    if (a.chart != b.chart)
        throw DomainError("points live in different charts: '" + a.chart + "' and '" + b.chart + "'");
    if (a.dim() != b.dim()) throw DimensionError("points have different dimensions");
}

void require_chart(const Point& p, const std::string& chart) {
    if (p.chart != chart) throw DomainError("point in chart '" + p.chart + "' where '" + chart + "' is expected");
}

ControlParams::ControlParams(std::initializer_list<double> v, double k_) : values(vec(v)), k(k_) {}

void ControlParams::validate() const {
    if (!values.allFinite()) throw DomainError("control parameters must be finite");
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("k must be positive");
}

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out(i++) = d;
    return out;
}

Support Support::whole(int n) {
    return box(Vec::Constant(n, -kInf), Vec::Constant(n, kInf));
}

Support Support::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw DimensionError("support bounds differ in size");
    Support s;
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    s.periodic.assign(static_cast<std::size_t>(s.lower.size()), false);
    return s;
}

bool Support::contains(const Vec& x) const {
    if (x.size() != lower.size()) return false;
    if (!x.allFinite()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (periodic[static_cast<std::size_t>(i)]) continue;
        if (!(x(i) > lower(i) && x(i) < upper(i))) return false;
    }
    return !predicate || predicate(x);
}

double Support::fit_step(const Vec& x, int k, double h, int reach) const {
    if (periodic[static_cast<std::size_t>(k)]) return h;
    const double room = std::min(x(k) - lower(k), upper(k) - x(k));
    if (!(room > 0.0)) return 0.0;
    return std::min(h, 0.999 * room / reach);
}

double DensityFamily::log_rho(const Point& x, const ControlParams& theta) const {
    require_chart(x, chart);
    if (x.dim() != dim) throw DimensionError("density '" + id + "': point dimension mismatch");
    if (!support.contains(x.x)) throw DomainError("density '" + id + "': point outside support");
    return log_density(x.x, theta);
}

double DensityFamily::rho(const Point& x, const ControlParams& theta) const {
    return std::exp(log_rho(x, theta));
}

Vec DensityFamily::grad_log_rho(const Point& x, const ControlParams& theta) const {
    require_chart(x, chart);
    if (grad_log) return grad_log(x.x, theta);
    auto f = [&](const Vec& y) { return log_density(y, theta); };
    Vec g(dim);
    for (int k = 0; k < dim; ++k) g(k) = diff1_o4(f, x.x, k, second_step(x.x(k)), &support);
    return g;
}

Mat DensityFamily::hess_log_rho(const Point& x, const ControlParams& theta) const {
    require_chart(x, chart);
    if (hess_log) return hess_log(x.x, theta);
    auto f = [&](const Vec& y) { return log_density(y, theta); };
    Mat h(dim, dim);
    for (int k = 0; k < dim; ++k)
        for (int l = k; l < dim; ++l) {
            h(k, l) = diff2_o4(f, x.x, k, l, second_step(x.x(k)), second_step(x.x(l)), &support);
            h(l, k) = h(k, l);
        }
    return h;
}

Point CoordinateChange::apply(const Point& x) const {
    require_chart(x, from);
    if (!domain.contains(x.x)) throw DomainError("coordinate change " + from + "->" + to + ": point outside domain");
    return Point(to, forward(x.x));
}

Point CoordinateChange::unapply(const Point& xc) const {
    require_chart(xc, to);
    if (!codomain.contains(xc.x))
        throw DomainError("coordinate change " + from + "->" + to + ": point outside image");
    return Point(from, inverse(xc.x));
}

CoordinateChange CoordinateChange::inverted() const {
    CoordinateChange c;
    c.from = to;
    c.to = from;
    c.forward = inverse;
    c.inverse = forward;
    c.domain = codomain;
    c.codomain = domain;
    if (jacobian) {
        auto jac = jacobian;
        auto inv = inverse;
        c.jacobian = [jac, inv](const Vec& xc) -> Mat { return jac(inv(xc)).inverse(); };
    }
    return c;
}

Mat CoordinateChange::jacobian_at(const Point& x) const {
    require_chart(x, from);
    if (jacobian) return jacobian(x.x);
    return numeric_jacobian(*this, x);
}

CoordinateChange identity_change(const std::string& chart, int n) {
    CoordinateChange c;
    c.from = chart;
    c.to = chart;
    c.forward = [](const Vec& x) { return x; };
    c.inverse = [](const Vec& x) { return x; };
    c.jacobian = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
    c.domain = Support::whole(n);
    c.codomain = Support::whole(n);
    return c;
}

CoordinateChange linear_change(const std::string& from, const std::string& to, const Mat& a, const Vec& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw DimensionError("linear_change: shape mismatch");
    const Mat ainv = a.inverse();
    CoordinateChange c;
    c.from = from;
    c.to = to;
    c.forward = [a, b](const Vec& x) -> Vec { return a * x + b; };
    c.inverse = [ainv, b](const Vec& y) -> Vec { return ainv * (y - b); };
    c.jacobian = [a](const Vec&) -> Mat { return a; };
    c.domain = Support::whole(static_cast<int>(b.size()));
    c.codomain = Support::whole(static_cast<int>(b.size()));
    return c;
}

CoordinateChange compose(const CoordinateChange& first, const CoordinateChange& second) {
    if (first.to != second.from) throw DomainError("compose: chart mismatch " + first.to + " vs " + second.from);
    CoordinateChange c;
    c.from = first.from;
    c.to = second.to;
    auto f1 = first.forward, f2 = second.forward, i1 = first.inverse, i2 = second.inverse;
    c.forward = [f1, f2](const Vec& x) { return f2(f1(x)); };
    c.inverse = [i1, i2](const Vec& y) { return i1(i2(y)); };
    if (first.jacobian && second.jacobian) {
        auto j1 = first.jacobian, j2 = second.jacobian;
        c.jacobian = [f1, j1, j2](const Vec& x) -> Mat { return j2(f1(x)) * j1(x); };
    }
    c.domain = first.domain;
    c.codomain = second.codomain;
    return c;
}

Mat numeric_jacobian(const CoordinateChange& change, const Point& x) {
    require_chart(x, change.from);
    if (!change.domain.contains(x.x)) throw DomainError("numeric_jacobian: point outside domain");
    const int n = x.dim();
    const Vec fx = change.forward(x.x);
    Mat j(fx.size(), n);
    for (int k = 0; k < n; ++k)
        j.col(k) = diff1(change.forward, x.x, k, jacobian_step(x.x(k)), &change.domain);
    return j;
}

TensorValue::TensorValue(int n_, int p_, int q_, int w_) : n(n_), p(p_), q(q_), weight(w_) {
    std::size_t count = 1;
    for (int i = 0; i < p + q; ++i) count *= static_cast<std::size_t>(n);
    components.assign(count, 0.0);
}

TensorValue TensorValue::scalar(double v, int weight) {
    TensorValue t(1, 0, 0, weight);
    t.components[0] = v;
    return t;
}

TensorValue TensorValue::covariant2(const Mat& m, int weight) {
    const int n = static_cast<int>(m.rows());
    TensorValue t(n, 2, 0, weight);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t.components[static_cast<std::size_t>(i * n + j)] = m(i, j);
    return t;
}

TensorValue TensorValue::contravariant1(const Vec& v, int weight) {
    TensorValue t(static_cast<int>(v.size()), 0, 1, weight);
    for (Eigen::Index i = 0; i < v.size(); ++i) t.components[static_cast<std::size_t>(i)] = v(i);
    return t;
}

TensorValue TensorValue::covariant1(const Vec& v, int weight) {
    TensorValue t(static_cast<int>(v.size()), 1, 0, weight);
    for (Eigen::Index i = 0; i < v.size(); ++i) t.components[static_cast<std::size_t>(i)] = v(i);
    return t;
}

namespace {

std::size_t flat_index(const TensorValue& t, const std::vector<int>& idx) {
    if (static_cast<int>(idx.size()) != t.rank()) throw DimensionError("tensor index has wrong rank");
    std::size_t f = 0;
    for (int i : idx) {
        if (i < 0 || i >= t.n) throw DimensionError("tensor index out of range");
        f = f * static_cast<std::size_t>(t.n) + static_cast<std::size_t>(i);
    }
    return f;
}

// Contracts slot `slot` of the component array with m: new[.., a, ..] = sum_b old[.., b, ..] m(b, a).
std::vector<double> apply_slot(const std::vector<double>& c, int n, int rank, int slot, const Mat& m) {
    std::size_t stride = 1;
    for (int s = rank - 1; s > slot; --s) stride *= static_cast<std::size_t>(n);
    const std::size_t block = stride * static_cast<std::size_t>(n);
    std::vector<double> out(c.size(), 0.0);
    for (std::size_t base = 0; base < c.size(); base += block)
        for (std::size_t inner = 0; inner < stride; ++inner)
            for (int a = 0; a < n; ++a) {
                double acc = 0.0;
                for (int b = 0; b < n; ++b) acc += c[base + static_cast<std::size_t>(b) * stride + inner] * m(b, a);
                out[base + static_cast<std::size_t>(a) * stride + inner] = acc;
            }
    return out;
}

} // namespace

double& TensorValue::at(const std::vector<int>& idx) { return components[flat_index(*this, idx)]; }
double TensorValue::at(const std::vector<int>& idx) const { return components[flat_index(*this, idx)]; }

Mat TensorValue::matrix() const {
    if (rank() != 2) throw DimensionError("tensor is not rank 2");
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = components[static_cast<std::size_t>(i * n + j)];
    return m;
}

Vec TensorValue::vector() const {
    if (rank() != 1) throw DimensionError("tensor is not rank 1");
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = components[static_cast<std::size_t>(i)];
    return v;
}

void TensorValue::symmetrize() {
    if (rank() != 2 || (p != 2 && q != 2)) throw DimensionError("symmetrize needs a rank-2 tensor of one variance");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double& a = components[static_cast<std::size_t>(i * n + j)];
            double& b = components[static_cast<std::size_t>(j * n + i)];
            const double m = 0.5 * (a + b);
            a = m;
            b = m;
        }
}

TensorValue transform_tensor(const TensorValue& t, const CoordinateChange& change, const Point& x) {
    const Mat j = change.jacobian_at(x);
    if (t.rank() > 0 && j.rows() != t.n) throw DimensionError("transform_tensor: dimension mismatch");
    const double det = j.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300)
        throw SingularityError("transform_tensor: singular Jacobian");
    TensorValue out = t;
    if (t.rank() > 0) {
        const Mat jinv = j.inverse();       // dx/dxc
        const Mat jt = j.transpose();       // new^l = sum_j old^j J(l, j)
        for (int s = 0; s < t.p; ++s) out.components = apply_slot(out.components, t.n, t.rank(), s, jinv);
        for (int s = t.p; s < t.rank(); ++s) out.components = apply_slot(out.components, t.n, t.rank(), s, jt);
    }
    if (t.weight != 0) {
        const double f = std::pow(std::abs(det), t.weight);
        for (double& c : out.components) c *= f;
    }
    return out;
}

double transform_density(const DensityFamily& family, const CoordinateChange& change, const Point& xc,
                         const ControlParams& theta) {
    if (change.from != family.chart)
        throw DomainError("transform_density: change starts in '" + change.from + "', density lives in '" +
                          family.chart + "'");
    require_chart(xc, change.to);
    const Point x(change.from, change.inverse(xc.x));
    if (!family.support.contains(x.x)) throw DomainError("transform_density: preimage outside support");
    const double det = change.jacobian_at(x).determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300)
        throw SingularityError("transform_density: singular Jacobian");
    return family.rho(x, theta) / std::abs(det);
}

DensityFamily pushforward_family(const DensityFamily& family, const CoordinateChange& change) {
    if (change.from != family.chart) throw DomainError("pushforward_family: chart mismatch");
    DensityFamily out;
    out.id = family.id;
    out.chart = change.to;
    out.dim = family.dim;
    out.support = change.codomain;
    auto base = family.log_density;
    auto ch = change;
    out.log_density = [base, ch](const Vec& xc, const ControlParams& theta) {
        const Vec x = ch.inverse(xc);
        const Point px(ch.from, x);
        const double det = ch.jacobian_at(px).determinant();
        return base(x, theta) - std::log(std::abs(det));
    };
    return out;
}

} // namespace fgeo
