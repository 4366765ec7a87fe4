#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error { public: using Error::Error; };
class SingularityError : public Error { public: using Error::Error; };
class BoundaryError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class DimensionError : public Error { public: using Error::Error; };
class OptimizationError : public Error { public: using Error::Error; };
class SamplerError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class UnsupportedError : public Error { public: using Error::Error; };
class ConsistencyError : public Error { public: using Error::Error; };
class StationarityError : public Error { public: using Error::Error; };

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual(residual) {}
    double residual;
};

class BvpError : public Error {
public:
    BvpError(const std::string& what, double best_residual)
        : Error(what), best_residual(best_residual) {}
    double best_residual;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double error_estimate)
        : Error(what), error_estimate(error_estimate) {}
    double error_estimate;
};

// Coordinates of an event in a named chart.
struct Point {
    std::string chart;
    Vec x;

    Point() = default;
    Point(std::string chart_name, Vec coords) : chart(std::move(chart_name)), x(std::move(coords)) {}

    int dim() const { return static_cast<int>(x.size()); }
    double operator[](int i) const { return x(i); }
};

// Throws DomainError unless both points live in the same chart.
void require_same_chart(const Point& a, const Point& b);
void require_chart(const Point& p, const std::string& chart);

struct ControlParams {
    Vec values;
    double k = 1.0;

    ControlParams() = default;
    explicit ControlParams(Vec v, double k_ = 1.0) : values(std::move(v)), k(k_) {}
    ControlParams(std::initializer_list<double> v, double k_ = 1.0);

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values(i); }
    void validate() const;
};

// Axis-aligned box, possibly half-infinite, with an optional extra predicate.
// Periodic coordinates are never treated as boundaries for stencils; their
// bounds only define one period for integration.
struct Support {
    Vec lower;
    Vec upper;
    std::vector<bool> periodic;
    std::function<bool(const Vec&)> predicate;

    static Support whole(int n);
    static Support box(Vec lo, Vec hi);

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Vec& x) const;
    // Largest step h' <= h such that x +- reach*h' stays inside along axis k.
    double fit_step(const Vec& x, int k, double h, int reach) const;
};

Vec vec(std::initializer_list<double> v);

} // namespace fgeo
