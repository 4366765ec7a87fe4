#include "fgeo/special.hpp"

#include "fgeo/core.hpp"

#include <cmath>

namespace fgeo {

namespace {

constexpr double kSqrtPi = 1.77245385090551602729816748334114518;
constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

// Single-precision starting point (Giles 2010); refined by Newton below.
double erfinv_guess(double y) {
    double w = -std::log((1.0 - y) * (1.0 + y));
    double p;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    return p * y;
}

} // namespace

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double erfcx(double x) {
    if (x < 4.0) return std::exp(x * x) * std::erfc(x);
    // Continued fraction e^{x^2} erfc(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    double f = x;
    for (int k = 60; k >= 1; --k) f = x + 0.5 * k / f;
    return 1.0 / (kSqrtPi * f);
}

double erfinv(double y) {
    if (y <= -1.0 || y >= 1.0) {
        if (y == 1.0) return kInf;
        if (y == -1.0) return -kInf;
        throw DomainError("erfinv: argument outside (-1, 1)");
    }
    if (std::abs(y) > 0.9) {
        double v = erfcinv(1.0 - std::abs(y));
        return y > 0 ? v : -v;
    }
    double x = erfinv_guess(y);
    for (int i = 0; i < 4; ++i) {
        double f = std::erf(x) - y;
        double d = 2.0 / kSqrtPi * std::exp(-x * x);
        double step = f / d;
        // Halley correction
        x -= step / (1.0 + x * step);
        if (std::abs(step) < 1e-17 * (1.0 + std::abs(x))) break;
    }
    return x;
}

double erfcinv(double z) {
    if (!(z > 0.0 && z < 2.0)) {
        if (z == 0.0) return kInf;
        if (z == 2.0) return -kInf;
        throw DomainError("erfcinv: argument outside (0, 2)");
    }
    if (z > 1.0) return -erfcinv(2.0 - z);
    double x;
    if (z > 1e-3) {
        x = erfinv_guess(1.0 - z);
    } else {
        double t = std::sqrt(-std::log(z));
        for (int i = 0; i < 3; ++i) t = std::sqrt(-std::log(z * kSqrtPi * t));
        x = t;
    }
    const double lz = std::log(z);
    for (int i = 0; i < 60; ++i) {
        double ec = std::erfc(x);
        if (ec <= 0.0) break;
        double g = std::log(ec) - lz;
        double dg = -2.0 / kSqrtPi * std::exp(-x * x) / ec;
        double step = g / dg;
        x -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
    }
    return x;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        throw DomainError("normal_quantile: probability outside [0, 1]");
    }
    return -kSqrt2 * erfcinv(2.0 * p);
}

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw DomainError("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 1000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

double kolmogorov_sf(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.0) {
        // P(K <= t) via the Jacobi-transformed series
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            double m = 2.0 * k - 1.0;
            s += std::exp(-m * m * kPi * kPi / (8.0 * t * t));
        }
        return 1.0 - std::sqrt(2.0 * kPi) / t * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * t * t);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return 2.0 * s;
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n must be positive");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    return gl;
}

} // namespace fgeo
