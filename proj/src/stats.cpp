#include "styleaudit/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace styleaudit::stats {
namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3.0e-16;
    constexpr double kTiny = 1.0e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;  // converged to double precision for all df used here
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("ibeta_reg requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double ibeta_reg_inv(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        const double f = ibeta_reg(a, b, x) - p;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        // Newton step using the beta density as the derivative.
        const double ln_pdf = std::lgamma(a + b) - std::lgamma(a) -
                              std::lgamma(b) + (a - 1.0) * std::log(x) +
                              (b - 1.0) * std::log1p(-x);
        const double pdf = std::exp(ln_pdf);
        double next = x;
        if (pdf > 0.0 && std::isfinite(pdf)) next = x - f / pdf;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-15 * (1.0 + std::fabs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double student_t_cdf(double df, double t) {
    if (df <= 0.0) throw std::invalid_argument("student_t_cdf requires df > 0");
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * ibeta_reg(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double df, double confidence) {
    if (df <= 0.0)
        throw std::invalid_argument("student_t_quantile requires df > 0");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("confidence must be in (0, 1)");
    if (confidence == 0.5) return 0.0;
    const double p = confidence > 0.5 ? confidence : 1.0 - confidence;
    // P(T <= t) = p with t >= 0  <=>  I_x(df/2, 1/2) = 2(1 - p),
    // where x = df / (df + t^2).
    const double x = ibeta_reg_inv(0.5 * df, 0.5, 2.0 * (1.0 - p));
    double t;
    if (x <= 0.0) {
        t = std::numeric_limits<double>::infinity();
    } else {
        t = std::sqrt(df * (1.0 - x) / x);
    }
    return confidence > 0.5 ? t : -t;
}

}  // namespace styleaudit::stats
