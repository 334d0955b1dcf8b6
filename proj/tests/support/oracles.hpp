#pragma once

// Reference computations used by the tests. Nothing here calls into the
// closed forms under test.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Trapezoid rule on [-L, L]^2 with step h. For smooth integrands with
/// Gaussian decay the error falls exponentially in 1/h.
inline double integrate2d(const std::function<double(double, double)>& f, double L, double h) {
    const int n = static_cast<int>(std::ceil(L / h));
    double s = 0.0;
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) s += f(i * h, j * h);
    return s * h * h;
}

inline double integrate4d(const std::function<double(const Vec&)>& f, double L, double h) {
    const int n = static_cast<int>(std::ceil(L / h));
    Vec x(4);
    double s = 0.0;
    for (int a = -n; a <= n; ++a)
        for (int b = -n; b <= n; ++b)
            for (int c = -n; c <= n; ++c)
                for (int d = -n; d <= n; ++d) {
                    x << a * h, b * h, c * h, d * h;
                    s += f(x);
                }
    return s * h * h * h * h;
}

/// Sum over all pair partitions of {0..n-1} of prod w(i, j), by recursion.
inline double pair_partition_sum(const Mat& w, std::vector<int> rest) {
    if (rest.empty()) return 1.0;
    const int first = rest.front();
    double total = 0.0;
    for (std::size_t k = 1; k < rest.size(); ++k) {
        std::vector<int> sub;
        for (std::size_t t = 1; t < rest.size(); ++t)
            if (t != k) sub.push_back(rest[t]);
        total += w(first, rest[k]) * pair_partition_sum(w, sub);
    }
    return total;
}

/// Taylor coefficient [t^n] f(t) from N samples on the circle |t| = r.
inline std::complex<double> taylor_coefficient(
    const std::function<std::complex<double>(std::complex<double>)>& f, int n, double r, int N = 256) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * std::numbers::pi * j / N;
        s += f(std::polar(r, th)) * std::polar(1.0, -n * th);
    }
    return s / (double(N) * std::pow(r, n));
}

/// <r|D(gamma)|c> from the associated Laguerre closed form.
inline std::complex<double> displacement_element(std::complex<double> gamma, int r, int c) {
    const double x = std::norm(gamma);
    const int lo = std::min(r, c), hi = std::max(r, c);
    const double pref = std::exp(0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) - 0.5 * x);
    const std::complex<double> z = r >= c ? gamma : -std::conj(gamma);
    return pref * std::pow(z, hi - lo) * std::assoc_laguerre(lo, hi - lo, x);
}

/// W(beta) = (2 pi)^-2 * integral chi(alpha) cos(alpha . beta) over R^2, for a
/// real, even characteristic function of one mode.
inline double fourier_wigner(const std::function<double(const Vec&)>& chi, const Vec& beta, double L,
                             double h) {
    Vec a(2);
    const double s = integrate2d(
        [&](double x, double y) {
            a << x, y;
            return chi(a) * std::cos(x * beta(0) + y * beta(1));
        },
        L, h);
    return s / (4.0 * std::numbers::pi * std::numbers::pi);
}

} // namespace oracle
