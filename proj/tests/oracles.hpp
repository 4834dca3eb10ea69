#pragma once

// Test-side reference computations, kept independent of the library code
// paths they check.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

// Overlap of two equal-width normalized Gaussians whose centers differ by
// delta: exp(-ln2 * delta^2 / fwhm^2)  (fwhm is the intensity FWHM).
inline double gaussian_overlap(double delta_ns, double fwhm_ns) {
    const double ln2 = 0.6931471805599453;
    return std::exp(-ln2 * delta_ns * delta_ns / (fwhm_ns * fwhm_ns));
}

inline double gaussian_likeness(double delta_ns, double fwhm_ns) {
    const double o = gaussian_overlap(delta_ns, fwhm_ns);
    return o * o;
}

// Center offset producing a given likeness between equal-width Gaussians.
inline double offset_for_likeness(double likeness, double fwhm_ns) {
    const double ln2 = 0.6931471805599453;
    return fwhm_ns * std::sqrt(std::log(1.0 / likeness) / (2.0 * ln2));
}

// arctan via the Euler series, independent of any libm arctan:
//   atan(x) = y/x * sum_n  prod_{k<=n} (2k y / ((2k+1) x^2... ) with
//   y = x^2/(1+x^2); converges for all finite x.
inline long double arctan_series(long double x) {
    if (x < 0) return -arctan_series(-x);
    if (x > 1) {
        const long double half_pi = 1.57079632679489661923L;
        return half_pi - arctan_series(1 / x);
    }
    const long double y = x * x / (1 + x * x);
    long double term = x / (1 + x * x);
    long double sum = term;
    for (int n = 1; n < 200; ++n) {
        term *= (2.0L * n) * y / (2.0L * n + 1);
        sum += term;
        if (term < 1e-30L) break;
    }
    return sum;
}

// Plain trapezoid quadrature of f over [a, b] with n panels.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int n) {
    double acc = 0.5 * (f(a) + f(b));
    const double h = (b - a) / n;
    for (int k = 1; k < n; ++k) acc += f(a + k * h);
    return acc * h;
}

// Simple bisection for an increasing function.
inline double bisect(const std::function<double(double)>& f, double target, double lo,
                     double hi, int iters = 200) {
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Ordinary least squares y = a + b x; returns (intercept, slope, r_squared).
struct LinearFit {
    double intercept, slope, r_squared;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need matching samples");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ss_res += r * r;
    }
    return {intercept, slope, ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

} // namespace oracles
