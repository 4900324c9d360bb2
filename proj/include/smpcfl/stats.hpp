#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace smpcfl {

// Pearson chi-square statistic for a uniform null over `counts.size()` bins.
inline double chi_square_uniform(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

// Upper critical value of chi-square at significance alpha = 0.01 via the
// Wilson-Hilferty cube approximation (accurate to ~0.1% for df >= 10).
inline double chi_square_critical_99(std::size_t df) {
    const double z = 2.3263478740408408; // Phi^-1(0.99)
    const double d = static_cast<double>(df);
    const double t = 1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d));
    return d * t * t * t;
}

inline bool uniformity_not_rejected(std::span<const std::uint64_t> counts) {
    return chi_square_uniform(counts) < chi_square_critical_99(counts.size() - 1);
}

// Least-squares y = a + b*x; returns the coefficient of determination.
struct LinearFit {
    double intercept = 0;
    double slope = 0;
    double r2 = 0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double cov = sxy - sx * sy / dn;
    const double varx = sxx - sx * sx / dn;
    const double vary = syy - sy * sy / dn;
    LinearFit f;
    f.slope = cov / varx;
    f.intercept = (sy - f.slope * sx) / dn;
    f.r2 = vary > 0 ? (cov * cov) / (varx * vary) : 1.0;
    return f;
}

} // namespace smpcfl
