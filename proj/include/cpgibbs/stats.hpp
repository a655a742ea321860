#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace cpgibbs::stats {

struct MeanError {
    double mean = 0.0;
    double stderr_ = 0.0;  // standard error of the mean
    double stddev = 0.0;
};

inline MeanError mean_error(std::span<const double> xs) {
    MeanError r;
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= n;
    if (xs.size() < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / (n - 1.0));
    r.stderr_ = r.stddev / std::sqrt(n);
    return r;
}

/// Kolmogorov-Smirnov distance between the sample and Uniform[0,1).
inline double ks_uniform(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max(d, (i + 1) / n - xs[i]);
        d = std::max(d, xs[i] - i / n);
    }
    return d;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        rss += e * e;
    }
    f.rms_residual = std::sqrt(rss / n);
    return f;
}

}  // namespace cpgibbs::stats
