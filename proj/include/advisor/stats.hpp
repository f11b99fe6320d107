#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace advisor {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_regression(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("fit_regression needs at least two points");
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_regression: all x values are equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

struct SlopeComparison {
    double difference = 0.0;  // mean(a) - mean(b)
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;  // one-sided, alternative: mean(a) < mean(b)
};

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

/// Welch's unequal-variance t-test on two groups of per-user slopes, one-sided
/// (group a smaller than group b).
inline SlopeComparison compare_slopes(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("compare_slopes needs at least two values per group");
    SlopeComparison c;
    const double ma = mean_of(a), mb = mean_of(b);
    const double qa = sample_variance(a) / static_cast<double>(a.size());
    const double qb = sample_variance(b) / static_cast<double>(b.size());
    c.difference = ma - mb;
    const double se2 = qa + qb;
    if (se2 == 0.0) {
        c.t = c.difference < 0 ? -std::numeric_limits<double>::infinity()
                               : (c.difference > 0 ? std::numeric_limits<double>::infinity() : 0.0);
        c.df = static_cast<double>(a.size() + b.size() - 2);
        c.p_value = c.difference < 0 ? 0.0 : (c.difference > 0 ? 1.0 : 0.5);
        return c;
    }
    c.t = c.difference / std::sqrt(se2);
    c.df = se2 * se2 /
           (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
    boost::math::students_t dist(c.df);
    c.p_value = boost::math::cdf(dist, c.t);
    return c;
}

}  // namespace advisor
