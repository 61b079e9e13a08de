#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pgl {

// Compensated accumulator; summing per-trial values through this makes the
// total independent of how trials were distributed over threads.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value() / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    KahanSum s;
    for (double x : v) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(v.size() - 1);
}

// standard error of the sample mean
inline double se_of_mean(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

inline double binomial_se(double p, std::size_t n) {
    if (n == 0) return 0.0;
    const double q = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

struct CovEstimate {
    double cov = 0.0;  // sample covariance (1/(n-1) normalization)
    double se = 0.0;   // asymptotic SE: sqrt((E[(x-mx)^2 (y-my)^2] - cov^2)/n)
};

// Covariance of paired samples with its own standard error, so callers can
// test "cov is within z*SE of a prediction" without normality assumptions.
inline CovEstimate covariance_with_se(const std::vector<double>& x, const std::vector<double>& y) {
    CovEstimate out;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return out;
    const double mx = mean(x);
    const double my = mean(y);
    KahanSum sxy, s22;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy.add(dx * dy);
        s22.add(dx * dx * dy * dy);
    }
    out.cov = sxy.value() / static_cast<double>(n - 1);
    const double m22 = s22.value() / static_cast<double>(n);
    const double var_hat = m22 - out.cov * out.cov;
    out.se = var_hat > 0.0 ? std::sqrt(var_hat / static_cast<double>(n)) : 0.0;
    return out;
}

// empirical quantile of a sorted vector, linear interpolation
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace pgl
