#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "portfolio/errors.hpp"

namespace portfolio {

inline constexpr double kMetricSentinel = 1e9;

/// The four evaluation measures over a realized sequence of per-period
/// portfolio log2 returns. Degenerate cases carry explicit flags
/// instead of silently propagating sentinels.
struct PerformanceReport {
    double cumulative_return = 0.0;
    double sharpe = 0.0;
    double sortino = 0.0;
    double omega = 0.0;
    std::size_t periods = 0;
    bool sortino_no_downside = false;
    bool omega_no_downside = false;
};

/// R_f = sum of log2 returns.
inline double cumulative_return(const std::vector<double>& phis) {
    double s = 0.0;
    for (double phi : phis) s += phi;
    return s;
}

/// mean(phi - r_A) / stdev(phi), population denominator.
inline double sharpe(const std::vector<double>& phis, double r_A) {
    if (phis.size() < 2) throw ZeroVarianceError("sharpe needs >= 2 returns");
    const double n = static_cast<double>(phis.size());
    double mean = 0.0;
    for (double phi : phis) mean += phi;
    mean /= n;
    double var = 0.0;
    for (double phi : phis) var += (phi - mean) * (phi - mean);
    var /= n;
    if (!(var > 0.0)) throw ZeroVarianceError("zero return variance");
    return (mean - r_A) / std::sqrt(var);
}

/// mean(phi - r_A) / sqrt((1/j) sum_{phi < r_A} (phi - r_A)^2).
/// Returns the sentinel when no return falls below r_A.
inline double sortino(const std::vector<double>& phis, double r_A,
                      bool* no_downside = nullptr,
                      double sentinel = kMetricSentinel) {
    double mean_excess = 0.0, down = 0.0;
    std::size_t j = 0;
    for (double phi : phis) {
        mean_excess += phi - r_A;
        if (phi < r_A) {
            down += (phi - r_A) * (phi - r_A);
            ++j;
        }
    }
    mean_excess /= static_cast<double>(phis.size());
    if (j == 0) {
        if (no_downside) *no_downside = true;
        return sentinel;
    }
    if (no_downside) *no_downside = false;
    return mean_excess / std::sqrt(down / static_cast<double>(j));
}

/// sum_{phi >= r_A}(phi - r_A) / sum_{phi < r_A}(r_A - phi).
inline double omega(const std::vector<double>& phis, double r_A,
                    bool* no_downside = nullptr,
                    double sentinel = kMetricSentinel) {
    double gain = 0.0, loss = 0.0;
    for (double phi : phis) {
        if (phi >= r_A)
            gain += phi - r_A;
        else
            loss += r_A - phi;
    }
    if (!(loss > 0.0)) {
        if (no_downside) *no_downside = true;
        return sentinel;
    }
    if (no_downside) *no_downside = false;
    return gain / loss;
}

inline PerformanceReport performance_report(const std::vector<double>& phis,
                                            double r_A) {
    PerformanceReport r;
    r.periods = phis.size();
    r.cumulative_return = cumulative_return(phis);
    r.sharpe = sharpe(phis, r_A);
    r.sortino = sortino(phis, r_A, &r.sortino_no_downside);
    r.omega = omega(phis, r_A, &r.omega_no_downside);
    return r;
}

}  // namespace portfolio
