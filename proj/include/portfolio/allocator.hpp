#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "portfolio/clustering.hpp"
#include "portfolio/decision.hpp"
#include "portfolio/errors.hpp"

namespace portfolio {

/// Sample moments of the two group log2-return series, with a ridge
/// term keeping the covariance positive definite.
struct GroupMoments {
    Eigen::Vector2d mu;
    Eigen::Matrix2d sigma;
    Eigen::Index window = 0;
    double ridge = 0.0;
};

/// Allocator configuration. Every constant is config-exposed; defaults
/// are engineering choices, not fitted values.
struct AllocatorConfig {
    double c = -0.05;            // hyperplane constant
    double clip_low = -0.5;      // momentum clip bounds
    double clip_high = 0.5;
    int rebound_lookback = 3;    // m
    double theta_down = -0.01;   // sustained-downtrend threshold
    double theta_up = 0.003;     // rebound confirmation threshold
    double eta_blend = 0.3;      // fusion intensity
    double temperature = 0.5;    // capital softmax temperature
    int moment_window = 60;
    double ridge = 1e-6;
    double degenerate_tol = 1e-12;  // B below this is degenerate
};

/// Sample mean and covariance (denominator w-1) of a 2 x w window of
/// group log2 returns, plus ridge * I.
inline GroupMoments estimate_moments(const Eigen::MatrixXd& group_returns,
                                     double ridge) {
    if (group_returns.rows() != 2)
        throw WindowTooShortError("estimate_moments expects 2 x w input");
    const Eigen::Index w = group_returns.cols();
    if (w < 2) throw WindowTooShortError("moment window must be >= 2");

    GroupMoments gm;
    gm.window = w;
    gm.ridge = ridge;
    gm.mu = group_returns.rowwise().mean();
    const Eigen::MatrixXd centered = group_returns.colwise() - gm.mu;
    gm.sigma = centered * centered.transpose() / static_cast<double>(w - 1);
    gm.sigma += ridge * Eigen::Matrix2d::Identity();
    return gm;
}

/// Closed-form minimum-variance point on the hyperplane
/// w'(mu - 1 r_A) = -c:  w = -(c/B) Sigma^{-1}(mu - 1 r_A) with
/// B = (mu - 1 r_A)' Sigma^{-1} (mu - 1 r_A). The utility curvature and
/// wealth level cancel and never enter.
inline Eigen::Vector2d utility_optimal(const GroupMoments& moments, double r_A,
                                       double c,
                                       double degenerate_tol = 1e-12) {
    const Eigen::Vector2d excess =
        moments.mu - Eigen::Vector2d::Constant(r_A);
    const Eigen::Vector2d a = moments.sigma.ldlt().solve(excess);
    const double b = excess.dot(a);
    if (!(b > degenerate_tol))
        throw DegenerateExcessReturnError("excess-return quadratic form is degenerate");
    return (-c / b) * a;
}

/// Overload taking the utility curvature and wealth level explicitly:
/// both cancel in the closed form, so the result is identical for any
/// positive values.
inline Eigen::Vector2d utility_optimal(const GroupMoments& moments, double r_A,
                                       double c, double alpha, double wealth,
                                       double degenerate_tol = 1e-12) {
    if (!(alpha > 0.0) || !(wealth > 0.0))
        throw InvalidBoundsError("alpha and wealth must be positive");
    return utility_optimal(moments, r_A, c, degenerate_tol);
}

/// beta_mom = Clip(3 * mean_recent, l, h), element-wise.
inline Eigen::Vector2d momentum_strength(const Eigen::Vector2d& mean_recent,
                                         double l, double h) {
    if (l > h) throw InvalidBoundsError("momentum clip bounds inverted");
    return (3.0 * mean_recent.array()).min(h).max(l).matrix();
}

/// w* = w^c . (1 + beta_mom . tanh(mean_recent)), element-wise.
inline Eigen::Vector2d momentum_adjust(const Eigen::Vector2d& omega_c,
                                       const Eigen::Vector2d& beta_mom,
                                       const Eigen::Vector2d& mean_recent) {
    return (omega_c.array() *
            (1.0 + beta_mom.array() * mean_recent.array().tanh()))
        .matrix();
}

/// Rebound: trailing-m mean below theta_d AND the last two period
/// returns each above theta_u. Applied per group row.
inline std::array<bool, 2> detect_rebound(const Eigen::MatrixXd& group_returns,
                                          int m, double theta_d,
                                          double theta_u) {
    if (group_returns.rows() != 2)
        throw WindowTooShortError("detect_rebound expects 2 x w input");
    const Eigen::Index w = group_returns.cols();
    if (w < m + 2) throw WindowTooShortError("rebound window must cover m + 2 periods");
    if (!(theta_d < 0.0) || !(theta_u > 0.0))
        throw InvalidBoundsError("rebound thresholds must satisfy theta_d < 0 < theta_u");

    std::array<bool, 2> flags{false, false};
    for (int g = 0; g < 2; ++g) {
        const double mean =
            group_returns.row(g).segment(w - 2 - m, m).mean();
        const bool downtrend = mean < theta_d;
        const bool recovery = group_returns(g, w - 2) > theta_u &&
                              group_returns(g, w - 1) > theta_u;
        flags[static_cast<std::size_t>(g)] = downtrend && recovery;
    }
    return flags;
}

/// Per-group sums of the upper agent's simplex weights under each mask.
inline Eigen::Vector2d aggregate_global_mass(const Eigen::VectorXd& omega0,
                                             const GroupMask& mask) {
    Eigen::Vector2d out;
    out(0) = omega0.dot(mask.m1);
    out(1) = omega0.dot(mask.m2);
    return out;
}

/// Convex blend toward the global mass, applied only to rebound-flagged
/// groups: w_new_i = (1 - eta) w*_i + eta global_i when flagged.
inline Eigen::Vector2d fuse_on_rebound(const Eigen::Vector2d& omega_star,
                                       const Eigen::Vector2d& global_mass,
                                       const std::array<bool, 2>& flags,
                                       double eta_blend) {
    if (eta_blend < 0.0 || eta_blend > 1.0)
        throw BlendOutOfRangeError("eta_blend must lie in [0, 1]");
    Eigen::Vector2d out = omega_star;
    for (int g = 0; g < 2; ++g)
        if (flags[static_cast<std::size_t>(g)])
            out(g) = (1.0 - eta_blend) * omega_star(g) +
                     eta_blend * global_mass(g);
    return out;
}

/// Capital fractions from softmax([0, a, b] / Tep). The leading zero is
/// the risk-free logit.
inline std::array<double, 3> capital_split(const Eigen::Vector2d& omega_new,
                                           double temperature) {
    if (!(temperature > 0.0))
        throw NonPositiveTemperatureError("softmax temperature must be positive");
    const double logits[3] = {0.0, omega_new(0) / temperature,
                              omega_new(1) / temperature};
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double e[3], z = 0.0;
    for (int i = 0; i < 3; ++i) {
        e[i] = std::exp(logits[i] - mx);
        z += e[i];
    }
    return {e[0] / z, e[1] / z, e[2] / z};
}

/// Scales intra-group simplex vectors by their capital fractions into
/// the final per-asset weight vector.
inline AllocationDecision final_weights(const Eigen::VectorXd& intra1,
                                        const Eigen::VectorXd& intra2,
                                        const std::array<double, 3>& caps,
                                        const GroupMask& masks) {
    const Eigen::Index m = intra1.size();
    for (Eigen::Index j = 0; j < m; ++j) {
        if (intra1(j) > 0.0 && masks.m1(j) < 0.5)
            throw MaskMismatchError("intra1 weight off mask");
        if (intra2(j) > 0.0 && masks.m2(j) < 0.5)
            throw MaskMismatchError("intra2 weight off mask");
    }
    AllocationDecision d;
    d.intra1 = intra1;
    d.intra2 = intra2;
    d.cap_f = caps[0];
    d.cap1 = caps[1];
    d.cap2 = caps[2];
    d.final = intra1 * d.cap1 + intra2 * d.cap2;
    return d;
}

/// Full group-level allocation step: moments -> closed-form utility
/// point -> momentum tilt -> rebound-gated fusion with the upper
/// agent's group mass -> temperature softmax -> final weights. Falls
/// back to all-risk-free when the excess return is degenerate.
inline AllocationDecision allocate(const Eigen::MatrixXd& group_returns,
                                   const Eigen::VectorXd& intra1,
                                   const Eigen::VectorXd& intra2,
                                   const Eigen::VectorXd& omega0,
                                   const GroupMask& masks, double r_A,
                                   const AllocatorConfig& cfg) {
    const Eigen::Index w = group_returns.cols();
    Eigen::Vector2d omega_new;
    std::array<bool, 2> flags{false, false};
    bool degenerate = false;
    try {
        const Eigen::Index mw =
            std::min<Eigen::Index>(cfg.moment_window, w);
        const GroupMoments moments = estimate_moments(
            group_returns.rightCols(mw), cfg.ridge);
        const Eigen::Vector2d omega_c =
            utility_optimal(moments, r_A, cfg.c, cfg.degenerate_tol);

        const Eigen::Vector2d mean_recent =
            group_returns.rightCols(std::min<Eigen::Index>(3, w))
                .rowwise()
                .mean();
        const Eigen::Vector2d beta_mom =
            momentum_strength(mean_recent, cfg.clip_low, cfg.clip_high);
        const Eigen::Vector2d omega_star =
            momentum_adjust(omega_c, beta_mom, mean_recent);

        if (w >= cfg.rebound_lookback + 2)
            flags = detect_rebound(group_returns, cfg.rebound_lookback,
                                   cfg.theta_down, cfg.theta_up);
        const Eigen::Vector2d global_mass = aggregate_global_mass(omega0, masks);
        omega_new = fuse_on_rebound(omega_star, global_mass, flags,
                                    cfg.eta_blend);
    } catch (const DegenerateExcessReturnError&) {
        degenerate = true;
    }

    std::array<double, 3> caps{1.0, 0.0, 0.0};
    if (!degenerate) caps = capital_split(omega_new, cfg.temperature);

    // A group without capital keeps an all-zero intra vector.
    Eigen::VectorXd i1 = caps[1] > 0.0 ? intra1
                                       : Eigen::VectorXd::Zero(intra1.size());
    Eigen::VectorXd i2 = caps[2] > 0.0 ? intra2
                                       : Eigen::VectorXd::Zero(intra2.size());
    AllocationDecision d = final_weights(i1, i2, caps, masks);
    d.rebound1 = flags[0];
    d.rebound2 = flags[1];
    return d;
}

}  // namespace portfolio
