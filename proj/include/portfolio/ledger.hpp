#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "portfolio/clustering.hpp"
#include "portfolio/decision.hpp"
#include "portfolio/errors.hpp"

namespace portfolio {

/// Share rounding mode. Whole shares (floor) is the production setting;
/// fractional shares exist for closed-form checks.
enum class ShareRounding { Floor, None };

/// Full portfolio state: per-group share vectors, residual cash,
/// risk-free balance, and cost accumulators. A value type; rebalance
/// returns a new Ledger.
struct Ledger {
    Eigen::VectorXd sh1;
    Eigen::VectorXd sh2;
    double h1 = 0.0;
    double h2 = 0.0;
    double pf = 0.0;
    double p0 = 0.0;
    Eigen::Index t = 0;
    double cum_cost = 0.0;

    static Ledger initial(Eigen::Index m, double initial_capital) {
        Ledger l;
        l.sh1 = Eigen::VectorXd::Zero(m);
        l.sh2 = Eigen::VectorXd::Zero(m);
        l.h1 = initial_capital;
        l.p0 = initial_capital;
        return l;
    }
};

/// Marked-to-market portfolio values.
struct PortfolioValue {
    double p = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double pf = 0.0;
};

struct RebalanceReport {
    double cost1 = 0.0;
    double cost2 = 0.0;
    double u1 = 1.0;
    double u2 = 1.0;
    bool scaled = false;
    double scale = 1.0;
    Eigen::VectorXd weights_realized;
};

inline PortfolioValue mark_to_market(const Ledger& ledger,
                                     const Eigen::VectorXd& prices) {
    PortfolioValue v;
    v.p1 = ledger.sh1.dot(prices) + ledger.h1;
    v.p2 = ledger.sh2.dot(prices) + ledger.h2;
    v.pf = ledger.pf;
    v.p = v.p1 + v.p2 + v.pf;
    return v;
}

/// phi_t = log2(p_t / p_{t-1}).
inline double period_log_return(double p_t, double p_prev) {
    if (!(p_t > 0.0) || !(p_prev > 0.0))
        throw NonPositiveValueError("period_log_return needs positive values");
    return std::log2(p_t / p_prev);
}

/// p_f = p0 * 2^{sum of phis}.
inline double terminal_value(double p0, const std::vector<double>& phis) {
    double s = 0.0;
    for (double phi : phis) s += phi;
    return p0 * std::exp2(s);
}

/// Compounds the risk-free balance by one period: pf *= 2^{r_A}.
inline void accrue_risk_free(Ledger& ledger, double r_A) {
    ledger.pf *= std::exp2(r_A);
}

namespace detail {

struct TrialResult {
    Eigen::VectorXd sh1, sh2;
    double h1 = 0.0, h2 = 0.0, pf = 0.0;
    double cost1 = 0.0, cost2 = 0.0;
    double u1 = 1.0, u2 = 1.0;
    double min_residual = 0.0;
};

/// Executes the rebalance for an interpolated allocation. `s` blends the
/// current state (0) toward the requested target (1): intra weights and
/// capital fractions move linearly, so the turnover cost scales with s.
/// Intra weights are fractions of group capital; anything not assigned
/// to shares stays as that group's residual cash.
inline TrialResult rebalance_trial(
    const Eigen::VectorXd& intra_prev1, const Eigen::VectorXd& intra_prev2,
    double capf_prev, double cap1_prev, double cap2_prev, double p,
    double p1_pre, double p2_pre, const AllocationDecision& target,
    const Eigen::VectorXd& prices, const GroupMask& masks, double cs,
    double s, ShareRounding rounding) {
    const Eigen::Index m = prices.size();
    const Eigen::VectorXd intra1 = intra_prev1 + s * (target.intra1 - intra_prev1);
    const Eigen::VectorXd intra2 = intra_prev2 + s * (target.intra2 - intra_prev2);
    const double cap1 = cap1_prev + s * (target.cap1 - cap1_prev);
    const double cap2 = cap2_prev + s * (target.cap2 - cap2_prev);
    const double capf = capf_prev + s * (target.cap_f - capf_prev);

    TrialResult r;
    r.cost1 = cs * p1_pre * (intra_prev1 - intra1).lpNorm<1>();
    r.cost2 = cs * p2_pre * (intra_prev2 - intra2).lpNorm<1>();

    const double t1 = p * cap1, t2 = p * cap2, tf = p * capf;
    const double cap1_net = t1 - r.cost1;
    const double cap2_net = t2 - r.cost2;
    r.u1 = t1 > 0.0 ? cap1_net / t1 : 1.0;
    r.u2 = t2 > 0.0 ? cap2_net / t2 : 1.0;

    r.sh1 = Eigen::VectorXd::Zero(m);
    r.sh2 = Eigen::VectorXd::Zero(m);
    double inv1 = 0.0, inv2 = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (masks.m1(j) > 0.5 && intra1(j) > 0.0 && cap1_net > 0.0) {
            double raw = cap1_net * intra1(j) / prices(j);
            if (rounding == ShareRounding::Floor) raw = std::floor(raw);
            r.sh1(j) = raw;
            inv1 += raw * prices(j);
        }
        if (masks.m2(j) > 0.5 && intra2(j) > 0.0 && cap2_net > 0.0) {
            double raw = cap2_net * intra2(j) / prices(j);
            if (rounding == ShareRounding::Floor) raw = std::floor(raw);
            r.sh2(j) = raw;
            inv2 += raw * prices(j);
        }
    }
    r.h1 = cap1_net - inv1;
    r.h2 = cap2_net - inv2;
    r.pf = tf;
    r.min_residual = std::min({r.h1, r.h2, r.pf});
    return r;
}

}  // namespace detail

/// Weight-targeted rebalance with the two-group transaction flow: total
/// value is carved into a risk-free slice and two group slices
/// proportional to target capital fractions, L1-turnover costs are
/// deducted from each group, group capital converts to shares by floor
/// rounding, and the leftover becomes residual cash. If any residual
/// cash would go negative the trade vector is scaled down by bisection
/// to the largest feasible factor in [0,1].
inline std::pair<Ledger, RebalanceReport> rebalance(
    const Ledger& ledger, const AllocationDecision& target,
    const Eigen::VectorXd& prices, const GroupMask& masks, double cs,
    ShareRounding rounding = ShareRounding::Floor) {
    const Eigen::Index m = prices.size();
    if ((prices.array() <= 0.0).any())
        throw NonPositiveValueError("rebalance: prices must be positive");
    for (Eigen::Index j = 0; j < m; ++j) {
        if (target.intra1(j) > 0.0 && masks.m1(j) < 0.5)
            throw MaskMismatchError("group-1 weight on asset outside mask");
        if (target.intra2(j) > 0.0 && masks.m2(j) < 0.5)
            throw MaskMismatchError("group-2 weight on asset outside mask");
    }

    Ledger cur = ledger;

    // Epoch-boundary migration: liquidate positions whose asset left the
    // group; proceeds go to the group's cash, the sale cost is charged.
    double migration_cost = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (cur.sh1(j) > 0.0 && masks.m1(j) < 0.5) {
            const double value = cur.sh1(j) * prices(j);
            cur.h1 += value * (1.0 - cs);
            migration_cost += value * cs;
            cur.sh1(j) = 0.0;
        }
        if (cur.sh2(j) > 0.0 && masks.m2(j) < 0.5) {
            const double value = cur.sh2(j) * prices(j);
            cur.h2 += value * (1.0 - cs);
            migration_cost += value * cs;
            cur.sh2(j) = 0.0;
        }
    }

    const PortfolioValue pre = mark_to_market(cur, prices);
    if (!(pre.p > 0.0))
        throw InsolventPortfolioError("total portfolio value is not positive");

    // Current intra weights as fractions of group capital.
    Eigen::VectorXd intra_prev1 = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd intra_prev2 = Eigen::VectorXd::Zero(m);
    if (pre.p1 > 0.0)
        intra_prev1 = (cur.sh1.array() * prices.array() / pre.p1).matrix();
    if (pre.p2 > 0.0)
        intra_prev2 = (cur.sh2.array() * prices.array() / pre.p2).matrix();
    const double cap1_prev = pre.p1 / pre.p;
    const double cap2_prev = pre.p2 / pre.p;
    const double capf_prev = pre.pf / pre.p;

    auto attempt = [&](double s) {
        return detail::rebalance_trial(intra_prev1, intra_prev2, capf_prev,
                                       cap1_prev, cap2_prev, pre.p, pre.p1,
                                       pre.p2, target, prices, masks, cs, s,
                                       rounding);
    };

    constexpr double kTol = 1e-12;
    detail::TrialResult best = attempt(1.0);
    double scale = 1.0;
    bool scaled = false;
    if (best.min_residual < -kTol) {
        scaled = true;
        double lo = 0.0, hi = 1.0;
        detail::TrialResult lo_res = attempt(0.0);
        for (int it = 0; it < 60 && hi - lo > kTol; ++it) {
            const double mid = 0.5 * (lo + hi);
            detail::TrialResult mid_res = attempt(mid);
            if (mid_res.min_residual >= -kTol) {
                lo = mid;
                lo_res = std::move(mid_res);
            } else {
                hi = mid;
            }
        }
        best = std::move(lo_res);
        scale = lo;
    }

    Ledger next = cur;
    next.sh1 = best.sh1;
    next.sh2 = best.sh2;
    next.h1 = std::max(best.h1, 0.0);
    next.h2 = std::max(best.h2, 0.0);
    next.pf = std::max(best.pf, 0.0);
    next.t = cur.t + 1;
    next.cum_cost = cur.cum_cost + best.cost1 + best.cost2 + migration_cost;

    RebalanceReport report;
    report.cost1 = best.cost1;
    report.cost2 = best.cost2;
    report.u1 = best.u1;
    report.u2 = best.u2;
    report.scaled = scaled;
    report.scale = scale;
    const PortfolioValue post = mark_to_market(next, prices);
    report.weights_realized =
        ((next.sh1 + next.sh2).array() * prices.array() / post.p).matrix();
    return {std::move(next), std::move(report)};
}

}  // namespace portfolio
