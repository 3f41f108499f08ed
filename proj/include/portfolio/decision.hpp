#pragma once

#include <Eigen/Dense>

namespace portfolio {

/// Full output of the capital allocation pipeline: intra-group weight
/// vectors, group capital fractions, and the final per-asset weights.
/// Invariants: cap_f + cap1 + cap2 = 1; final_j = intra_i(j) * cap_i for
/// j in group i; sum(final) + cap_f = 1.
struct AllocationDecision {
    Eigen::VectorXd intra1;
    Eigen::VectorXd intra2;
    double cap_f = 1.0;
    double cap1 = 0.0;
    double cap2 = 0.0;
    Eigen::VectorXd final;
    bool rebound1 = false;
    bool rebound2 = false;
};

}  // namespace portfolio
