#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "portfolio/errors.hpp"
#include "portfolio/market_data.hpp"

namespace portfolio {

/// Result of one K-means run. Labels are cluster indices in [0, k).
struct ClusterAssignment {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;  // k x d
    double objective = 0.0;     // within-cluster sum of squares
    std::vector<double> objective_trace;  // per Lloyd iteration
    Eigen::Index epoch_start = 0;
};

/// Complementary binary group masks. m1 marks the high-quality group.
struct GroupMask {
    Eigen::VectorXd m1;
    Eigen::VectorXd m2;
    Eigen::Index epoch_start = 0;
};

namespace detail {

inline double sq_dist(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return (a - b).squaredNorm();
}

inline double wcss(const Eigen::MatrixXd& pts, const std::vector<int>& labels,
                   const Eigen::MatrixXd& centroids) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        s += sq_dist(pts.row(i), centroids.row(labels[static_cast<std::size_t>(i)]));
    return s;
}

}  // namespace detail

/// Lloyd iteration with k-means++ seeding on row-wise points.
/// Empty clusters are re-seeded from the point farthest from its centroid.
inline ClusterAssignment kmeans(const Eigen::MatrixXd& features, int k,
                                std::uint64_t seed, int max_iter = 100) {
    const Eigen::Index n = features.rows();
    if (max_iter < 1) throw DegenerateFeaturesError("kmeans: max_iter must be >= 1");

    std::set<std::vector<double>> distinct;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> row(features.row(i).data(),
                                features.row(i).data() + features.cols());
        distinct.insert(row);
    }
    if (static_cast<int>(distinct.size()) < k)
        throw DegenerateFeaturesError("kmeans: fewer distinct points than clusters");

    std::mt19937_64 rng(seed);

    // k-means++ seeding
    Eigen::MatrixXd centroids(k, features.cols());
    {
        std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
        centroids.row(0) = features.row(first(rng));
        Eigen::VectorXd d2(n);
        for (int c = 1; c < k; ++c) {
            for (Eigen::Index i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::max();
                for (int cc = 0; cc < c; ++cc)
                    best = std::min(best, detail::sq_dist(features.row(i),
                                                          centroids.row(cc)));
                d2(i) = best;
            }
            const double total = d2.sum();
            if (total <= 0.0) {
                // all remaining points coincide with chosen centroids; pick any new one
                for (Eigen::Index i = 0; i < n; ++i)
                    if (d2(i) > 0.0) { centroids.row(c) = features.row(i); break; }
                continue;
            }
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng), acc = 0.0;
            Eigen::Index pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) { pick = i; break; }
            }
            centroids.row(c) = features.row(pick);
        }
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    ClusterAssignment out;
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment
        std::vector<int> new_labels(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = detail::sq_dist(features.row(i), centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = detail::sq_dist(features.row(i), centroids.row(c));
                if (d < bd) { bd = d; best = c; }
            }
            new_labels[static_cast<std::size_t>(i)] = best;
        }

        // update
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, features.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(new_labels[static_cast<std::size_t>(i)]) += features.row(i);
            ++counts[static_cast<std::size_t>(new_labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                // re-seed from the point farthest from its current centroid
                Eigen::Index far_i = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = detail::sq_dist(
                        features.row(i),
                        centroids.row(new_labels[static_cast<std::size_t>(i)]));
                    if (d > far_d) { far_d = d; far_i = i; }
                }
                centroids.row(c) = features.row(far_i);
                new_labels[static_cast<std::size_t>(far_i)] = c;
                // recompute sums for the donor cluster on next iteration
            } else {
                centroids.row(c) =
                    sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            }
        }

        out.objective_trace.push_back(detail::wcss(features, new_labels, centroids));
        const bool converged = (new_labels == labels) && iter > 0;
        labels = std::move(new_labels);
        if (converged) break;
    }

    out.labels = std::move(labels);
    out.centroids = std::move(centroids);
    out.objective = detail::wcss(features, out.labels, out.centroids);
    return out;
}

/// Per-asset clustering features: [trailing Sortino, trailing mean log2
/// return, trailing log2-return stdev], standardized across assets.
inline Eigen::MatrixXd clustering_features(const PriceMatrix& q,
                                           Eigen::Index window, double r_A) {
    const SortinoFeature sf = sortino_features(q, window, r_A);
    const ReturnMatrix rets = log2_returns(q);
    const Eigen::Index total = rets.values.cols();
    const Eigen::Index m = q.asset_count();

    Eigen::MatrixXd feats(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
        double sum = 0.0;
        for (Eigen::Index t = total - window; t < total; ++t)
            sum += rets.values(i, t);
        const double mean = sum / static_cast<double>(window);
        double var = 0.0;
        for (Eigen::Index t = total - window; t < total; ++t) {
            const double d = rets.values(i, t) - mean;
            var += d * d;
        }
        feats(i, 0) = sf.ratios(i);
        feats(i, 1) = mean;
        feats(i, 2) = std::sqrt(var / static_cast<double>(window));
    }

    // standardize each feature across assets; constant features stay zero
    for (Eigen::Index c = 0; c < 3; ++c) {
        const double mu = feats.col(c).mean();
        const double sd = std::sqrt(
            (feats.col(c).array() - mu).square().sum() / static_cast<double>(m));
        if (sd > 0.0)
            feats.col(c) = (feats.col(c).array() - mu) / sd;
        else
            feats.col(c).setZero();
    }
    return feats;
}

/// Marks the cluster with the higher mean Sortino ratio as group 1
/// (high-quality). Ties fall back to higher centroid mean return, then
/// the lower cluster index.
inline GroupMask build_masks(const ClusterAssignment& assignment,
                             const Eigen::VectorXd& sortino) {
    if (assignment.centroids.rows() != 2)
        throw DegenerateFeaturesError("build_masks expects exactly 2 clusters");
    const Eigen::Index m = static_cast<Eigen::Index>(assignment.labels.size());

    double sum[2] = {0.0, 0.0};
    int cnt[2] = {0, 0};
    for (Eigen::Index i = 0; i < m; ++i) {
        const int c = assignment.labels[static_cast<std::size_t>(i)];
        sum[c] += sortino(i);
        ++cnt[c];
    }
    const double mean0 = cnt[0] ? sum[0] / cnt[0] : -std::numeric_limits<double>::max();
    const double mean1 = cnt[1] ? sum[1] / cnt[1] : -std::numeric_limits<double>::max();

    int hi = 0;
    if (mean1 > mean0) {
        hi = 1;
    } else if (mean1 == mean0 && assignment.centroids.cols() > 1) {
        if (assignment.centroids(1, 1) > assignment.centroids(0, 1)) hi = 1;
    }

    GroupMask gm;
    gm.epoch_start = assignment.epoch_start;
    gm.m1 = Eigen::VectorXd::Zero(m);
    gm.m2 = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (assignment.labels[static_cast<std::size_t>(i)] == hi)
            gm.m1(i) = 1.0;
        else
            gm.m2(i) = 1.0;
    }
    return gm;
}

/// Re-clustering fires at every multiple of the cadence, including t = 0.
inline bool recluster_due(Eigen::Index t, Eigen::Index cadence) {
    return t % cadence == 0;
}

}  // namespace portfolio
