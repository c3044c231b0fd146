#include "atlasfuse/clustering.hpp"

#include "atlasfuse/error.hpp"

#include <limits>
#include <random>

namespace atlasfuse {

std::vector<std::size_t> ClusterAssignment::members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == cluster) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

double sq_dist(const Matrix& x, Eigen::Index i, const Matrix& c, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double diff = x(i, d) - c(j, d);
        s += diff * diff;
    }
    return s;
}

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    Matrix centers(static_cast<Eigen::Index>(k), x.cols());
    std::vector<char> chosen(n, 0);

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t idx = first(rng);
    centers.row(0) = x.row(static_cast<Eigen::Index>(idx));
    chosen[idx] = 1;

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(x, static_cast<Eigen::Index>(i), centers, static_cast<Eigen::Index>(c - 1)));
            total += d2[i];
        }
        const double u = unit(rng);
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = u * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) {
                    continue;
                }
                cum += d2[i];
                pick = i;
                if (cum > target) {
                    break;
                }
            }
        } else {
            // Every point coincides with a center; take the first unused one.
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = 1;
        centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    }
    return centers;
}

double inertia_of(const Matrix& x, const std::vector<std::size_t>& labels, const Matrix& centers) {
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        s += sq_dist(x, static_cast<Eigen::Index>(i), centers, static_cast<Eigen::Index>(labels[i]));
    }
    return s;
}

}  // namespace

ClusterAssignment kmeans(const Matrix& features, std::size_t n_clusters, std::uint64_t seed,
                         const KMeansOptions& opts) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (n_clusters < 1) {
        fail(ErrorKind::InvalidArgument, "cluster count must be at least 1");
    }
    if (features.cols() < 1) {
        fail(ErrorKind::InvalidArgument, "features must have at least one column");
    }
    if (n < n_clusters) {
        fail(ErrorKind::TooFewSubjects,
             std::to_string(n) + " subjects cannot fill " + std::to_string(n_clusters) + " clusters");
    }

    std::mt19937_64 rng(seed);
    Matrix centers = plus_plus_seeds(features, n_clusters, rng);

    ClusterAssignment out;
    out.n_clusters = n_clusters;
    std::vector<std::size_t> labels(n, 0);
    std::vector<std::size_t> prev;
    std::vector<double> own_dist(n, 0.0);
    std::vector<std::size_t> counts(n_clusters, 0);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n_clusters; ++j) {
                const double d = sq_dist(features, static_cast<Eigen::Index>(i), centers, static_cast<Eigen::Index>(j));
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            labels[i] = best;
            own_dist[i] = best_d;
            ++counts[best];
        }

        for (std::size_t j = 0; j < n_clusters; ++j) {
            if (counts[j] != 0) {
                continue;
            }
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[labels[i]] > 1 && own_dist[i] > far_d) {
                    far_d = own_dist[i];
                    far = i;
                }
            }
            --counts[labels[far]];
            labels[far] = j;
            counts[j] = 1;
            own_dist[far] = 0.0;
            centers.row(static_cast<Eigen::Index>(j)) = features.row(static_cast<Eigen::Index>(far));
        }

        centers.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            centers.row(static_cast<Eigen::Index>(labels[i])) += features.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t j = 0; j < n_clusters; ++j) {
            centers.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
        }
        out.inertia_history.push_back(inertia_of(features, labels, centers));
        out.iterations = iter + 1;

        if (labels == prev) {
            break;
        }
        prev = labels;
    }

    out.labels = std::move(labels);
    out.inertia = out.inertia_history.back();
    return out;
}

}  // namespace atlasfuse
