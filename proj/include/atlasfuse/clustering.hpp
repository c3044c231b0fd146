#pragma once

#include "atlasfuse/core.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace atlasfuse {

struct ClusterAssignment {
    std::vector<std::size_t> labels;
    std::size_t n_clusters = 0;
    double inertia = 0.0;
    /// Inertia after each Lloyd centroid update, in iteration order.
    std::vector<double> inertia_history;
    std::size_t iterations = 0;

    std::vector<std::size_t> members(std::size_t cluster) const;
};

struct KMeansOptions {
    std::size_t max_iter = 300;
};

/// k-means with k-means++ seeding over the rows of `features`.
///
/// Deterministic in (features, n_clusters, seed). Assignment ties go to the
/// lowest cluster index. A cluster left empty after an assignment step is
/// reseeded with the point farthest from its centroid (taken from a cluster
/// that keeps at least one member; lowest index on ties).
ClusterAssignment kmeans(const Matrix& features, std::size_t n_clusters, std::uint64_t seed,
                         const KMeansOptions& opts = {});

}  // namespace atlasfuse
