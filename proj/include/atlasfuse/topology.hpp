#pragma once

#include "atlasfuse/core.hpp"

#include <array>
#include <cstddef>

namespace atlasfuse {

enum class Centrality { Degree, Eigenvector, Closeness };

struct CentralityProfile {
    Vector degree;
    Vector eigenvector;
    Vector closeness;
};

/// Three diagonal frontal views (degree, eigenvector, closeness), each the
/// max-normalized centrality vector embedded on the diagonal.
struct TopoTensor {
    std::array<Matrix, 3> views;
};

/// Diagonal of the fused average topological matrix; every entry in (0, 1].
struct AvgTopologyMatrix {
    Vector diag;

    Matrix as_matrix() const { return diag.asDiagonal(); }
};

struct PowerIterationOptions {
    double tol = 1e-10;
    std::size_t max_iter = 10000;
};

/// Weighted degree: out(n) = Σ_{k≠n} w(n,k).
Vector strength(const Connectome& c);

/// Unit-norm nonnegative Perron vector of the weight matrix.
///
/// Runs power iteration on A + αI from the uniform vector, with α set to
/// half the largest strength. The shift leaves eigenvectors untouched but
/// makes the Perron root strictly dominant in magnitude, so bipartite graphs
/// (where A alone has eigenvalues ±λ₁) still converge. Stops once
/// ‖A·x − λ·x‖₂ ≤ tol·λ with λ = xᵀAx.
///
/// Throws DegenerateGraph on an edgeless graph and ConvergenceFailure if the
/// residual bound is not met within max_iter iterations.
Vector eigenvector_centrality(const Connectome& c, const PowerIterationOptions& opts = {});

/// out(n) = (r−1) / Σ_{k≠n} l(n,k) with l the Dijkstra distance over edge
/// lengths 1/w. Nodes that cannot reach every other node get 0.
Vector closeness_centrality(const Connectome& c);

/// All-pairs shortest path lengths under 1/w edge lengths (inf when
/// unreachable). Dense O(r²) Dijkstra from every source.
Matrix shortest_path_lengths(const Connectome& c);

CentralityProfile centrality_profile(const Connectome& c, const PowerIterationOptions& opts = {});

/// Centrality divided by its maximum entry. Throws DegenerateNode when the
/// vector is identically zero.
Vector max_normalized(const Vector& v);

Vector normalized_centrality(const Connectome& c, Centrality which, const PowerIterationOptions& opts = {});

TopoTensor topo_tensor(const CentralityProfile& profile);

/// Mean of the three max-normalized centralities. Throws DegenerateNode if a
/// centrality vector is identically zero or any fused entry is ≤ 1e-12.
AvgTopologyMatrix avg_topology(const Connectome& c, const PowerIterationOptions& opts = {});
AvgTopologyMatrix avg_topology(const CentralityProfile& profile);

}  // namespace atlasfuse
