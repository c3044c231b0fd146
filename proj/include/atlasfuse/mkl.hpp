#pragma once

#include "atlasfuse/clustering.hpp"
#include "atlasfuse/core.hpp"
#include "atlasfuse/topology.hpp"

#include <optional>
#include <vector>

namespace atlasfuse {

/// Rank-one RBF Gram s sᵀ over the training subjects, where
/// s(a) = exp(−‖t_a − t_i‖² / (2σ²)) for subject i.
struct BaseKernel {
    Vector profile;  // s
    double trace = 0.0;

    Matrix gram() const { return profile * profile.transpose(); }
};

struct GammaSolution {
    Vector gamma;
    std::vector<int> group_of;  // 0 for label +1, 1 for label −1
    double objective = 0.0;
    std::size_t iterations = 0;
};

struct SubjectWeights {
    Vector w;
};

struct NormalizationKernel {
    Vector diag;
};

/// std::nullopt selects the median heuristic.
using Bandwidth = std::optional<double>;

/// Median of the nonzero pairwise distances ‖t_a − t_b‖; 1 if all vanish.
double median_bandwidth(const std::vector<AvgTopologyMatrix>& topologies);

std::vector<BaseKernel> build_base_kernels(const std::vector<AvgTopologyMatrix>& topologies, Bandwidth sigma);

/// K̂ = (1/n) Σᵢ gramᵢ / traceᵢ.
Matrix combined_kernel(const std::vector<BaseKernel>& kernels);

struct QpOptions {
    double step_tol = 1e-10;
    std::size_t max_iter = 50000;
};

/// Euclidean projection of v onto the probability simplex.
Vector project_to_simplex(const Vector& v);

/// Objective γᵀ Y K̂ Y γ + λ‖γ‖².
double gamma_objective(const Matrix& combined, const std::vector<int>& labels, double lambda, const Vector& gamma);

/// Projected gradient over the product of the two per-label simplices,
/// step 1/L with L = 2(λ_max(K̂) + λ).
GammaSolution solve_gamma(const std::vector<BaseKernel>& kernels, const std::vector<int>& labels, double lambda,
                          const QpOptions& opts = {});
/// Same solve for an explicit K̂.
GammaSolution solve_gamma(const Matrix& combined, const std::vector<int>& labels, double lambda,
                          const QpOptions& opts = {});

/// ‖γ − Π(γ − ∇f/L)‖·L, the projected-gradient norm used as an optimality
/// certificate.
double projected_gradient_norm(const Matrix& combined, const std::vector<int>& labels, double lambda,
                               const Vector& gamma);

/// wᵢ = γᵀ Y (gramᵢ / traceᵢ) Y γ.
Vector compute_weights(const GammaSolution& gamma, const std::vector<BaseKernel>& kernels,
                       const std::vector<int>& labels);

/// One weight per training subject, rescaled to mean one.
///
/// One cluster: all ones. Two clusters: cluster 0 is +1, cluster 1 is −1.
/// More: one-vs-rest per cluster, averaged in cluster order. If every raw
/// weight vanishes (the kernels carry no label information) the result is
/// uniform.
SubjectWeights learn_subject_weights(const std::vector<AvgTopologyMatrix>& topologies,
                                     const ClusterAssignment& clusters, double lambda, Bandwidth sigma);

NormalizationKernel normalization_kernel(double weight, const AvgTopologyMatrix& t);

}  // namespace atlasfuse
