#pragma once

#include "atlasfuse/core.hpp"
#include "atlasfuse/mkl.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace atlasfuse {

enum class KernelMode { MultiTopology, DegreeOnly, ClosenessOnly, EigenvectorOnly };

/// CLI spelling: multi, degree, closeness, eigenvector.
std::string to_string(KernelMode mode);
KernelMode parse_kernel_mode(const std::string& name);

struct StatusMatrix {
    Matrix p;
};

/// KNN-sparsified, row-normalized similarity. `neighbors[k]` is sorted by
/// ROI index; q(k,l) is zero outside it.
struct LocalKernel {
    Matrix q;
    std::vector<std::vector<std::size_t>> neighbors;
};

struct Atlas {
    Matrix a;
    std::string class_label;
    KernelMode mode = KernelMode::MultiTopology;
    std::size_t iterations = 0;
};

struct AtlasParams {
    std::size_t n_star = 20;
    std::size_t knn = 25;
    std::size_t n_clusters = 3;
    double lambda = 0.1;
    Bandwidth sigma;  // median heuristic when empty
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Intermediate quantities of one atlas estimate, kept for inspection.
struct AtlasDiagnostics {
    std::optional<ClusterAssignment> clusters;
    Vector subject_weights;
    std::vector<NormalizationKernel> kernels;
    /// Mean ‖Pᵢ‖_F over subjects after each diffusion round.
    std::vector<double> round_norms;
};

/// p(k,l) = x(k,l) / (2·kernel(k)) off the diagonal, exactly 1/2 on it.
StatusMatrix status_matrix(const Connectome& x, const NormalizationKernel& kernel);

/// Keeps the q_nn strongest connections of every row (self excluded, ties to
/// the smaller index) and normalizes them to sum to one. Rows whose kept
/// weights sum to zero stay zero.
LocalKernel local_kernel(const Connectome& x, std::size_t q_nn);

/// n_star synchronous rounds of Pᵢ ← sym(Qᵢ · mean_{j≠i} Pⱼ · Qᵢᵀ), with
/// sym(M) = (M + Mᵀ)/2. Round t reads only round t−1 state.
std::vector<StatusMatrix> cross_diffuse(const std::vector<StatusMatrix>& status, const std::vector<LocalKernel>& local,
                                        std::size_t n_star, std::size_t threads = 1,
                                        std::vector<double>* round_norms = nullptr);

/// Entrywise mean.
Matrix fuse(const std::vector<StatusMatrix>& status);

/// Per-subject normalization kernels for the given mode. MultiTopology
/// clusters the class, learns subject weights and scales each average
/// topology; the single-centrality modes use w ≡ 1 and that centrality's
/// max-normalized vector.
std::vector<NormalizationKernel> normalization_kernels(const Population& p, KernelMode mode, const AtlasParams& params,
                                                       AtlasDiagnostics* diag = nullptr);

Atlas estimate_atlas(const Population& p, KernelMode mode, const AtlasParams& params,
                     AtlasDiagnostics* diag = nullptr);

}  // namespace atlasfuse
