#include "atlasfuse/diffusion.hpp"

#include "atlasfuse/clustering.hpp"
#include "atlasfuse/error.hpp"
#include "atlasfuse/topology.hpp"

#include <algorithm>
#include <numeric>

namespace atlasfuse {

std::string to_string(KernelMode mode) {
    switch (mode) {
        case KernelMode::MultiTopology: return "multi";
        case KernelMode::DegreeOnly: return "degree";
        case KernelMode::ClosenessOnly: return "closeness";
        case KernelMode::EigenvectorOnly: return "eigenvector";
    }
    return "unknown";
}

KernelMode parse_kernel_mode(const std::string& name) {
    if (name == "multi") return KernelMode::MultiTopology;
    if (name == "degree") return KernelMode::DegreeOnly;
    if (name == "closeness") return KernelMode::ClosenessOnly;
    if (name == "eigenvector") return KernelMode::EigenvectorOnly;
    fail(ErrorKind::InvalidArgument, "unknown kernel mode '" + name + "'");
}

StatusMatrix status_matrix(const Connectome& x, const NormalizationKernel& kernel) {
    const auto r = static_cast<Eigen::Index>(x.size());
    if (kernel.diag.size() != r) {
        fail(ErrorKind::DimensionMismatch, "kernel length does not match ROI count");
    }
    for (Eigen::Index k = 0; k < r; ++k) {
        if (!(kernel.diag(k) > 0.0)) {
            fail(ErrorKind::SingularKernel, "kernel entry " + std::to_string(k) + " is not positive");
        }
    }
    Matrix p(r, r);
    for (Eigen::Index l = 0; l < r; ++l) {
        for (Eigen::Index k = 0; k < r; ++k) {
            p(k, l) = k == l ? 0.5 : x.weights()(k, l) / (2.0 * kernel.diag(k));
        }
    }
    return {std::move(p)};
}

LocalKernel local_kernel(const Connectome& x, std::size_t q_nn) {
    const std::size_t r = x.size();
    if (q_nn < 1 || q_nn + 1 > r) {
        fail(ErrorKind::InvalidArgument,
             "neighbourhood size " + std::to_string(q_nn) + " outside [1, " + std::to_string(r - 1) + "]");
    }
    const Matrix& w = x.weights();
    LocalKernel out;
    out.q = Matrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    out.neighbors.resize(r);

    std::vector<std::size_t> order(r - 1);
    for (std::size_t k = 0; k < r; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        std::size_t m = 0;
        for (std::size_t l = 0; l < r; ++l) {
            if (l != k) {
                order[m++] = l;
            }
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q_nn), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double wa = w(ki, static_cast<Eigen::Index>(a));
                              const double wb = w(ki, static_cast<Eigen::Index>(b));
                              return wa != wb ? wa > wb : a < b;
                          });
        auto& nb = out.neighbors[k];
        nb.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q_nn));
        std::sort(nb.begin(), nb.end());

        double total = 0.0;
        for (auto l : nb) {
            total += w(ki, static_cast<Eigen::Index>(l));
        }
        if (total > 0.0) {
            for (auto l : nb) {
                out.q(ki, static_cast<Eigen::Index>(l)) = w(ki, static_cast<Eigen::Index>(l)) / total;
            }
        }
    }
    return out;
}

namespace {

/// sym(Q · M · Qᵀ) using only the neighbour entries of Q. Each output entry
/// accumulates over neighbours in ascending index order, which matches a
/// dense ascending loop bit for bit.
Matrix sandwich(const LocalKernel& local, const Matrix& m) {
    const auto r = m.rows();
    Matrix t = Matrix::Zero(r, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        for (auto l : local.neighbors[static_cast<std::size_t>(k)]) {
            const auto li = static_cast<Eigen::Index>(l);
            const double q = local.q(k, li);
            for (Eigen::Index j = 0; j < r; ++j) {
                t(k, j) += q * m(li, j);
            }
        }
    }
    Matrix out = Matrix::Zero(r, r);
    for (Eigen::Index b = 0; b < r; ++b) {
        for (auto l : local.neighbors[static_cast<std::size_t>(b)]) {
            const auto li = static_cast<Eigen::Index>(l);
            out.col(b) += local.q(b, li) * t.col(li);
        }
    }
    Matrix sym = 0.5 * (out + out.transpose());
    return sym;
}

}  // namespace

std::vector<StatusMatrix> cross_diffuse(const std::vector<StatusMatrix>& status, const std::vector<LocalKernel>& local,
                                        std::size_t n_star, std::size_t threads, std::vector<double>* round_norms) {
    const std::size_t n = status.size();
    if (n < 2) {
        fail(ErrorKind::PopulationTooSmall, "cross-diffusion needs at least two subjects");
    }
    if (local.size() != n) {
        fail(ErrorKind::DimensionMismatch, "one local kernel per status matrix required");
    }
    const auto r = status.front().p.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (status[i].p.rows() != r || status[i].p.cols() != r || local[i].q.rows() != r || local[i].q.cols() != r) {
            fail(ErrorKind::DimensionMismatch, "status and local kernels must all be r x r");
        }
    }

    std::vector<StatusMatrix> cur = status;
    std::vector<StatusMatrix> next(n);
    // prefix[i] = Σ_{j<i} P_j and suffix[i] = Σ_{j>i} P_j, so the leave-one-out
    // sum never subtracts and is exact for two subjects.
    std::vector<Matrix> prefix(n), suffix(n);
    const double denom = static_cast<double>(n - 1);

    for (std::size_t round = 0; round < n_star; ++round) {
        prefix[0] = Matrix::Zero(r, r);
        for (std::size_t i = 1; i < n; ++i) {
            prefix[i] = prefix[i - 1] + cur[i - 1].p;
        }
        suffix[n - 1] = Matrix::Zero(r, r);
        for (std::size_t i = n - 1; i-- > 0;) {
            suffix[i] = suffix[i + 1] + cur[i + 1].p;
        }
        parallel_for(n, threads, [&](std::size_t i) {
            const Matrix others = (prefix[i] + suffix[i]) / denom;
            next[i].p = sandwich(local[i], others);
        });
        std::swap(cur, next);
        if (round_norms != nullptr) {
            double total = 0.0;
            for (const auto& s : cur) {
                total += s.p.norm();
            }
            round_norms->push_back(total / static_cast<double>(n));
        }
    }
    return cur;
}

Matrix fuse(const std::vector<StatusMatrix>& status) {
    if (status.empty()) {
        fail(ErrorKind::PopulationTooSmall, "cannot fuse an empty list");
    }
    Matrix sum = status.front().p;
    for (std::size_t i = 1; i < status.size(); ++i) {
        if (status[i].p.rows() != sum.rows() || status[i].p.cols() != sum.cols()) {
            fail(ErrorKind::DimensionMismatch, "status matrices differ in size");
        }
        sum += status[i].p;
    }
    return sum / static_cast<double>(status.size());
}

std::vector<NormalizationKernel> normalization_kernels(const Population& p, KernelMode mode, const AtlasParams& params,
                                                       AtlasDiagnostics* diag) {
    const std::size_t n = p.size();
    std::vector<NormalizationKernel> kernels(n);

    if (mode != KernelMode::MultiTopology) {
        const Centrality which = mode == KernelMode::DegreeOnly      ? Centrality::Degree
                                 : mode == KernelMode::ClosenessOnly ? Centrality::Closeness
                                                                     : Centrality::Eigenvector;
        parallel_for(n, params.threads, [&](std::size_t i) {
            const AvgTopologyMatrix single{normalized_centrality(p.subjects[i], which)};
            kernels[i] = normalization_kernel(1.0, single);
        });
        if (diag != nullptr) {
            diag->subject_weights = Vector::Ones(static_cast<Eigen::Index>(n));
        }
    } else {
        std::vector<AvgTopologyMatrix> topologies(n);
        parallel_for(n, params.threads, [&](std::size_t i) { topologies[i] = avg_topology(p.subjects[i]); });
        const ClusterAssignment clusters = kmeans(stack_features(p), params.n_clusters, params.seed);
        const SubjectWeights w = learn_subject_weights(topologies, clusters, params.lambda, params.sigma);
        for (std::size_t i = 0; i < n; ++i) {
            kernels[i] = normalization_kernel(w.w(static_cast<Eigen::Index>(i)), topologies[i]);
        }
        if (diag != nullptr) {
            diag->clusters = clusters;
            diag->subject_weights = w.w;
        }
    }
    if (diag != nullptr) {
        diag->kernels = kernels;
    }
    return kernels;
}

Atlas estimate_atlas(const Population& p, KernelMode mode, const AtlasParams& params, AtlasDiagnostics* diag) {
    const std::size_t n = p.size();
    if (n < 2) {
        fail(ErrorKind::PopulationTooSmall, "atlas estimation needs at least two subjects");
    }
    if (params.n_star < 1) {
        fail(ErrorKind::InvalidArgument, "at least one diffusion round is required");
    }
    const std::size_t r = p.roi_count();
    if (params.knn < 1 || params.knn + 1 > r) {
        fail(ErrorKind::InvalidArgument,
             "knn " + std::to_string(params.knn) + " outside [1, " + std::to_string(r - 1) + "]");
    }

    const auto kernels = normalization_kernels(p, mode, params, diag);
    std::vector<StatusMatrix> status(n);
    std::vector<LocalKernel> local(n);
    parallel_for(n, params.threads, [&](std::size_t i) {
        status[i] = status_matrix(p.subjects[i], kernels[i]);
        local[i] = local_kernel(p.subjects[i], params.knn);
    });

    std::vector<double>* norms = diag != nullptr ? &diag->round_norms : nullptr;
    const auto diffused = cross_diffuse(status, local, params.n_star, params.threads, norms);

    Atlas atlas;
    atlas.a = fuse(diffused);
    atlas.class_label = p.class_label;
    atlas.mode = mode;
    atlas.iterations = params.n_star;
    return atlas;
}

}  // namespace atlasfuse
