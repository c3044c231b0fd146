#include "atlasfuse/mkl.hpp"

#include "atlasfuse/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>

namespace atlasfuse {

double median_bandwidth(const std::vector<AvgTopologyMatrix>& topologies) {
    std::vector<double> dists;
    for (std::size_t a = 0; a < topologies.size(); ++a) {
        for (std::size_t b = a + 1; b < topologies.size(); ++b) {
            const double d = (topologies[a].diag - topologies[b].diag).norm();
            if (d > 0.0) {
                dists.push_back(d);
            }
        }
    }
    if (dists.empty()) {
        return 1.0;
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    return m % 2 == 1 ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
}

std::vector<BaseKernel> build_base_kernels(const std::vector<AvgTopologyMatrix>& topologies, Bandwidth sigma) {
    const std::size_t n = topologies.size();
    if (n < 2) {
        fail(ErrorKind::TooFewSubjects, "base kernels need at least two training subjects");
    }
    const auto r = topologies.front().diag.size();
    for (const auto& t : topologies) {
        if (t.diag.size() != r) {
            fail(ErrorKind::DimensionMismatch, "topology vectors differ in length");
        }
    }
    const double bw = sigma ? *sigma : median_bandwidth(topologies);
    if (!(bw > 0.0) || !std::isfinite(bw)) {
        fail(ErrorKind::InvalidBandwidth, "RBF bandwidth must be positive, got " + std::to_string(bw));
    }
    const double denom = 2.0 * bw * bw;

    std::vector<BaseKernel> kernels(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector s(static_cast<Eigen::Index>(n));
        for (std::size_t a = 0; a < n; ++a) {
            s(static_cast<Eigen::Index>(a)) = std::exp(-(topologies[a].diag - topologies[i].diag).squaredNorm() / denom);
        }
        kernels[i].trace = s.squaredNorm();
        kernels[i].profile = std::move(s);
    }
    return kernels;
}

Matrix combined_kernel(const std::vector<BaseKernel>& kernels) {
    const auto n = static_cast<Eigen::Index>(kernels.size());
    Matrix k = Matrix::Zero(n, n);
    for (const auto& bk : kernels) {
        k.noalias() += (bk.profile * bk.profile.transpose()) / bk.trace;
    }
    return k / static_cast<double>(n);
}

Vector project_to_simplex(const Vector& v) {
    // Sort-based projection: find the threshold θ with Σ max(vᵢ − θ, 0) = 1.
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

namespace {

struct Groups {
    std::vector<std::vector<Eigen::Index>> members{2};
    std::vector<int> group_of;
};

Groups split_groups(const std::vector<int>& labels) {
    Groups g;
    g.group_of.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1 && labels[i] != -1) {
            fail(ErrorKind::InvalidArgument, "labels must be +1 or -1");
        }
        const int grp = labels[i] == 1 ? 0 : 1;
        g.group_of[i] = grp;
        g.members[static_cast<std::size_t>(grp)].push_back(static_cast<Eigen::Index>(i));
    }
    if (g.members[0].empty() || g.members[1].empty()) {
        fail(ErrorKind::DegenerateLabels, "both label groups must be non-empty");
    }
    return g;
}

Vector project_groups(const Vector& v, const Groups& g) {
    Vector out(v.size());
    for (const auto& idx : g.members) {
        Vector part(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            part(static_cast<Eigen::Index>(j)) = v(idx[j]);
        }
        const Vector proj = project_to_simplex(part);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out(idx[j]) = proj(static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

Matrix signed_hessian(const Matrix& combined, const std::vector<int>& labels, double lambda) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i];
    }
    Matrix h = y.asDiagonal() * combined * y.asDiagonal();
    h.diagonal().array() += lambda;
    return h;
}

double lipschitz(const Matrix& combined, double lambda) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(combined, Eigen::EigenvaluesOnly);
    return 2.0 * (std::max(es.eigenvalues().maxCoeff(), 0.0) + lambda);
}

}  // namespace

double gamma_objective(const Matrix& combined, const std::vector<int>& labels, double lambda, const Vector& gamma) {
    return gamma.dot(signed_hessian(combined, labels, lambda) * gamma);
}

double projected_gradient_norm(const Matrix& combined, const std::vector<int>& labels, double lambda,
                               const Vector& gamma) {
    const Groups g = split_groups(labels);
    const Matrix h = signed_hessian(combined, labels, lambda);
    const double lip = lipschitz(combined, lambda);
    if (!(lip > 0.0)) {
        return 0.0;
    }
    const Vector step = project_groups(gamma - (2.0 * h * gamma) / lip, g);
    return lip * (gamma - step).norm();
}

GammaSolution solve_gamma(const std::vector<BaseKernel>& kernels, const std::vector<int>& labels, double lambda,
                          const QpOptions& opts) {
    if (kernels.size() != labels.size()) {
        fail(ErrorKind::DimensionMismatch, "one label per kernel required");
    }
    return solve_gamma(combined_kernel(kernels), labels, lambda, opts);
}

GammaSolution solve_gamma(const Matrix& combined, const std::vector<int>& labels, double lambda,
                          const QpOptions& opts) {
    if (combined.rows() != combined.cols() || static_cast<std::size_t>(combined.rows()) != labels.size()) {
        fail(ErrorKind::DimensionMismatch, "combined kernel must be n x n with one label per row");
    }
    if (!(lambda >= 0.0)) {
        fail(ErrorKind::InvalidArgument, "lambda must be nonnegative");
    }
    const Groups g = split_groups(labels);
    const Matrix h = signed_hessian(combined, labels, lambda);
    const double lip = lipschitz(combined, lambda);

    const auto n = static_cast<Eigen::Index>(labels.size());
    Vector gamma(n);
    for (const auto& idx : g.members) {
        for (auto i : idx) {
            gamma(i) = 1.0 / static_cast<double>(idx.size());
        }
    }

    GammaSolution sol;
    sol.group_of = g.group_of;
    if (lip > 0.0) {
        for (std::size_t it = 0; it < opts.max_iter; ++it) {
            const Vector next = project_groups(gamma - (2.0 * h * gamma) / lip, g);
            const double change = (next - gamma).cwiseAbs().maxCoeff();
            gamma = next;
            sol.iterations = it + 1;
            if (change <= opts.step_tol) {
                break;
            }
        }
    }
    sol.objective = gamma.dot(h * gamma);
    sol.gamma = std::move(gamma);
    return sol;
}

Vector compute_weights(const GammaSolution& gamma, const std::vector<BaseKernel>& kernels,
                       const std::vector<int>& labels) {
    const auto n = static_cast<Eigen::Index>(kernels.size());
    if (gamma.gamma.size() != n || static_cast<Eigen::Index>(labels.size()) != n) {
        fail(ErrorKind::DimensionMismatch, "gamma, kernels and labels must agree in length");
    }
    Vector yg(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        yg(a) = labels[static_cast<std::size_t>(a)] * gamma.gamma(a);
    }
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& k = kernels[static_cast<std::size_t>(i)];
        const double proj = yg.dot(k.profile);
        w(i) = proj * proj / k.trace;
    }
    return w;
}

SubjectWeights learn_subject_weights(const std::vector<AvgTopologyMatrix>& topologies,
                                     const ClusterAssignment& clusters, double lambda, Bandwidth sigma) {
    const std::size_t n = topologies.size();
    if (n < 2) {
        fail(ErrorKind::TooFewSubjects, "subject weights need at least two training subjects");
    }
    if (clusters.labels.size() != n) {
        fail(ErrorKind::DimensionMismatch, "cluster labels do not match subject count");
    }
    const auto ni = static_cast<Eigen::Index>(n);
    if (clusters.n_clusters <= 1) {
        return {Vector::Ones(ni)};
    }

    const auto kernels = build_base_kernels(topologies, sigma);
    Vector total = Vector::Zero(ni);
    auto solve_round = [&](const std::vector<int>& y) {
        const GammaSolution sol = solve_gamma(kernels, y, lambda);
        return compute_weights(sol, kernels, y);
    };

    if (clusters.n_clusters == 2) {
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = clusters.labels[i] == 0 ? 1 : -1;
        }
        total = solve_round(y);
    } else {
        for (std::size_t j = 0; j < clusters.n_clusters; ++j) {
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = clusters.labels[i] == j ? 1 : -1;
            }
            total += solve_round(y);
        }
        total /= static_cast<double>(clusters.n_clusters);
    }

    const double sum = total.sum();
    if (!(sum > 1e-12 * static_cast<double>(n))) {
        return {Vector::Ones(ni)};
    }
    return {total * (static_cast<double>(n) / sum)};
}

NormalizationKernel normalization_kernel(double weight, const AvgTopologyMatrix& t) {
    if (!(weight > 1e-12)) {
        fail(ErrorKind::VanishingWeight, "subject weight " + std::to_string(weight) + " is too small to invert");
    }
    return {weight * t.diag};
}

}  // namespace atlasfuse
