#include "atlasfuse/topology.hpp"

#include "atlasfuse/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace atlasfuse {

Vector strength(const Connectome& c) {
    // Diagonal is zero by invariant, so the full row sum is the k≠n sum.
    return c.weights().rowwise().sum();
}

Vector eigenvector_centrality(const Connectome& c, const PowerIterationOptions& opts) {
    const Matrix& a = c.weights();
    const auto r = a.rows();
    const Vector deg = a.rowwise().sum();
    const double max_deg = r == 0 ? 0.0 : deg.maxCoeff();
    if (!(max_deg > 0.0)) {
        fail(ErrorKind::DegenerateGraph, "eigenvector centrality needs at least one positive edge");
    }
    const double shift = 0.5 * max_deg;

    Vector x = Vector::Constant(r, 1.0 / std::sqrt(static_cast<double>(r)));
    Vector ax(r);
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        ax.noalias() = a * x;
        const double lambda = x.dot(ax);
        if (lambda > 0.0 && (ax - lambda * x).norm() <= opts.tol * lambda) {
            return x.cwiseAbs();
        }
        x = ax + shift * x;
        x /= x.norm();
    }
    fail(ErrorKind::ConvergenceFailure,
         "power iteration did not converge in " + std::to_string(opts.max_iter) + " iterations");
}

Matrix shortest_path_lengths(const Connectome& c) {
    const auto r = static_cast<std::size_t>(c.size());
    const double inf = std::numeric_limits<double>::infinity();
    const Matrix& w = c.weights();
    Matrix dist = Matrix::Constant(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), inf);

    std::vector<double> d(r);
    std::vector<char> done(r);
    for (std::size_t src = 0; src < r; ++src) {
        std::fill(d.begin(), d.end(), inf);
        std::fill(done.begin(), done.end(), 0);
        d[src] = 0.0;
        for (std::size_t step = 0; step < r; ++step) {
            std::size_t u = r;
            double best = inf;
            for (std::size_t v = 0; v < r; ++v) {
                if (!done[v] && d[v] < best) {
                    best = d[v];
                    u = v;
                }
            }
            if (u == r) {
                break;  // remaining nodes unreachable
            }
            done[u] = 1;
            for (std::size_t v = 0; v < r; ++v) {
                const double wt = w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
                if (done[v] || !(wt > 0.0)) {
                    continue;
                }
                const double cand = d[u] + 1.0 / wt;
                if (cand < d[v]) {
                    d[v] = cand;
                }
            }
        }
        for (std::size_t v = 0; v < r; ++v) {
            dist(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(v)) = d[v];
        }
    }
    return dist;
}

Vector closeness_centrality(const Connectome& c) {
    const Matrix dist = shortest_path_lengths(c);
    const auto r = dist.rows();
    Vector out(r);
    for (Eigen::Index n = 0; n < r; ++n) {
        double total = 0.0;
        for (Eigen::Index k = 0; k < r; ++k) {
            if (k != n) {
                total += dist(n, k);
            }
        }
        out(n) = std::isfinite(total) && total > 0.0 ? static_cast<double>(r - 1) / total : 0.0;
    }
    return out;
}

CentralityProfile centrality_profile(const Connectome& c, const PowerIterationOptions& opts) {
    return {strength(c), eigenvector_centrality(c, opts), closeness_centrality(c)};
}

Vector max_normalized(const Vector& v) {
    const double m = v.size() == 0 ? 0.0 : v.maxCoeff();
    if (!(m > 0.0)) {
        throw DegenerateNodeError(0, "centrality vector is identically zero");
    }
    return v / m;
}

Vector normalized_centrality(const Connectome& c, Centrality which, const PowerIterationOptions& opts) {
    switch (which) {
        case Centrality::Degree: return max_normalized(strength(c));
        case Centrality::Eigenvector: return max_normalized(eigenvector_centrality(c, opts));
        case Centrality::Closeness: return max_normalized(closeness_centrality(c));
    }
    fail(ErrorKind::InvalidArgument, "unknown centrality");
}

TopoTensor topo_tensor(const CentralityProfile& profile) {
    return {{Matrix(max_normalized(profile.degree).asDiagonal()),
             Matrix(max_normalized(profile.eigenvector).asDiagonal()),
             Matrix(max_normalized(profile.closeness).asDiagonal())}};
}

AvgTopologyMatrix avg_topology(const CentralityProfile& profile) {
    const Vector fused = (max_normalized(profile.degree) + max_normalized(profile.eigenvector) +
                          max_normalized(profile.closeness)) /
                         3.0;
    for (Eigen::Index k = 0; k < fused.size(); ++k) {
        if (!(fused(k) > 1e-12)) {
            throw DegenerateNodeError(static_cast<std::size_t>(k), "average topology entry vanishes");
        }
    }
    return {fused};
}

AvgTopologyMatrix avg_topology(const Connectome& c, const PowerIterationOptions& opts) {
    return avg_topology(centrality_profile(c, opts));
}

}  // namespace atlasfuse
