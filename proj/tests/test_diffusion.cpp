#include "atlasfuse/diffusion.hpp"
#include "atlasfuse/error.hpp"
#include "atlasfuse/topology.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace atlasfuse;

namespace {

Population random_population(std::size_t n, std::size_t r, std::uint64_t seed, const std::string& label = "X") {
    std::vector<std::string> ids;
    std::vector<Connectome> nets;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(label + std::to_string(i));
        nets.emplace_back(oracle::random_graph(r, seed * 1000 + i));
    }
    return Population(label, ids, nets);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix naive_sym_sandwich(const Matrix& q, const Matrix& m) {
    const Matrix out = q * m * q.transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

TEST_CASE("status_matrix") {
    const Matrix w = oracle::random_graph(5, 7);
    const Connectome c(w);
    const Vector s = strength(c);
    const StatusMatrix p = status_matrix(c, {s});
    for (Eigen::Index k = 0; k < 5; ++k) {
        CHECK(p.p(k, k) == 0.5);
        CHECK(std::abs(p.p.row(k).sum() - 1.0) <= 1e-12);  // 1/2 off-diagonal plus the 1/2 diagonal
    }

    Matrix x(3, 3);
    x << 0, 0.2, 0.9,  //
        0.2, 0, 0.4,   //
        0.9, 0.4, 0;
    const Vector kd = (Vector(3) << 1.0, 2.0, 4.0).finished();
    const Matrix p3 = status_matrix(Connectome(x), {kd}).p;
    for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index l = 0; l < 3; ++l) CHECK(p3(k, l) == (k == l ? 0.5 : x(k, l) / (2.0 * kd(k))));

    for (double bad : {0.0, -1.0}) {
        Vector z = kd;
        z(1) = bad;
        try {
            status_matrix(Connectome(x), {z});
            FAIL("expected SingularKernel");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularKernel);
        }
    }
}

TEST_CASE("local_kernel") {
    const Matrix w = oracle::random_graph(3, 1);
    const LocalKernel full = local_kernel(Connectome(w), 2);
    for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(std::abs(full.q.row(k).sum() - 1.0) <= 1e-12);
        CHECK(full.q(k, k) == 0.0);
    }

    Matrix iso = path_graph(4);
    iso.row(3).setZero();
    iso.col(3).setZero();
    iso(0, 1) = iso(1, 0) = 1.0;
    iso(1, 2) = iso(2, 1) = 1.0;
    iso(2, 3) = iso(3, 2) = 0.0;
    CHECK(local_kernel(Connectome(iso), 2).q.row(3).isZero(0.0));

    // Exhaustive oracle: full stable sort of each row.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix x = oracle::random_graph(5, 900 + seed, 0.8);
        const LocalKernel lk = local_kernel(Connectome(x), 2);
        for (Eigen::Index k = 0; k < 5; ++k) {
            std::vector<std::size_t> cand;
            for (std::size_t l = 0; l < 5; ++l)
                if (static_cast<Eigen::Index>(l) != k) cand.push_back(l);
            std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
                return x(k, static_cast<Eigen::Index>(a)) > x(k, static_cast<Eigen::Index>(b));
            });
            std::vector<std::size_t> expect(cand.begin(), cand.begin() + 2);
            std::sort(expect.begin(), expect.end());
            CHECK(lk.neighbors[static_cast<std::size_t>(k)] == expect);
            const double s = x(k, static_cast<Eigen::Index>(expect[0])) + x(k, static_cast<Eigen::Index>(expect[1]));
            for (std::size_t l = 0; l < 5; ++l) {
                const bool in = l == expect[0] || l == expect[1];
                const double want = in && s > 0.0 ? x(k, static_cast<Eigen::Index>(l)) / s : 0.0;
                CHECK(lk.q(k, static_cast<Eigen::Index>(l)) == want);
            }
        }
    }

    // Ties go to the smaller index.
    const LocalKernel tie = local_kernel(Connectome(complete_graph(5)), 2);
    CHECK(tie.neighbors[0] == std::vector<std::size_t>{1, 2});
    CHECK(tie.neighbors[3] == std::vector<std::size_t>{0, 1});

    CHECK_THROWS_AS(local_kernel(Connectome(w), 0), Error);
    CHECK_THROWS_AS(local_kernel(Connectome(w), 3), Error);
}

TEST_CASE("cross_diffuse: zero rounds and two-subject closed form") {
    const Connectome a(oracle::random_graph(6, 1)), b(oracle::random_graph(6, 2));
    const std::vector<StatusMatrix> st{status_matrix(a, {strength(a)}), status_matrix(b, {strength(b)})};
    const std::vector<LocalKernel> lk{local_kernel(a, 3), local_kernel(b, 3)};

    const auto same = cross_diffuse(st, lk, 0);
    CHECK(same[0].p == st[0].p);
    CHECK(same[1].p == st[1].p);

    const auto one = cross_diffuse(st, lk, 1);
    CHECK(one[0].p == naive_sym_sandwich(lk[0].q, st[1].p));
    CHECK(one[1].p == naive_sym_sandwich(lk[1].q, st[0].p));

    try {
        cross_diffuse({st[0]}, {lk[0]}, 1);
        FAIL("expected PopulationTooSmall");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PopulationTooSmall);
    }
}

TEST_CASE("cross_diffuse matches the straight-line reference on a 3x3 toy") {
    std::vector<Matrix> nets(3, Matrix::Zero(3, 3));
    nets[0] << 0, 0.3, 0.8, 0.3, 0, 0.5, 0.8, 0.5, 0;
    nets[1] << 0, 0.6, 0.1, 0.6, 0, 0.9, 0.1, 0.9, 0;
    nets[2] << 0, 0.2, 0.4, 0.2, 0, 0.7, 0.4, 0.7, 0;
    const std::vector<Vector> norm{(Vector(3) << 1.0, 0.5, 2.0).finished(), (Vector(3) << 0.8, 1.1, 0.3).finished(),
                                   (Vector(3) << 0.25, 0.6, 1.5).finished()};
    std::vector<StatusMatrix> st;
    std::vector<LocalKernel> lk;
    for (std::size_t i = 0; i < 3; ++i) {
        st.push_back(status_matrix(Connectome(nets[i]), {norm[i]}));
        lk.push_back(local_kernel(Connectome(nets[i]), 1));
    }
    std::vector<double> norms;
    const auto out = cross_diffuse(st, lk, 2, 1, &norms);
    CHECK(max_abs(fuse(out) - oracle::reference_snf(nets, norm, 1, 2)) <= 1e-12);
    CHECK(norms.size() == 2);
    for (const auto& s : out) CHECK(max_abs(s.p - s.p.transpose()) <= 1e-12);
}

TEST_CASE("fuse") {
    const Matrix m = oracle::random_graph(4, 3);
    CHECK(fuse({{m}}) == m);
    const Matrix flipped = (-m).array() + 1.0;
    CHECK(max_abs(fuse({{m}, {flipped}}) - Matrix::Constant(4, 4, 0.5)) <= 1e-15);
    const Matrix a = oracle::random_graph(4, 4), b = oracle::random_graph(4, 5), c = oracle::random_graph(4, 6);
    const Matrix f = fuse({{a}, {b}, {c}});
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(f(i, j) - (a(i, j) + b(i, j) + c(i, j)) / 3.0) <= 1e-15);
    CHECK_THROWS_AS(fuse({}), Error);
}

TEST_CASE("estimate_atlas on identical subjects follows the shared trajectory") {
    const Matrix w = oracle::random_graph(6, 33);
    const Population p("same", {"a", "b", "c", "d"}, std::vector<Connectome>(4, Connectome(w)));
    AtlasParams params;
    params.knn = 3;
    params.n_star = 4;
    params.n_clusters = 2;
    for (KernelMode mode : {KernelMode::MultiTopology, KernelMode::DegreeOnly, KernelMode::ClosenessOnly,
                            KernelMode::EigenvectorOnly}) {
        AtlasDiagnostics diag;
        const Atlas atlas = estimate_atlas(p, mode, params, &diag);
        CHECK(diag.subject_weights == Vector::Ones(4));

        Matrix traj = status_matrix(Connectome(w), diag.kernels[0]).p;
        const Matrix q = local_kernel(Connectome(w), 3).q;
        for (std::size_t t = 0; t < params.n_star; ++t) traj = naive_sym_sandwich(q, traj);
        CHECK(max_abs(atlas.a - traj) <= 1e-12);
        CHECK(atlas.mode == mode);
        CHECK(atlas.iterations == 4);
    }
}

TEST_CASE("DegreeOnly equals the classic SNF reference") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Population p = random_population(5, 7, 60 + seed);
        AtlasParams params;
        params.knn = 3;
        params.n_star = 6;
        std::vector<Matrix> nets;
        std::vector<Vector> norm;
        for (const auto& c : p.subjects) {
            nets.push_back(c.weights());
            Vector deg = c.weights().rowwise().sum();
            norm.push_back(deg / deg.maxCoeff());
        }
        const Atlas atlas = estimate_atlas(p, KernelMode::DegreeOnly, params);
        CHECK(max_abs(atlas.a - oracle::reference_snf(nets, norm, 3, 6)) <= 1e-10);
    }
}

TEST_CASE("estimate_atlas properties") {
    const Population p = random_population(6, 8, 5);
    AtlasParams params;
    params.knn = 4;
    params.n_star = 5;
    params.seed = 11;

    const Atlas first = estimate_atlas(p, KernelMode::MultiTopology, params);
    const Atlas again = estimate_atlas(p, KernelMode::MultiTopology, params);
    CHECK(first.a == again.a);
    CHECK(max_abs(first.a - first.a.transpose()) <= 1e-10);
    CHECK(first.a.minCoeff() >= 0.0);
    CHECK(first.a.allFinite());

    AtlasParams par = params;
    par.threads = 4;
    CHECK(estimate_atlas(p, KernelMode::MultiTopology, par).a == first.a);
    CHECK(estimate_atlas(p, KernelMode::ClosenessOnly, par).a == estimate_atlas(p, KernelMode::ClosenessOnly, params).a);

    AtlasParams zero = params;
    zero.n_star = 0;
    CHECK_THROWS_AS(estimate_atlas(p, KernelMode::DegreeOnly, zero), Error);
    AtlasParams wide = params;
    wide.knn = 8;
    CHECK_THROWS_AS(estimate_atlas(p, KernelMode::DegreeOnly, wide), Error);
    try {
        estimate_atlas(Population("one", {"a"}, {p.subjects[0]}), KernelMode::DegreeOnly, params);
        FAIL("expected PopulationTooSmall");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PopulationTooSmall);
    }
}

TEST_CASE("cross_diffuse is order equivariant and symmetric") {
    const Population p = random_population(5, 7, 77);
    std::vector<StatusMatrix> st;
    std::vector<LocalKernel> lk;
    for (const auto& c : p.subjects) {
        st.push_back(status_matrix(c, {normalized_centrality(c, Centrality::Eigenvector)}));
        lk.push_back(local_kernel(c, 3));
    }
    const auto base = cross_diffuse(st, lk, 5);
    for (const auto& s : base) {
        CHECK(max_abs(s.p - s.p.transpose()) <= 1e-12);
        CHECK(s.p.minCoeff() >= 0.0);
    }

    const std::vector<std::size_t> pi{3, 0, 4, 1, 2};
    std::vector<StatusMatrix> pst(5);
    std::vector<LocalKernel> plk(5);
    for (std::size_t i = 0; i < 5; ++i) {
        pst[pi[i]] = st[i];
        plk[pi[i]] = lk[i];
    }
    const auto permuted = cross_diffuse(pst, plk, 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(max_abs(permuted[pi[i]].p - base[i].p) <= 1e-12);

    const auto threaded = cross_diffuse(st, lk, 5, 3);
    for (std::size_t i = 0; i < 5; ++i) CHECK(threaded[i].p == base[i].p);
}

TEST_CASE("kernel mode names") {
    for (KernelMode m : {KernelMode::MultiTopology, KernelMode::DegreeOnly, KernelMode::ClosenessOnly,
                         KernelMode::EigenvectorOnly}) {
        CHECK(parse_kernel_mode(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_kernel_mode("betweenness"), Error);
}
