#include "atlasfuse/core.hpp"
#include "atlasfuse/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <atomic>
#include <fstream>

using namespace atlasfuse;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("load_connectome: zeros, symmetric and negative inputs") {
    TempDir dir("core_load");
    write_text(dir.path / "z.csv", "0,0,0\n0,0,0\n0,0,0\n");
    const auto z = load_connectome(dir.path / "z.csv");
    CHECK(z.size() == 3);
    CHECK(z.weights().isZero(0.0));

    write_text(dir.path / "s.csv", "0,1,0\n1,0,0\n0,0,0\n");
    const auto s = load_connectome(dir.path / "s.csv");
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
    CHECK(s.weights().sum() == 2.0);

    write_text(dir.path / "n.csv", "0,-0.4,0\n-0.4,0,0\n0,0,0\n");
    const auto n = load_connectome(dir.path / "n.csv");
    CHECK(n(0, 1) == 0.4);
    CHECK(n(1, 0) == 0.4);
}

TEST_CASE("load_connectome: repairs asymmetry and diagonal") {
    TempDir dir("core_repair");
    write_text(dir.path / "a.csv", "5, 0.2, 0.4\n0.4, 7, 1\n0.4, 1, 9\n");
    const auto c = load_connectome(dir.path / "a.csv");
    CHECK(c(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(c(1, 0) == c(0, 1));
    CHECK(c(0, 0) == 0.0);
    CHECK(c(2, 2) == 0.0);
}

TEST_CASE("load_connectome: error paths") {
    TempDir dir("core_errors");
    write_text(dir.path / "rect.csv", "0,1,2\n1,0,2\n");
    CHECK_THROWS_AS(load_connectome(dir.path / "rect.csv"), Error);
    write_text(dir.path / "nan.csv", "0,x,0\n1,0,0\n0,0,0\n");
    try {
        load_connectome(dir.path / "nan.csv");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
    }
    write_text(dir.path / "small.csv", "0,1\n1,0\n");
    try {
        load_connectome(dir.path / "small.csv");
        FAIL("expected r < 3 rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    write_text(dir.path / "ragged.csv", "0,1,2\n1,0\n2,0,0\n");
    CHECK_THROWS_AS(load_connectome(dir.path / "ragged.csv"), Error);
    CHECK_THROWS_AS(load_connectome(dir.path / "missing.csv"), Error);
}

TEST_CASE("write/load round-trips bit-exactly") {
    TempDir dir("core_roundtrip");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix m = oracle::random_graph(7, seed, 0.7, 1e-9, 3.0);
        m(0, 1) = m(1, 0) = 1.0 / 3.0;
        const Connectome c(m);
        write_connectome(dir.path / "c.csv", c);
        const auto back = load_connectome(dir.path / "c.csv");
        CHECK(back.weights() == c.weights());
    }
}

TEST_CASE("vectorize: definition and round-trip") {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 1) = m(1, 0) = 0.1;
    m(0, 2) = m(2, 0) = 0.2;
    m(1, 2) = m(2, 1) = 0.3;
    const auto v = vectorize(Connectome(m));
    REQUIRE(v.size() == 3);
    CHECK(v(0) == 0.1);
    CHECK(v(1) == 0.2);
    CHECK(v(2) == 0.3);

    CHECK(vectorize(Connectome(Matrix::Zero(4, 4))) == Vector::Zero(6));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Connectome c(oracle::random_graph(3 + seed % 6, seed, 0.6));
        CHECK(devectorize(vectorize(c)).weights() == c.weights());
    }
    CHECK_THROWS_AS(devectorize(Vector::Zero(4)), Error);
}

TEST_CASE("stack_features: rows follow subject order") {
    std::vector<Connectome> nets;
    for (std::uint64_t s = 0; s < 3; ++s) nets.emplace_back(oracle::random_graph(3, 100 + s));
    const Population p("X", {"a", "b", "c"}, nets);
    const Matrix f = stack_features(p);
    REQUIRE(f.rows() == 3);
    REQUIRE(f.cols() == 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        // Per-row oracle: read the upper triangle directly.
        const Matrix& w = nets[static_cast<std::size_t>(i)].weights();
        CHECK(f(i, 0) == w(0, 1));
        CHECK(f(i, 1) == w(0, 2));
        CHECK(f(i, 2) == w(1, 2));
    }

    const Population single("X", {"a"}, {nets[0]});
    CHECK(stack_features(single).row(0).transpose() == vectorize(nets[0]));
    const Population twins("X", {"a", "b"}, {nets[1], nets[1]});
    const Matrix t = stack_features(twins);
    CHECK(t.row(0) == t.row(1));
}

TEST_CASE("Population and Connectome invariants are enforced") {
    Matrix asym = Matrix::Zero(3, 3);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(Connectome{asym}, Error);
    Matrix neg = Matrix::Zero(3, 3);
    neg(0, 1) = neg(1, 0) = -1.0;
    CHECK_THROWS_AS(Connectome{neg}, Error);

    const Connectome a(Matrix::Zero(3, 3));
    const Connectome b(Matrix::Zero(4, 4));
    CHECK_THROWS_AS(Population("X", {"a", "b"}, {a, b}), Error);
    CHECK_THROWS_AS(Population("X", {"a", "a"}, {a, a}), Error);
    CHECK_THROWS_AS(Population("X", {}, {}), Error);
}

TEST_CASE("manifest: relative paths, labels, digest") {
    TempDir dir("core_manifest");
    std::filesystem::create_directories(dir.path / "m");
    write_connectome(dir.path / "m" / "s1.csv", Connectome(oracle::random_graph(4, 1)));
    write_connectome(dir.path / "m" / "s2.csv", Connectome(oracle::random_graph(4, 2)));
    write_connectome(dir.path / "m" / "s3.csv", Connectome(oracle::random_graph(4, 3)));
    write_text(dir.path / "manifest.csv", "subject_id,path,label\ns1,m/s1.csv,NC\ns2,m/s2.csv,ASD\ns3,m/s3.csv,NC\n");

    const auto man = load_manifest(dir.path / "manifest.csv");
    REQUIRE(man.entries.size() == 3);
    CHECK(man.labels() == std::vector<std::string>{"ASD", "NC"});
    const auto nc = load_population(man, "NC");
    CHECK(nc.subject_ids == std::vector<std::string>{"s1", "s3"});
    CHECK(nc.roi_count() == 4);

    const auto d1 = manifest_digest(man);
    CHECK(d1.size() == 64);
    CHECK(d1 == manifest_digest(load_manifest(dir.path / "manifest.csv")));
    write_connectome(dir.path / "m" / "s2.csv", Connectome(oracle::random_graph(4, 9)));
    CHECK(d1 != manifest_digest(man));

    write_text(dir.path / "bad.csv", "id,file,class\n");
    CHECK_THROWS_AS(load_manifest(dir.path / "bad.csv"), Error);
    write_text(dir.path / "dup.csv", "subject_id,path,label\na,m/s1.csv,X\na,m/s2.csv,X\n");
    CHECK_THROWS_AS(load_manifest(dir.path / "dup.csv"), Error);
    CHECK_THROWS_AS(load_population(man, "OTHER"), Error);
}

TEST_CASE("parallel_for visits every index once and reports the lowest failure") {
    for (std::size_t threads : {1u, 2u, 4u, 16u}) {
        std::vector<std::atomic<int>> hits(37);
        parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
        for (auto& h : hits) CHECK(h.load() == 1);

        try {
            parallel_for(20, threads, [](std::size_t i) {
                if (i == 7 || i == 15) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "7");
        }
    }
}
