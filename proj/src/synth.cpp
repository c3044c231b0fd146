#include "atlasfuse/synth.hpp"

#include "atlasfuse/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace atlasfuse {

void SynthSpec::validate() const {
    if (r < 3) fail(ErrorKind::InvalidArgument, "synthetic r must be at least 3");
    if (n_per_class < 1) fail(ErrorKind::InvalidArgument, "need at least one subject per class");
    if (n_clusters < 1 || n_clusters > n_per_class) {
        fail(ErrorKind::InvalidArgument, "cluster count must lie in [1, n_per_class]");
    }
    if (n_disc > r * (r - 1) / 2) fail(ErrorKind::InvalidArgument, "more discriminative edges than ROI pairs");
    if (!(delta >= 0.0)) fail(ErrorKind::InvalidArgument, "delta must be nonnegative");
    if (!(noise >= 0.0)) fail(ErrorKind::InvalidArgument, "noise must be nonnegative");
}

namespace {

std::string subject_id(char cls, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c_%03zu", cls, i);
    return buf;
}

std::vector<std::size_t> balanced_assignment(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = i % k;
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    const auto r = static_cast<Eigen::Index>(spec.r);
    std::mt19937_64 rng(spec.seed);

    std::uniform_real_distribution<double> base_dist(0.1, 1.0);
    std::vector<Matrix> templates(spec.n_clusters, Matrix::Zero(r, r));
    for (auto& t : templates) {
        for (Eigen::Index k = 0; k < r; ++k) {
            for (Eigen::Index l = k + 1; l < r; ++l) {
                t(k, l) = t(l, k) = base_dist(rng);
            }
        }
    }

    SynthData out;
    out.cluster_of_a = balanced_assignment(spec.n_per_class, spec.n_clusters, rng);
    out.cluster_of_b = balanced_assignment(spec.n_per_class, spec.n_clusters, rng);

    std::normal_distribution<double> gauss(0.0, 1.0);
    auto noisy = [&](const std::vector<std::size_t>& clusters) {
        std::vector<Matrix> subjects;
        subjects.reserve(clusters.size());
        for (std::size_t cl : clusters) {
            Matrix m = templates[cl];
            for (Eigen::Index k = 0; k < r; ++k) {
                for (Eigen::Index l = k + 1; l < r; ++l) {
                    const double v = m(k, l) + spec.noise * gauss(rng);
                    m(k, l) = m(l, k) = v;
                }
            }
            subjects.push_back(std::move(m));
        }
        return subjects;
    };
    std::vector<Matrix> raw_a = noisy(out.cluster_of_a);
    std::vector<Matrix> raw_b = noisy(out.cluster_of_b);

    // Partial Fisher–Yates over the pair list picks n_disc distinct edges.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < spec.r; ++k) {
        for (std::size_t l = k + 1; l < spec.r; ++l) {
            pairs.emplace_back(k, l);
        }
    }
    for (std::size_t i = 0; i < spec.n_disc; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pairs.size() - 1);
        std::swap(pairs[i], pairs[pick(rng)]);
        out.ground_truth.push_back({pairs[i].first, pairs[i].second, spec.delta});
    }
    for (auto& m : raw_b) {
        for (const auto& e : out.ground_truth) {
            const auto k = static_cast<Eigen::Index>(e.k);
            const auto l = static_cast<Eigen::Index>(e.l);
            m(k, l) += spec.delta;
            m(l, k) = m(k, l);
        }
    }

    auto finish = [&](std::vector<Matrix>& raw, char cls) {
        std::vector<std::string> ids;
        std::vector<Connectome> nets;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            Matrix m = raw[i].cwiseMax(0.0).cwiseMin(1.0);
            m.diagonal().setZero();
            ids.push_back(subject_id(cls, i));
            nets.emplace_back(std::move(m));
        }
        return Population(std::string(1, cls), std::move(ids), std::move(nets));
    };
    out.class_a = finish(raw_a, 'A');
    out.class_b = finish(raw_b, 'B');
    return out;
}

std::filesystem::path write_synth(const std::filesystem::path& dir, const SynthSpec& spec, const SynthData& data) {
    std::filesystem::create_directories(dir / "matrices");
    DatasetManifest manifest;
    for (const Population* p : {&data.class_a, &data.class_b}) {
        for (std::size_t i = 0; i < p->size(); ++i) {
            const auto rel = std::filesystem::path("matrices") / (p->subject_ids[i] + ".csv");
            write_connectome(dir / rel, p->subjects[i]);
            manifest.entries.push_back({p->subject_ids[i], rel, p->class_label});
        }
    }
    const auto manifest_path = dir / "manifest.csv";
    write_manifest(manifest_path, manifest);

    nlohmann::ordered_json gt;
    gt["spec"] = {{"r", spec.r},           {"n_per_class", spec.n_per_class}, {"n_clusters", spec.n_clusters},
                  {"n_disc", spec.n_disc}, {"delta", spec.delta},             {"noise", spec.noise},
                  {"seed", spec.seed}};
    gt["effect_class"] = data.class_b.class_label;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : data.ground_truth) {
        edges.push_back({{"k", e.k}, {"l", e.l}, {"delta", e.score}});
    }
    gt["edges"] = std::move(edges);
    std::ofstream out(dir / "ground_truth.json", std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write ground truth into '" + dir.string() + "'");
    }
    out << gt.dump(2) << '\n';
    return manifest_path;
}

}  // namespace atlasfuse
