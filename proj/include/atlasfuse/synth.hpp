#pragma once

#include "atlasfuse/core.hpp"
#include "atlasfuse/discrimination.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace atlasfuse {

struct SynthSpec {
    std::size_t r = 30;
    std::size_t n_per_class = 40;
    std::size_t n_clusters = 3;
    std::size_t n_disc = 20;
    double delta = 0.3;
    double noise = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthData {
    Population class_a;
    Population class_b;  // carries the +delta effect
    /// Planted discriminative edges (k < l), score = delta.
    std::vector<Edge> ground_truth;
    /// Planted cluster of every subject, class A then class B.
    std::vector<std::size_t> cluster_of_a;
    std::vector<std::size_t> cluster_of_b;
};

/// Seeded two-class population with shared cluster templates.
///
/// One RNG stream is consumed in a fixed order: cluster templates (uniform
/// [0.1, 1] upper entries), balanced cluster assignments (class A then B),
/// Gaussian noise (class A then B, subject by subject, upper entries
/// row-major), then the discriminative edges. Entries are clamped to [0, 1].
SynthData generate(const SynthSpec& spec);

/// Writes `<dir>/manifest.csv`, `<dir>/matrices/<id>.csv` and
/// `<dir>/ground_truth.json`; returns the manifest path.
std::filesystem::path write_synth(const std::filesystem::path& dir, const SynthSpec& spec, const SynthData& data);

}  // namespace atlasfuse
