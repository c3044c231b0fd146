#pragma once

#include "atlasfuse/core.hpp"
#include "atlasfuse/diffusion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace atlasfuse {

/// sqrt(Σᵢ Σⱼ |aᵢⱼ − bᵢⱼ|²).
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Mean Frobenius distance from the atlas to every subject's raw weights.
/// Lower is more centered.
double centeredness(const Atlas& atlas, const Population& p);
double centeredness(const Matrix& atlas, const Population& p);

struct VariantCell {
    KernelMode mode = KernelMode::MultiTopology;
    std::uint64_t seed = 0;
    std::string class_label;
    double centeredness = 0.0;
};

struct WinRate {
    KernelMode ablation = KernelMode::DegreeOnly;
    std::size_t wins = 0;   // MultiTopology centeredness ≤ ablation's
    std::size_t cells = 0;  // (class, seed) pairs compared

    double rate() const { return cells == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(cells); }
};

struct VariantReport {
    std::vector<KernelMode> modes;
    std::vector<std::uint64_t> seeds;
    /// Ordered by seed, then class, then mode (all in input order).
    std::vector<VariantCell> cells;
    /// One entry per non-MultiTopology mode, present only when MultiTopology
    /// is among the modes.
    std::vector<WinRate> win_rates;
};

/// Estimates one atlas per (mode, seed, class) with `params.seed` replaced
/// by each seed and scores its centeredness against the class population.
VariantReport compare_variants(const std::vector<Population>& classes, const AtlasParams& params,
                               const std::vector<KernelMode>& modes, const std::vector<std::uint64_t>& seeds);

VariantReport compare_variants(const DatasetManifest& manifest, const AtlasParams& params,
                               const std::vector<KernelMode>& modes, const std::vector<std::uint64_t>& seeds);

}  // namespace atlasfuse
