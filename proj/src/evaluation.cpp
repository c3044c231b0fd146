#include "atlasfuse/evaluation.hpp"

#include "atlasfuse/error.hpp"

#include <algorithm>
#include <cmath>

namespace atlasfuse {

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorKind::DimensionMismatch, "Frobenius distance needs equally sized matrices");
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double d = a(i, j) - b(i, j);
            s += d * d;
        }
    }
    return std::sqrt(s);
}

double centeredness(const Matrix& atlas, const Population& p) {
    if (p.subjects.empty()) {
        fail(ErrorKind::PopulationTooSmall, "centeredness of an empty population");
    }
    double total = 0.0;
    for (const auto& s : p.subjects) {
        total += frobenius_distance(atlas, s.weights());
    }
    return total / static_cast<double>(p.size());
}

double centeredness(const Atlas& atlas, const Population& p) {
    return centeredness(atlas.a, p);
}

VariantReport compare_variants(const std::vector<Population>& classes, const AtlasParams& params,
                               const std::vector<KernelMode>& modes, const std::vector<std::uint64_t>& seeds) {
    if (modes.size() < 2) {
        fail(ErrorKind::InvalidArgument, "variant comparison needs at least two modes");
    }
    if (seeds.empty()) {
        fail(ErrorKind::InvalidArgument, "variant comparison needs at least one seed");
    }
    VariantReport report;
    report.modes = modes;
    report.seeds = seeds;
    for (auto seed : seeds) {
        AtlasParams p = params;
        p.seed = seed;
        for (const auto& cls : classes) {
            for (auto mode : modes) {
                const Atlas atlas = estimate_atlas(cls, mode, p);
                report.cells.push_back({mode, seed, cls.class_label, centeredness(atlas, cls)});
            }
        }
    }

    const bool has_multi = std::find(modes.begin(), modes.end(), KernelMode::MultiTopology) != modes.end();
    if (has_multi) {
        const std::size_t stride = modes.size();
        const auto multi_pos = static_cast<std::size_t>(
            std::find(modes.begin(), modes.end(), KernelMode::MultiTopology) - modes.begin());
        for (std::size_t m = 0; m < modes.size(); ++m) {
            if (modes[m] == KernelMode::MultiTopology) {
                continue;
            }
            WinRate wr;
            wr.ablation = modes[m];
            for (std::size_t base = 0; base < report.cells.size(); base += stride) {
                ++wr.cells;
                if (report.cells[base + multi_pos].centeredness <= report.cells[base + m].centeredness) {
                    ++wr.wins;
                }
            }
            report.win_rates.push_back(wr);
        }
    }
    return report;
}

VariantReport compare_variants(const DatasetManifest& manifest, const AtlasParams& params,
                               const std::vector<KernelMode>& modes, const std::vector<std::uint64_t>& seeds) {
    std::vector<Population> classes;
    for (const auto& label : manifest.labels()) {
        classes.push_back(load_population(manifest, label));
    }
    return compare_variants(classes, params, modes, seeds);
}

}  // namespace atlasfuse
