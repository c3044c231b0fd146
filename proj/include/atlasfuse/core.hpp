#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace atlasfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric, nonnegative, zero-diagonal weighted adjacency over r ROIs.
///
/// The constructor validates the invariants and throws on violation; use
/// `Connectome::repair` for raw matrices that still need symmetrization.
class Connectome {
public:
    static constexpr double kSymmetryTolerance = 1e-12;

    explicit Connectome(Matrix weights);

    /// (M + Mᵀ)/2, then |·| entrywise, then zero diagonal. `asymmetry`
    /// receives max |M − Mᵀ| before repair when non-null.
    static Connectome repair(const Matrix& raw, double* asymmetry = nullptr);

    const Matrix& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    double operator()(std::size_t k, std::size_t l) const {
        return weights_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
    }

private:
    Matrix weights_;
};

struct Population {
    std::string class_label;
    std::vector<std::string> subject_ids;
    std::vector<Connectome> subjects;

    Population() = default;
    Population(std::string label, std::vector<std::string> ids, std::vector<Connectome> nets);

    std::size_t size() const noexcept { return subjects.size(); }
    std::size_t roi_count() const noexcept { return subjects.empty() ? 0 : subjects.front().size(); }
};

/// Upper off-diagonal entries, row-major over pairs k < l.
using FeatureVector = Vector;

FeatureVector vectorize(const Connectome& c);
Connectome devectorize(const FeatureVector& values);
/// r such that r(r−1)/2 == length; throws if no such r exists.
std::size_t roi_count_for_features(std::size_t length);
Matrix stack_features(const Population& p);

// ---------------------------------------------------------------------------
// File formats

Connectome load_connectome(const std::filesystem::path& path);
/// Writes shortest round-trip decimals, so load_connectome reproduces the
/// matrix bit-exactly.
void write_connectome(const std::filesystem::path& path, const Connectome& c);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct ManifestEntry {
    std::string subject_id;
    std::filesystem::path path;
    std::string label;
};

struct DatasetManifest {
    static constexpr const char* kFormatVersion = "1";

    std::string format_version = kFormatVersion;
    std::filesystem::path source;  // file the manifest was read from, if any
    std::vector<ManifestEntry> entries;

    /// Distinct labels, sorted.
    std::vector<std::string> labels() const;
};

/// CSV with header `subject_id,path,label`; relative paths resolve against
/// the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Subjects with the given label, in manifest order.
Population load_population(const DatasetManifest& manifest, const std::string& label);

/// SHA-256 (hex) over the manifest file and every referenced matrix file, in
/// manifest order.
std::string manifest_digest(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) over `threads` workers with static chunking.
/// Each index is handled exactly once; callers write into disjoint slots.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace atlasfuse
