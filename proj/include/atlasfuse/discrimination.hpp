#pragma once

#include "atlasfuse/core.hpp"
#include "atlasfuse/diffusion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace atlasfuse {

struct ResidualMatrix {
    Matrix r;
};

struct Edge {
    std::size_t k = 0;
    std::size_t l = 0;
    double score = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeSelection {
    std::vector<Edge> edges;
    std::size_t n_f = 0;
};

struct LinearClassifier {
    Vector weights;
    double bias = 0.0;
    double c_reg = 1.0;

    double decision(const Vector& x) const { return weights.dot(x) + bias; }
    /// +1 when the decision value is ≥ 0.
    int predict(const Vector& x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

ResidualMatrix residual(const Atlas& a1, const Atlas& a2);
ResidualMatrix residual(const Matrix& a1, const Matrix& a2);

/// Strictly positive upper-triangular entries, largest first; equal scores
/// ordered by (k, l).
EdgeSelection select_top(const ResidualMatrix& r, std::size_t n_f);

Vector extract_features(const Connectome& c, const EdgeSelection& sel);

struct SvmOptions {
    double c_reg = 1.0;
    std::size_t epochs = 1000;
    std::uint64_t seed = 0;
    double tol = 1e-8;
};

/// Primal value ½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b)).
double svm_objective(const Matrix& features, const std::vector<int>& labels, const Vector& w, double b, double c_reg);

/// Linear hinge-loss SVM with an unregularized bias, trained in the dual.
///
/// The bias adds the constraint Σ αᵢyᵢ = 0, so coordinates move in pairs:
/// each epoch visits the samples in a seeded shuffled order, and every
/// sample that violates the KKT conditions is updated jointly with its most
/// violating partner (exact two-variable line search). Training stops when
/// the maximal violation falls to `tol` or after `epochs` passes.
LinearClassifier train_svm(const Matrix& features, const std::vector<int>& labels, const SvmOptions& opts = {});

struct FoldResult {
    std::size_t fold = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    std::vector<Edge> edges;
    std::vector<std::string> test_ids;
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over folds
};

struct CvReport {
    std::string positive_label;
    std::string negative_label;
    std::size_t n_folds = 0;
    std::size_t n_f = 0;
    KernelMode mode = KernelMode::MultiTopology;
    std::vector<FoldResult> folds;
    MetricSummary accuracy;
    MetricSummary sensitivity;
    MetricSummary specificity;
};

struct CvParams {
    AtlasParams atlas;
    KernelMode mode = KernelMode::MultiTopology;
    std::size_t n_folds = 5;
    std::size_t n_f = 5;
    double c_reg = 1.0;
    std::size_t svm_epochs = 1000;
    std::uint64_t seed = 0;
};

/// Stratified folds per class from RNG(seed): each class is shuffled and
/// its i-th subject goes to fold i mod n_folds. Returns fold ids per subject.
std::vector<std::size_t> stratified_folds(const std::vector<std::size_t>& class_sizes, std::size_t n_folds,
                                          std::uint64_t seed);

/// Cross-validated atlas-difference edge selection + linear SVM. `positive`
/// is the class predicted as +1 (sensitivity is measured on it). Atlases are
/// re-estimated from training subjects only in every fold.
CvReport run_cv(const Population& positive, const Population& negative, const CvParams& params);

/// Loads the two manifest classes; the first label in sorted order is
/// positive unless `positive_label` names the other one.
CvReport run_cv(const DatasetManifest& manifest, const CvParams& params, const std::string& positive_label = "");

}  // namespace atlasfuse
