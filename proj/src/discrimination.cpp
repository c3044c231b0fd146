#include "atlasfuse/discrimination.hpp"

#include "atlasfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace atlasfuse {

ResidualMatrix residual(const Matrix& a1, const Matrix& a2) {
    if (a1.rows() != a2.rows() || a1.cols() != a2.cols()) {
        fail(ErrorKind::DimensionMismatch, "atlases differ in size");
    }
    Matrix r = (a1 - a2).cwiseAbs();
    r.diagonal().setZero();
    return {std::move(r)};
}

ResidualMatrix residual(const Atlas& a1, const Atlas& a2) {
    if (a1.mode != a2.mode) {
        fail(ErrorKind::InvalidArgument, "atlases were estimated with different kernel modes");
    }
    return residual(a1.a, a2.a);
}

EdgeSelection select_top(const ResidualMatrix& r, std::size_t n_f) {
    if (n_f < 1) {
        fail(ErrorKind::InvalidArgument, "n_f must be at least 1");
    }
    std::vector<Edge> candidates;
    const auto n = static_cast<std::size_t>(r.r.rows());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l) {
            const double v = r.r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            if (v > 0.0) {
                candidates.push_back({k, l, v});
            }
        }
    }
    const std::size_t keep = std::min(n_f, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Edge& a, const Edge& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.k != b.k ? a.k < b.k : a.l < b.l;
                      });
    candidates.resize(keep);
    return {std::move(candidates), n_f};
}

Vector extract_features(const Connectome& c, const EdgeSelection& sel) {
    Vector out(static_cast<Eigen::Index>(sel.edges.size()));
    for (std::size_t m = 0; m < sel.edges.size(); ++m) {
        const auto& e = sel.edges[m];
        if (e.k >= c.size() || e.l >= c.size()) {
            fail(ErrorKind::InvalidArgument, "selected edge (" + std::to_string(e.k) + "," + std::to_string(e.l) +
                                                 ") outside a " + std::to_string(c.size()) + "-ROI connectome");
        }
        out(static_cast<Eigen::Index>(m)) = c(e.k, e.l);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVM

double svm_objective(const Matrix& features, const std::vector<int>& labels, const Vector& w, double b, double c_reg) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const double margin = labels[static_cast<std::size_t>(i)] * (features.row(i).dot(w) + b);
        loss += std::max(0.0, 1.0 - margin);
    }
    return 0.5 * w.squaredNorm() + c_reg * loss;
}

LinearClassifier train_svm(const Matrix& features, const std::vector<int>& labels, const SvmOptions& opts) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (labels.size() != n) {
        fail(ErrorKind::DimensionMismatch, "one label per sample required");
    }
    if (!(opts.c_reg > 0.0)) {
        fail(ErrorKind::InvalidArgument, "c_reg must be positive");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else fail(ErrorKind::InvalidArgument, "labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) {
        fail(ErrorKind::DegenerateLabels, "SVM training needs both classes");
    }

    const double c = opts.c_reg;
    Vector y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i];
    }
    const Matrix gram = features * features.transpose();
    const Matrix q = y.asDiagonal() * gram * y.asDiagonal();

    Vector alpha = Vector::Zero(static_cast<Eigen::Index>(n));
    Vector grad = Vector::Constant(static_cast<Eigen::Index>(n), -1.0);  // Qα − e

    auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    auto in_up = [&](std::size_t i) {
        return (labels[i] == 1 && alpha(idx(i)) < c) || (labels[i] == -1 && alpha(idx(i)) > 0.0);
    };
    auto in_low = [&](std::size_t i) {
        return (labels[i] == 1 && alpha(idx(i)) > 0.0) || (labels[i] == -1 && alpha(idx(i)) < c);
    };
    auto score = [&](std::size_t i) { return -labels[i] * grad(idx(i)); };

    struct Extremes {
        double up_max;
        std::size_t up_arg;
        double low_min;
        std::size_t low_arg;
    };
    auto extremes = [&] {
        Extremes e{-std::numeric_limits<double>::infinity(), n, std::numeric_limits<double>::infinity(), n};
        for (std::size_t i = 0; i < n; ++i) {
            const double v = score(i);
            if (in_up(i) && v > e.up_max) {
                e.up_max = v;
                e.up_arg = i;
            }
            if (in_low(i) && v < e.low_min) {
                e.low_min = v;
                e.low_arg = i;
            }
        }
        return e;
    };

    // Moves α along yᵢeᵢ − yⱼeⱼ, with i ∈ I_up, j ∈ I_low and score(i) > score(j).
    auto update_pair = [&](std::size_t i, std::size_t j) {
        const double curvature = std::max(q(idx(i), idx(i)) + q(idx(j), idx(j)) -
                                              2.0 * labels[i] * labels[j] * q(idx(i), idx(j)),
                                          1e-12);
        double t = (score(i) - score(j)) / curvature;
        t = std::min(t, labels[i] == 1 ? c - alpha(idx(i)) : alpha(idx(i)));
        t = std::min(t, labels[j] == 1 ? alpha(idx(j)) : c - alpha(idx(j)));
        if (!(t > 0.0)) {
            return;
        }
        const double di = labels[i] * t;
        const double dj = -labels[j] * t;
        alpha(idx(i)) = std::clamp(alpha(idx(i)) + di, 0.0, c);
        alpha(idx(j)) = std::clamp(alpha(idx(j)) + dj, 0.0, c);
        grad += q.col(idx(i)) * di + q.col(idx(j)) * dj;
    };

    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    Extremes ext = extremes();
    for (std::size_t epoch = 0; epoch < opts.epochs && ext.up_max - ext.low_min > opts.tol; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            ext = extremes();
            const double v = score(i);
            if (in_up(i) && v > ext.low_min + opts.tol && ext.low_arg != n) {
                update_pair(i, ext.low_arg);
            } else if (in_low(i) && v < ext.up_max - opts.tol && ext.up_arg != n) {
                update_pair(ext.up_arg, i);
            }
        }
        ext = extremes();
    }

    LinearClassifier model;
    model.c_reg = c;
    model.weights = features.transpose() * (alpha.cwiseProduct(y));

    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = alpha(idx(i));
        if (a > 0.0 && a < c) {
            free_sum += score(i);
            ++free_count;
        }
    }
    model.bias = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ext.up_max + ext.low_min);
    return model;
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<std::size_t> stratified_folds(const std::vector<std::size_t>& class_sizes, std::size_t n_folds,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> folds;
    for (std::size_t size : class_sizes) {
        std::vector<std::size_t> perm(size);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> assigned(size);
        for (std::size_t pos = 0; pos < size; ++pos) {
            assigned[perm[pos]] = pos % n_folds;
        }
        folds.insert(folds.end(), assigned.begin(), assigned.end());
    }
    return folds;
}

namespace {

struct Split {
    Population train;
    std::vector<std::size_t> test;
};

Split split_class(const Population& p, const std::vector<std::size_t>& fold_of, std::size_t offset, std::size_t fold) {
    std::vector<std::string> ids;
    std::vector<Connectome> nets;
    Split s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (fold_of[offset + i] == fold) {
            s.test.push_back(i);
        } else {
            ids.push_back(p.subject_ids[i]);
            nets.push_back(p.subjects[i]);
        }
    }
    s.train = Population(p.class_label, std::move(ids), std::move(nets));
    return s;
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    for (double v : values) s.std += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(values.size()));
    return s;
}

}  // namespace

CvReport run_cv(const Population& positive, const Population& negative, const CvParams& params) {
    if (params.n_folds < 2) {
        fail(ErrorKind::InvalidArgument, "cross-validation needs at least 2 folds");
    }
    if (positive.size() < params.n_folds || negative.size() < params.n_folds) {
        fail(ErrorKind::TooFewSubjects, "each class needs at least " + std::to_string(params.n_folds) +
                                            " subjects for stratified folds");
    }
    if (positive.roi_count() != negative.roi_count()) {
        fail(ErrorKind::DimensionMismatch, "classes differ in ROI count");
    }

    const auto fold_of = stratified_folds({positive.size(), negative.size()}, params.n_folds, params.seed);

    CvReport report;
    report.positive_label = positive.class_label;
    report.negative_label = negative.class_label;
    report.n_folds = params.n_folds;
    report.n_f = params.n_f;
    report.mode = params.mode;

    std::vector<double> acc, sens, spec;
    for (std::size_t fold = 0; fold < params.n_folds; ++fold) {
        const Split pos = split_class(positive, fold_of, 0, fold);
        const Split neg = split_class(negative, fold_of, positive.size(), fold);

        const Atlas atlas_pos = estimate_atlas(pos.train, params.mode, params.atlas);
        const Atlas atlas_neg = estimate_atlas(neg.train, params.mode, params.atlas);
        const EdgeSelection sel = select_top(residual(atlas_pos, atlas_neg), params.n_f);
        if (sel.edges.empty()) {
            fail(ErrorKind::DegenerateGraph, "fold " + std::to_string(fold) + ": class atlases are identical");
        }

        const std::size_t n_train = pos.train.size() + neg.train.size();
        Matrix x(static_cast<Eigen::Index>(n_train), static_cast<Eigen::Index>(sel.edges.size()));
        std::vector<int> y;
        y.reserve(n_train);
        Eigen::Index row = 0;
        for (const auto& s : pos.train.subjects) {
            x.row(row++) = extract_features(s, sel).transpose();
            y.push_back(1);
        }
        for (const auto& s : neg.train.subjects) {
            x.row(row++) = extract_features(s, sel).transpose();
            y.push_back(-1);
        }
        SvmOptions svm_opts;
        svm_opts.c_reg = params.c_reg;
        svm_opts.epochs = params.svm_epochs;
        svm_opts.seed = params.seed + fold;
        const LinearClassifier model = train_svm(x, y, svm_opts);

        FoldResult fr;
        fr.fold = fold;
        fr.n_train = n_train;
        fr.n_test = pos.test.size() + neg.test.size();
        fr.edges = sel.edges;
        std::size_t tp = 0, tn = 0;
        for (auto i : pos.test) {
            tp += model.predict(extract_features(positive.subjects[i], sel)) == 1;
            fr.test_ids.push_back(positive.subject_ids[i]);
        }
        for (auto i : neg.test) {
            tn += model.predict(extract_features(negative.subjects[i], sel)) == -1;
            fr.test_ids.push_back(negative.subject_ids[i]);
        }
        fr.accuracy = static_cast<double>(tp + tn) / static_cast<double>(fr.n_test);
        fr.sensitivity = static_cast<double>(tp) / static_cast<double>(pos.test.size());
        fr.specificity = static_cast<double>(tn) / static_cast<double>(neg.test.size());
        acc.push_back(fr.accuracy);
        sens.push_back(fr.sensitivity);
        spec.push_back(fr.specificity);
        report.folds.push_back(std::move(fr));
    }
    report.accuracy = summarize(acc);
    report.sensitivity = summarize(sens);
    report.specificity = summarize(spec);
    return report;
}

CvReport run_cv(const DatasetManifest& manifest, const CvParams& params, const std::string& positive_label) {
    const auto labels = manifest.labels();
    if (labels.size() != 2) {
        fail(ErrorKind::InvalidArgument,
             "classification needs exactly two class labels, manifest has " + std::to_string(labels.size()));
    }
    std::string pos = labels[0];
    std::string neg = labels[1];
    if (!positive_label.empty()) {
        if (positive_label == labels[1]) {
            std::swap(pos, neg);
        } else if (positive_label != labels[0]) {
            fail(ErrorKind::InvalidArgument, "positive label '" + positive_label + "' not in manifest");
        }
    }
    return run_cv(load_population(manifest, pos), load_population(manifest, neg), params);
}

}  // namespace atlasfuse
