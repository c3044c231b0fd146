#include "atlasfuse/reports.hpp"

#include "atlasfuse/error.hpp"

#include <fstream>

namespace atlasfuse {

namespace {

std::ofstream open_text(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
    return out;
}

Json vector_json(const Vector& v) {
    auto arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v(i));
    }
    return arr;
}

Json edges_json(const std::vector<Edge>& edges) {
    auto arr = Json::array();
    for (const auto& e : edges) {
        arr.push_back({{"k", e.k}, {"l", e.l}, {"score", e.score}});
    }
    return arr;
}

Json summary_json(const MetricSummary& s) {
    return {{"mean", s.mean}, {"std", s.std}};
}

}  // namespace

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_text(path);
    out << j.dump(2) << '\n';
}

Json to_json(const AtlasParams& params) {
    Json j;
    j["n_star"] = params.n_star;
    j["knn"] = params.knn;
    j["clusters"] = params.n_clusters;
    j["lambda"] = params.lambda;
    if (params.sigma) {
        j["sigma"] = *params.sigma;
    } else {
        j["sigma"] = "auto";
    }
    j["seed"] = params.seed;
    return j;
}

Json atlas_sidecar(const Atlas& atlas, const AtlasParams& params, const std::string& input_digest,
                   const AtlasDiagnostics* diag) {
    Json j;
    j["format_version"] = "1";
    j["class"] = atlas.class_label;
    j["mode"] = to_string(atlas.mode);
    j["rois"] = atlas.a.rows();
    j["iterations"] = atlas.iterations;
    j["params"] = to_json(params);
    j["input_digest"] = input_digest;
    if (diag != nullptr) {
        Json d;
        if (diag->clusters) {
            d["cluster_labels"] = diag->clusters->labels;
            d["cluster_inertia"] = diag->clusters->inertia;
        }
        d["subject_weights"] = vector_json(diag->subject_weights);
        d["round_norms"] = diag->round_norms;
        j["diagnostics"] = std::move(d);
    }
    return j;
}

AtlasFiles write_atlas(const std::filesystem::path& dir, const Atlas& atlas, const AtlasParams& params,
                       const std::string& input_digest, const AtlasDiagnostics* diag) {
    const std::string stem = "atlas_" + atlas.class_label + "_" + to_string(atlas.mode);
    AtlasFiles files{dir / (stem + ".csv"), dir / (stem + ".json")};
    write_matrix_csv(files.matrix, atlas.a);
    Json side = atlas_sidecar(atlas, params, input_digest, diag);
    side["matrix_file"] = files.matrix.filename().string();
    write_json(files.sidecar, side);
    return files;
}

Json to_json(const CvReport& report, const CvParams& params, const std::string& input_digest) {
    Json j;
    j["format_version"] = "1";
    j["input_digest"] = input_digest;
    j["positive_label"] = report.positive_label;
    j["negative_label"] = report.negative_label;
    j["mode"] = to_string(report.mode);
    j["params"] = {{"atlas", to_json(params.atlas)},
                   {"folds", params.n_folds},
                   {"nf", params.n_f},
                   {"c_reg", params.c_reg},
                   {"svm_epochs", params.svm_epochs},
                   {"seed", params.seed}};
    auto folds = Json::array();
    for (const auto& f : report.folds) {
        folds.push_back({{"fold", f.fold},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"accuracy", f.accuracy},
                         {"sensitivity", f.sensitivity},
                         {"specificity", f.specificity},
                         {"test_subjects", f.test_ids},
                         {"edges", edges_json(f.edges)}});
    }
    j["folds"] = std::move(folds);
    j["accuracy"] = summary_json(report.accuracy);
    j["sensitivity"] = summary_json(report.sensitivity);
    j["specificity"] = summary_json(report.specificity);
    return j;
}

void write_edges_csv(const std::filesystem::path& path, const CvReport& report) {
    auto out = open_text(path);
    out << "fold,rank,k,l,score\n";
    for (const auto& f : report.folds) {
        for (std::size_t rank = 0; rank < f.edges.size(); ++rank) {
            const auto& e = f.edges[rank];
            out << f.fold << ',' << rank << ',' << e.k << ',' << e.l << ',' << format_double(e.score) << '\n';
        }
    }
}

Json to_json(const VariantReport& report, const AtlasParams& params, const std::string& input_digest) {
    Json j;
    j["format_version"] = "1";
    j["input_digest"] = input_digest;
    j["params"] = to_json(params);
    auto modes = Json::array();
    for (auto m : report.modes) modes.push_back(to_string(m));
    j["modes"] = std::move(modes);
    j["seeds"] = report.seeds;
    auto cells = Json::array();
    for (const auto& c : report.cells) {
        cells.push_back(
            {{"seed", c.seed}, {"class", c.class_label}, {"mode", to_string(c.mode)}, {"centeredness", c.centeredness}});
    }
    j["cells"] = std::move(cells);
    auto wins = Json::array();
    for (const auto& w : report.win_rates) {
        wins.push_back({{"ablation", to_string(w.ablation)}, {"wins", w.wins}, {"cells", w.cells}, {"rate", w.rate()}});
    }
    j["multi_win_rates"] = std::move(wins);
    j["note"] = "centeredness compares diffused-space atlases with raw networks; "
                "absolute values are not scale-matched across modes";
    return j;
}

void write_variants_csv(const std::filesystem::path& path, const VariantReport& report) {
    auto out = open_text(path);
    out << "seed,class,mode,centeredness\n";
    for (const auto& c : report.cells) {
        out << c.seed << ',' << c.class_label << ',' << to_string(c.mode) << ',' << format_double(c.centeredness)
            << '\n';
    }
}

}  // namespace atlasfuse
