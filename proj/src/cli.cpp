#include "atlasfuse/cli.hpp"

#include "atlasfuse/core.hpp"
#include "atlasfuse/diffusion.hpp"
#include "atlasfuse/discrimination.hpp"
#include "atlasfuse/error.hpp"
#include "atlasfuse/evaluation.hpp"
#include "atlasfuse/reports.hpp"
#include "atlasfuse/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace atlasfuse::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineFlags {
    std::string mode = "multi";
    std::size_t n_star = 20;
    std::size_t knn = 25;
    std::size_t clusters = 3;
    double lambda = 0.1;
    std::string sigma = "auto";
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--mode", f.mode, "Kernel mode")
        ->check(CLI::IsMember({"multi", "degree", "closeness", "eigenvector"}))
        ->capture_default_str();
    cmd->add_option("--n-star", f.n_star, "Diffusion rounds")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--knn", f.knn, "Neighbours per ROI in the local kernel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--clusters", f.clusters, "Clusters per class")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lambda", f.lambda, "Kernel-weighting regularizer")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "RBF bandwidth, or 'auto' for the median heuristic")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

AtlasParams atlas_params(const PipelineFlags& f) {
    AtlasParams p;
    p.n_star = f.n_star;
    p.knn = f.knn;
    p.n_clusters = f.clusters;
    p.lambda = f.lambda;
    p.seed = f.seed;
    p.threads = f.threads;
    if (f.sigma != "auto") {
        double v = 0.0;
        std::size_t used = 0;
        try {
            v = std::stod(f.sigma, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != f.sigma.size() || !(v > 0.0)) {
            throw UsageError("--sigma must be 'auto' or a positive number");
        }
        p.sigma = v;
    }
    return p;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            throw UsageError(std::string(flag) + ": empty list element");
        }
        if constexpr (std::is_same_v<T, std::string>) {
            out.push_back(item);
        } else {
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size()) {
                throw UsageError(std::string(flag) + ": '" + item + "' is not an unsigned integer");
            }
            out.push_back(static_cast<T>(v));
        }
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Population atlas estimation by multi-topology network cross-diffusion", "atlasfuse"};
    app.require_subcommand(1);

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Estimate one class atlas");
    std::string est_manifest, est_class, est_out;
    PipelineFlags est_flags;
    estimate->add_option("--manifest", est_manifest, "Manifest CSV (subject_id,path,label)")->required();
    estimate->add_option("--class", est_class, "Class label to estimate")->required();
    estimate->add_option("--out", est_out, "Output directory")->required();
    add_pipeline_flags(estimate, est_flags);

    // classify
    auto* classify = app.add_subcommand("classify", "Cross-validated atlas-difference classification");
    std::string cls_manifest, cls_out, cls_edges, cls_positive;
    PipelineFlags cls_flags;
    std::size_t nf = 5, folds = 5, epochs = 1000;
    double c_reg = 1.0;
    classify->add_option("--manifest", cls_manifest, "Manifest CSV with exactly two labels")->required();
    classify->add_option("--out", cls_out, "Report JSON path")->required();
    classify->add_option("--nf", nf, "Selected edges per fold")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
    classify->add_option("--c-reg", c_reg, "SVM regularization")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--epochs", epochs, "SVM epochs")->check(CLI::PositiveNumber)->capture_default_str();
    classify->add_option("--positive", cls_positive, "Label treated as the positive class");
    classify->add_option("--edges-csv", cls_edges, "Also write the selected edges as CSV");
    add_pipeline_flags(classify, cls_flags);

    // compare
    auto* compare = app.add_subcommand("compare", "Centeredness of atlases across kernel modes");
    std::string cmp_manifest, cmp_out, cmp_modes = "multi,degree,closeness,eigenvector", cmp_seeds = "0";
    PipelineFlags cmp_flags;
    compare->add_option("--manifest", cmp_manifest, "Manifest CSV")->required();
    compare->add_option("--out", cmp_out, "Output directory")->required();
    compare->add_option("--modes", cmp_modes, "Comma-separated kernel modes")->capture_default_str();
    compare->add_option("--seeds", cmp_seeds, "Comma-separated clustering seeds")->capture_default_str();
    add_pipeline_flags(compare, cmp_flags);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-class dataset");
    std::string syn_spec, syn_out;
    SynthSpec spec;
    synth->add_option("--spec", syn_spec, "JSON file with r, n_per_class, n_clusters, n_disc, delta, noise, seed");
    synth->add_option("--out", syn_out, "Output directory")->required();
    auto* o_r = synth->add_option("--r", spec.r, "ROI count");
    auto* o_n = synth->add_option("--n-per-class", spec.n_per_class, "Subjects per class");
    auto* o_c = synth->add_option("--clusters", spec.n_clusters, "Planted clusters");
    auto* o_d = synth->add_option("--n-disc", spec.n_disc, "Planted discriminative edges");
    auto* o_delta = synth->add_option("--delta", spec.delta, "Effect size on planted edges");
    auto* o_noise = synth->add_option("--noise", spec.noise, "Gaussian noise std");
    auto* o_seed = synth->add_option("--seed", spec.seed, "Random seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return kExitUsage;
    }

    try {
        if (estimate->parsed()) {
            const AtlasParams params = atlas_params(est_flags);
            const KernelMode mode = parse_kernel_mode(est_flags.mode);
            const auto manifest = load_manifest(est_manifest);
            const Population pop = load_population(manifest, est_class);
            AtlasDiagnostics diag;
            const Atlas atlas = estimate_atlas(pop, mode, params, &diag);
            const auto files = write_atlas(est_out, atlas, params, manifest_digest(manifest), &diag);
            out << files.matrix.string() << '\n';
        } else if (classify->parsed()) {
            CvParams params;
            params.atlas = atlas_params(cls_flags);
            params.mode = parse_kernel_mode(cls_flags.mode);
            params.n_folds = folds;
            params.n_f = nf;
            params.c_reg = c_reg;
            params.svm_epochs = epochs;
            params.seed = cls_flags.seed;
            const auto manifest = load_manifest(cls_manifest);
            const CvReport report = run_cv(manifest, params, cls_positive);
            write_json(cls_out, to_json(report, params, manifest_digest(manifest)));
            if (!cls_edges.empty()) {
                write_edges_csv(cls_edges, report);
            }
            out << "mean accuracy " << report.accuracy.mean << '\n';
        } else if (compare->parsed()) {
            const AtlasParams params = atlas_params(cmp_flags);
            std::vector<KernelMode> modes;
            for (const auto& name : parse_list<std::string>(cmp_modes, "--modes")) {
                try {
                    modes.push_back(parse_kernel_mode(name));
                } catch (const Error& e) {
                    throw UsageError(e.what());
                }
            }
            if (modes.size() < 2) {
                throw UsageError("--modes needs at least two modes");
            }
            const auto seeds = parse_list<std::uint64_t>(cmp_seeds, "--seeds");
            if (seeds.empty()) {
                throw UsageError("--seeds needs at least one seed");
            }
            const auto manifest = load_manifest(cmp_manifest);
            const VariantReport report = compare_variants(manifest, params, modes, seeds);
            const std::filesystem::path dir(cmp_out);
            write_json(dir / "variants.json", to_json(report, params, manifest_digest(manifest)));
            write_variants_csv(dir / "variants.csv", report);
            out << (dir / "variants.json").string() << '\n';
        } else if (synth->parsed()) {
            SynthSpec merged;
            if (!syn_spec.empty()) {
                std::ifstream in(syn_spec);
                if (!in) {
                    fail(ErrorKind::Io, "cannot open spec file '" + syn_spec + "'");
                }
                nlohmann::json j;
                try {
                    in >> j;
                    merged.r = j.value("r", merged.r);
                    merged.n_per_class = j.value("n_per_class", merged.n_per_class);
                    merged.n_clusters = j.value("n_clusters", merged.n_clusters);
                    merged.n_disc = j.value("n_disc", merged.n_disc);
                    merged.delta = j.value("delta", merged.delta);
                    merged.noise = j.value("noise", merged.noise);
                    merged.seed = j.value("seed", merged.seed);
                } catch (const nlohmann::json::exception& e) {
                    fail(ErrorKind::Parse, syn_spec + ": " + e.what());
                }
            }
            if (o_r->count()) merged.r = spec.r;
            if (o_n->count()) merged.n_per_class = spec.n_per_class;
            if (o_c->count()) merged.n_clusters = spec.n_clusters;
            if (o_d->count()) merged.n_disc = spec.n_disc;
            if (o_delta->count()) merged.delta = spec.delta;
            if (o_noise->count()) merged.noise = spec.noise;
            if (o_seed->count()) merged.seed = spec.seed;
            const SynthData data = generate(merged);
            out << write_synth(syn_out, merged, data).string() << '\n';
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPipeline;
    }
    return kExitOk;
}

}  // namespace atlasfuse::cli
