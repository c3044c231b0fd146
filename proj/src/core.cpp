#include "atlasfuse/core.hpp"

#include "atlasfuse/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace atlasfuse {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Parse: return "ParseError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::DegenerateGraph: return "DegenerateGraph";
        case ErrorKind::DegenerateNode: return "DegenerateNode";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::TooFewSubjects: return "TooFewSubjects";
        case ErrorKind::InvalidBandwidth: return "InvalidBandwidth";
        case ErrorKind::DegenerateLabels: return "DegenerateLabels";
        case ErrorKind::VanishingWeight: return "VanishingWeight";
        case ErrorKind::SingularKernel: return "SingularKernel";
        case ErrorKind::PopulationTooSmall: return "PopulationTooSmall";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    }
    return "Error";
}

// ---------------------------------------------------------------------------
// Connectome

Connectome::Connectome(Matrix weights) : weights_(std::move(weights)) {
    const auto r = weights_.rows();
    if (r != weights_.cols()) {
        fail(ErrorKind::DimensionMismatch, "connectome must be square");
    }
    for (Eigen::Index k = 0; k < r; ++k) {
        if (weights_(k, k) != 0.0) {
            fail(ErrorKind::InvalidArgument, "connectome diagonal must be zero");
        }
        for (Eigen::Index l = 0; l < r; ++l) {
            const double v = weights_(k, l);
            if (!std::isfinite(v) || v < 0.0) {
                fail(ErrorKind::InvalidArgument, "connectome weights must be finite and nonnegative");
            }
            if (std::abs(v - weights_(l, k)) > kSymmetryTolerance) {
                fail(ErrorKind::InvalidArgument, "connectome must be symmetric");
            }
        }
    }
}

Connectome Connectome::repair(const Matrix& raw, double* asymmetry) {
    if (raw.rows() != raw.cols()) {
        fail(ErrorKind::DimensionMismatch, "connectome must be square");
    }
    if (!raw.allFinite()) {
        fail(ErrorKind::InvalidArgument, "connectome contains non-finite values");
    }
    if (asymmetry != nullptr) {
        *asymmetry = raw.size() == 0 ? 0.0 : (raw - raw.transpose()).cwiseAbs().maxCoeff();
    }
    Matrix m = (0.5 * (raw + raw.transpose())).cwiseAbs();
    m.diagonal().setZero();
    return Connectome(std::move(m));
}

Population::Population(std::string label, std::vector<std::string> ids, std::vector<Connectome> nets)
    : class_label(std::move(label)), subject_ids(std::move(ids)), subjects(std::move(nets)) {
    if (subjects.empty()) {
        fail(ErrorKind::PopulationTooSmall, "population must contain at least one subject");
    }
    if (subject_ids.size() != subjects.size()) {
        fail(ErrorKind::InvalidArgument, "subject id count does not match subject count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : subject_ids) {
        if (!seen.insert(id).second) {
            fail(ErrorKind::InvalidArgument, "duplicate subject id '" + id + "'");
        }
    }
    const auto r = subjects.front().size();
    for (const auto& s : subjects) {
        if (s.size() != r) {
            fail(ErrorKind::DimensionMismatch, "all subjects must share the same ROI count");
        }
    }
}

// ---------------------------------------------------------------------------
// Vectorization

FeatureVector vectorize(const Connectome& c) {
    const auto r = static_cast<Eigen::Index>(c.size());
    FeatureVector out(r * (r - 1) / 2);
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < r; ++k) {
        for (Eigen::Index l = k + 1; l < r; ++l) {
            out(m++) = c.weights()(k, l);
        }
    }
    return out;
}

std::size_t roi_count_for_features(std::size_t length) {
    std::size_t r = 1;
    while (r * (r - 1) / 2 < length) {
        ++r;
    }
    if (r * (r - 1) / 2 != length) {
        fail(ErrorKind::DimensionMismatch, "feature length is not a triangular number");
    }
    return r;
}

Connectome devectorize(const FeatureVector& values) {
    const auto r = static_cast<Eigen::Index>(roi_count_for_features(static_cast<std::size_t>(values.size())));
    Matrix m = Matrix::Zero(r, r);
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < r; ++k) {
        for (Eigen::Index l = k + 1; l < r; ++l) {
            m(k, l) = values(idx);
            m(l, k) = values(idx);
            ++idx;
        }
    }
    return Connectome(std::move(m));
}

Matrix stack_features(const Population& p) {
    if (p.subjects.empty()) {
        fail(ErrorKind::PopulationTooSmall, "cannot stack features of an empty population");
    }
    const auto r = static_cast<Eigen::Index>(p.roi_count());
    Matrix out(static_cast<Eigen::Index>(p.size()), r * (r - 1) / 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = vectorize(p.subjects[i]).transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV IO

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view token, const std::filesystem::path& path, std::size_t line_no) {
    // from_chars rejects a leading '+', which some toolchains emit.
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double v = 0.0;
    const auto* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, v);
    if (token.empty() || res.ec != std::errc() || res.ptr != end) {
        fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": non-numeric token '" +
                                   std::string(token) + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<double> row;
        for (auto tok : split_commas(line)) {
            row.push_back(parse_number(tok, path, line_no));
        }
        rows.push_back(std::move(row));
    }
    const auto n = rows.size();
    Matrix m(static_cast<Eigen::Index>(n), n == 0 ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != rows.front().size()) {
            fail(ErrorKind::Parse, path.string() + ": ragged rows");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Connectome load_connectome(const std::filesystem::path& path) {
    const Matrix raw = read_matrix_csv(path);
    if (raw.rows() != raw.cols()) {
        fail(ErrorKind::Parse, path.string() + ": matrix is " + std::to_string(raw.rows()) + "x" +
                                   std::to_string(raw.cols()) + ", expected square");
    }
    if (raw.rows() < 3) {
        fail(ErrorKind::InvalidArgument, path.string() + ": need at least 3 ROIs");
    }
    double asym = 0.0;
    Connectome c = Connectome::repair(raw, &asym);
    if (asym > Connectome::kSymmetryTolerance) {
        std::clog << "warning: " << path.string() << ": asymmetry " << asym << " repaired by (M+M^T)/2\n";
    }
    return c;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_out(path);
    std::string line;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                line += ',';
            }
            line += format_double(m(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) {
        fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

void write_connectome(const std::filesystem::path& path, const Connectome& c) {
    write_matrix_csv(path, c.weights());
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<std::string> DatasetManifest::labels() const {
    std::set<std::string> s;
    for (const auto& e : entries) {
        s.insert(e.label);
    }
    return {s.begin(), s.end()};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    DatasetManifest manifest;
    manifest.source = path;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::unordered_set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_commas(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "subject_id" || fields[1] != "path" || fields[2] != "label") {
                fail(ErrorKind::Parse, path.string() + ": expected header 'subject_id,path,label'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected 3 non-empty fields");
        }
        ManifestEntry e{std::string(fields[0]), std::filesystem::path(std::string(fields[1])), std::string(fields[2])};
        if (e.path.is_relative()) {
            e.path = path.parent_path() / e.path;
        }
        if (!ids.insert(e.subject_id).second) {
            fail(ErrorKind::Parse, path.string() + ": duplicate subject id '" + e.subject_id + "'");
        }
        manifest.entries.push_back(std::move(e));
    }
    if (!header_seen) {
        fail(ErrorKind::Parse, path.string() + ": empty manifest");
    }
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    auto out = open_out(path);
    out << "subject_id,path,label\n";
    const auto base = path.parent_path();
    for (const auto& e : manifest.entries) {
        auto p = e.path;
        if (p.is_absolute() && !base.empty()) {
            auto rel = p.lexically_relative(std::filesystem::absolute(base));
            if (!rel.empty()) {
                p = rel;
            }
        }
        out << e.subject_id << ',' << p.generic_string() << ',' << e.label << '\n';
    }
}

Population load_population(const DatasetManifest& manifest, const std::string& label) {
    std::vector<std::string> ids;
    std::vector<Connectome> nets;
    for (const auto& e : manifest.entries) {
        if (e.label == label) {
            ids.push_back(e.subject_id);
            nets.push_back(load_connectome(e.path));
        }
    }
    if (nets.empty()) {
        fail(ErrorKind::InvalidArgument, "manifest has no subjects with label '" + label + "'");
    }
    return Population(label, std::move(ids), std::move(nets));
}

std::string manifest_digest(const DatasetManifest& manifest) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::Io, "sha256 initialisation failed");
    }
    auto feed = [&](const std::string& bytes) {
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
    };
    if (!manifest.source.empty()) {
        feed(read_file(manifest.source));
    } else {
        for (const auto& e : manifest.entries) {
            feed(e.subject_id + ',' + e.label + '\n');
        }
    }
    for (const auto& e : manifest.entries) {
        feed(read_file(e.path));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t workers = std::min(threads, n);
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t begin = n * w / workers;
                const std::size_t end = n * (w + 1) / workers;
                try {
                    for (std::size_t i = begin; i < end; ++i) {
                        fn(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    // Lowest chunk wins so the reported error does not depend on scheduling.
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace atlasfuse
