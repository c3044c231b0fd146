#pragma once

#include "atlasfuse/diffusion.hpp"
#include "atlasfuse/discrimination.hpp"
#include "atlasfuse/evaluation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace atlasfuse {

using Json = nlohmann::ordered_json;

/// Worker count is deliberately absent: outputs must not depend on it.
Json to_json(const AtlasParams& params);

Json atlas_sidecar(const Atlas& atlas, const AtlasParams& params, const std::string& input_digest,
                   const AtlasDiagnostics* diag = nullptr);

struct AtlasFiles {
    std::filesystem::path matrix;
    std::filesystem::path sidecar;
};

/// `<dir>/atlas_<class>_<mode>.csv` plus a `.json` sidecar.
AtlasFiles write_atlas(const std::filesystem::path& dir, const Atlas& atlas, const AtlasParams& params,
                       const std::string& input_digest, const AtlasDiagnostics* diag = nullptr);

Json to_json(const CvReport& report, const CvParams& params, const std::string& input_digest);

/// fold,rank,k,l,score — one row per selected edge.
void write_edges_csv(const std::filesystem::path& path, const CvReport& report);

Json to_json(const VariantReport& report, const AtlasParams& params, const std::string& input_digest);

/// seed,class,mode,centeredness
void write_variants_csv(const std::filesystem::path& path, const VariantReport& report);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace atlasfuse
