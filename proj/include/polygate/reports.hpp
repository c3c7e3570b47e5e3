#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "polygate/dataset.hpp"
#include "polygate/evaluation.hpp"
#include "polygate/outlier.hpp"

namespace polygate {

using Json = nlohmann::ordered_json;

/// Serialized text of a JSON artifact: 2-space indent, trailing newline.
std::string dump_artifact(const Json& doc);

Json manifest_to_json(const SplitManifest& manifest);
SplitManifest manifest_from_json(const Json& doc);
SplitManifest read_manifest(const std::filesystem::path& path);

Json eval_report_to_json(const EvalReport& report, const Json& config);

/// Every score sorted by descending LOF (ascending id on ties), flagged removed or kept.
Json removal_report_to_json(const LofResult& result, std::size_t fold, const Json& config);

Json conversion_report_to_json(const std::vector<Sample>& samples, const std::string& dataset, const Json& config);

}  // namespace polygate
