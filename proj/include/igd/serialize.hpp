#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "igd/fit.hpp"
#include "igd/gradcheck.hpp"
#include "igd/loss.hpp"
#include "igd/metrics.hpp"
#include "igd/synthetic.hpp"

namespace igd {

using Json = nlohmann::ordered_json;

/// Renders a document deterministically: insertion-order keys, two-space
/// indent, scalar-only arrays on one line and reals with 17 significant
/// digits (full double round trip). Throws std::domain_error on non-finite
/// numbers.
std::string to_text(const Json& doc);

/// Parses JSON text; malformed input throws ParseError.
Json parse_text(const std::string& text);

Json load_file(const std::string& path);
void save_file(const std::string& path, const Json& doc);

/// A scene document bundles the generating spec with the generated data so
/// downstream commands need no extra inputs.
struct SceneDoc {
    SceneSpec spec;
    Scene scene;
};

Json to_json(const SceneSpec& spec);
Json to_json(const SceneDoc& doc);
Json to_json(const StudentState& state);
Json to_json(const LossWeights& weights);
Json to_json(const FitConfig& config);
Json to_json(const LossReport& report);
Json to_json(const DepthMetricReport& report);
Json to_json(const FitTrace& trace);
Json to_json(const std::vector<GradCheckRow>& rows);
Json depth_list_to_json(const std::vector<double>& values);

/// All loaders check format_version and kind and throw ParseError with the
/// offending field's path on any mismatch, missing field, wrong type or
/// unknown key.
SceneSpec scene_spec_from_json(const Json& j);
SceneDoc scene_doc_from_json(const Json& j);
StudentState student_state_from_json(const Json& j);
LossWeights weights_from_json(const Json& j);
FitConfig fit_config_from_json(const Json& j);
std::vector<double> depth_list_from_json(const Json& j);

}  // namespace igd
