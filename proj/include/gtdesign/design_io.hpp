#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gtdesign/model.hpp"

namespace gtdesign {

inline constexpr int kSchemaVersion = 1;

/// Contents of a design file:
/// {schema_version, theta:{p0,p1,p2}, bounds:{x_lower,x_upper}, criterion,
///  approximate:{sizes[],weights[]}, exact:{sizes[],counts[]}}.
/// Either design section may be absent. Unknown top-level fields are ignored,
/// so documents emitted by `gtdesign design` read back as design files.
struct DesignDocument {
  Params theta;
  Bounds bounds;
  Criterion criterion = Criterion::D;
  std::optional<Design> approximate;
  std::optional<ExactDesign> exact;
};

nlohmann::ordered_json to_json(const Params& theta);
nlohmann::ordered_json to_json(const Bounds& bounds);
nlohmann::ordered_json to_json(const Design& design);
nlohmann::ordered_json to_json(const ExactDesign& design);
nlohmann::ordered_json to_json(const DesignDocument& doc);

/// Throws IoError on structural problems; domain errors (InvalidArgument,
/// InvalidSupport) propagate unchanged.
DesignDocument design_document_from_json(const nlohmann::json& j);

DesignDocument read_design_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace gtdesign
