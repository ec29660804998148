#pragma once

// nlohmann/json bindings shared by the config loaders. Not installed.

#include <json.hpp>

#include <string>

#include "csm/array.hpp"
#include "csm/geom.hpp"

namespace csm::detail {

using nlohmann::json;

json parse_json_file(const std::string& path);
json parse_json_text(const std::string& text, const std::string& origin);

Vec3 vec3_from_json(const json& j, const std::string& what);
MicArrayGeometry geometry_from_json(const json& j);

}  // namespace csm::detail
