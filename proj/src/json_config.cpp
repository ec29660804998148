#include "json_config.hpp"

#include <fstream>
#include <sstream>

#include "csm/error.hpp"

namespace csm::detail {

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw ConfigError(what + ": expected [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

MicArrayGeometry geometry_from_json(const json& j) {
  try {
    const double height = j.value("mount_height", kMountHeight);
    if (j.contains("mic_positions")) {
      const json& mics = j.at("mic_positions");
      if (!mics.is_array()) {
        throw ConfigError("mic_positions: expected a list of [x, y, z]");
      }
      std::vector<Vec3> positions;
      for (std::size_t i = 0; i < mics.size(); ++i) {
        positions.push_back(vec3_from_json(mics[i], "mic_positions[" + std::to_string(i) + "]"));
      }
      return MicArrayGeometry::from_positions(positions, height);
    }
    if (j.contains("spacings")) {
      const json& s = j.at("spacings");
      ArraySpacings sp{s.at("dx1").get<double>(), s.at("dx2").get<double>(),
                       s.at("dy1").get<double>(), s.at("dy2").get<double>(),
                       s.at("dz1").get<double>(), s.at("dz2").get<double>()};
      return MicArrayGeometry::from_spacings(sp, height);
    }
    const std::string preset = j.value("preset", std::string("pioneer2dx"));
    if (preset == "pioneer2dx") {
      return MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx(), height);
    }
    if (preset == "turtlebot2") {
      return MicArrayGeometry::from_spacings(ArraySpacings::turtlebot2(), height);
    }
    throw ConfigError("unknown array preset '" + preset + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("array geometry: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("array geometry: ") + e.what());
  }
}

}  // namespace csm::detail
