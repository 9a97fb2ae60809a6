#ifndef ORRECON_SRC_JSON_UTIL_HPP
#define ORRECON_SRC_JSON_UTIL_HPP

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "orrecon/geom.hpp"

// Strict-schema helpers shared by the manifest and config parsers. Every
// object is checked with require_keys so unknown keys fail hard instead of
// silently ignoring a typo.
namespace orrecon::jsonutil {

inline void require_object(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_object()) {
    throw std::runtime_error(ctx + ": expected a JSON object");
  }
}

inline void require_keys(const nlohmann::json& j, const std::string& ctx,
                         std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  require_object(j, ctx);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : required) {
      known = known || key == k;
    }
    for (const char* k : optional) {
      known = known || key == k;
    }
    if (!known) {
      throw std::runtime_error(ctx + ": unknown key \"" + key + "\"");
    }
  }
  for (const char* k : required) {
    if (!j.contains(k)) {
      throw std::runtime_error(ctx + ": missing key \"" + k + "\"");
    }
  }
}

inline double as_number(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_number()) {
    throw std::runtime_error(ctx + ": expected a number");
  }
  return j.get<double>();
}

inline int as_int(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_number_integer()) {
    throw std::runtime_error(ctx + ": expected an integer");
  }
  return j.get<int>();
}

/// 4x4 homogeneous pose stored as nested row arrays.
inline RigidTransform as_pose(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error(ctx + ": expected a 4x4 matrix (4 rows)");
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != 4) {
      throw std::runtime_error(ctx + ": expected 4 values per matrix row");
    }
    for (int c = 0; c < 4; ++c) {
      m(r, c) = as_number(row[c], ctx);
    }
  }
  try {
    return RigidTransform::FromMatrix(m);
  } catch (const std::exception& e) {
    throw std::runtime_error(ctx + ": " + e.what());
  }
}

inline Eigen::Vector3d as_vec3(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw std::runtime_error(ctx + ": expected an array of 3 numbers");
  }
  return {as_number(j[0], ctx), as_number(j[1], ctx), as_number(j[2], ctx)};
}

inline Eigen::Vector2d as_vec2(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2) {
    throw std::runtime_error(ctx + ": expected an array of 2 numbers");
  }
  return {as_number(j[0], ctx), as_number(j[1], ctx)};
}

inline nlohmann::json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path.string() + ": cannot open");
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace orrecon::jsonutil

#endif  // ORRECON_SRC_JSON_UTIL_HPP
