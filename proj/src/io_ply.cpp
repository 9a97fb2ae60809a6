#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "orrecon/io.hpp"

namespace orrecon::io {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

void write_ply(const std::filesystem::path& path,
               const LabeledPointCloud& cloud, bool binary) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0\n"
                 : "format ascii 1.0\n")
      << "comment units mm\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar label\n"
      << "end_header\n";
  if (binary) {
    for (size_t i = 0; i < cloud.size(); ++i) {
      const float xyz[3] = {float(cloud.points[i].x()),
                            float(cloud.points[i].y()),
                            float(cloud.points[i].z())};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      out.write(reinterpret_cast<const char*>(&cloud.labels[i]), 1);
    }
  } else {
    char line[128];
    for (size_t i = 0; i < cloud.size(); ++i) {
      std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %u\n",
                    cloud.points[i].x(), cloud.points[i].y(),
                    cloud.points[i].z(), unsigned(cloud.labels[i]));
      out << line;
    }
  }
  if (!out) fail(path, "write failed");
}

LabeledPointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
    fail(path, "missing ply magic");
  }
  bool binary = false;
  bool format_seen = false;
  size_t count = 0;
  std::vector<std::string> properties;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string kind;
      ls >> kind;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        fail(path, "unsupported ply format " + kind);
      }
      format_seen = true;
    } else if (tok == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") fail(path, "unsupported ply element " + name);
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      properties.push_back(type + " " + name);
    } else if (tok == "end_header") {
      break;
    } else {
      fail(path, "unexpected header line: " + line);
    }
  }
  if (!format_seen) fail(path, "ply header missing format");
  const std::vector<std::string> expected = {"float x", "float y", "float z",
                                             "uchar label"};
  if (properties != expected) {
    fail(path, "unsupported vertex layout (need float x,y,z + uchar label)");
  }

  LabeledPointCloud cloud;
  cloud.points.reserve(count);
  cloud.labels.reserve(count);
  if (binary) {
    for (size_t i = 0; i < count; ++i) {
      float xyz[3];
      uint8_t label;
      in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
      in.read(reinterpret_cast<char*>(&label), 1);
      if (!in) fail(path, "truncated binary vertex data");
      cloud.append(Eigen::Vector3d(xyz[0], xyz[1], xyz[2]), label);
    }
  } else {
    for (size_t i = 0; i < count; ++i) {
      double x, y, z;
      unsigned label;
      if (!(in >> x >> y >> z >> label)) {
        fail(path, "truncated ascii vertex data");
      }
      cloud.append(Eigen::Vector3d(x, y, z), uint8_t(label));
    }
  }
  return cloud;
}

}  // namespace orrecon::io
