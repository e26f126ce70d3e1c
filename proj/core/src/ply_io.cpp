#include "tunnelfuse/ply_io.hpp"

#include "tunnelfuse/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace tunnelfuse {

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  if (!out) throw IoError(path.string(), "write failed");
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");

  std::string line;
  if (!std::getline(in, line) || line != "ply") {
    throw IoError(path.string(), "missing 'ply' magic");
  }
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (tok == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex && !(ls >> vertex_count)) {
        throw IoError(path.string(), "bad vertex count");
      }
    } else if (tok == "property" && in_vertex) {
      std::string type;
      std::string name;
      ls >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) throw IoError(path.string(), "only ASCII PLY is supported");
  int ix = -1, iy = -1, iz = -1;
  for (int i = 0; i < static_cast<int>(props.size()); ++i) {
    if (props[i] == "x") ix = i;
    if (props[i] == "y") iy = i;
    if (props[i] == "z") iz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw IoError(path.string(), "vertex lacks x/y/z");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  std::vector<double> vals(props.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) throw IoError(path.string(), "truncated vertex list");
    std::istringstream ls(line);
    for (auto& x : vals) {
      std::string tok;
      if (!(ls >> tok)) throw IoError(path.string(), "short vertex row " + std::to_string(v));
      try {
        x = std::stod(tok);
      } catch (const std::exception&) {
        throw IoError(path.string(), "bad number '" + tok + "' in vertex " + std::to_string(v));
      }
    }
    const Eigen::Vector3d p(vals[ix], vals[iy], vals[iz]);
    if (!p.allFinite()) {
      throw IoError(path.string(), "non-finite coordinate in vertex " + std::to_string(v));
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace tunnelfuse
