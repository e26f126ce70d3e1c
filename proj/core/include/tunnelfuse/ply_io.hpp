#pragma once

#include "tunnelfuse/point_cloud.hpp"

#include <filesystem>

namespace tunnelfuse {

/// ASCII PLY with a single `vertex` element of float x, y, z.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads ASCII PLY vertices (x, y, z; extra properties ignored). Throws
/// IoError for unreadable or malformed files and non-finite coordinates.
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace tunnelfuse
