#pragma once

#include <filesystem>

#include "uavrecon/geometry.hpp"

namespace uavrecon {

enum class PlyFormat { BinaryLittleEndian, Ascii };

/// Vertices as float x,y,z and uchar red,green,blue. Uncolored clouds are
/// written white.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::BinaryLittleEndian);

/// Reads files produced by write_ply (either format). Coordinates come back
/// as the stored 32-bit floats widened to double.
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace uavrecon
