#pragma once

#include <filesystem>

#include "motsim/model.hpp"

namespace motsim {

struct IoError : SimError {
  using SimError::SimError;
};
struct FormatError : SimError {
  using SimError::SimError;
};

/// Field snapshot, fixed binary layout, little-endian throughout:
///   bytes 0..3   magic "KSF1"
///   u32 nx, u32 ny
///   f64 lx, f64 ly, f64 t
///   f64[nx*ny] u, f64[nx*ny] v, f64[nx*ny] w   (row-major, x index first)
/// Total size: 4 + 8 + 24 + 24*nx*ny bytes.
void write_snapshot(const FieldState& state, const std::filesystem::path& path);

/// Throws FormatError on magic/size mismatch, IoError on read failure.
FieldState read_snapshot(const std::filesystem::path& path);

}  // namespace motsim
