#pragma once

#include <string>
#include <vector>

#include "radiff/field.hpp"

namespace radiff {

/// 17-significant-digit text form of a double (lossless round-trip).
std::string format_g17(double v);

/// Write a CSV file: header line then one line per row.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

/// Binary field dump: little-endian 64-bit floats, cell index fastest with
/// layout ((m*nz + iz)*ny + iy)*nx + ix, plus a key=value header sidecar at
/// path + ".hdr" (nx, ny, nz, lx, ly, lz, n_dirs, time, epsilon; scalar dumps
/// use n_dirs = 0).
void dump_scalar(const std::string& path, const ScalarField& f, double time, double epsilon);
void dump_directional(const std::string& path, const DirectionalField& f, double time,
                      double epsilon);

ScalarField load_scalar(const std::string& path);
DirectionalField load_directional(const std::string& path);

}  // namespace radiff
