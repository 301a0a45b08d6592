// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lrntf/error.hpp"
#include "lrntf/solver.hpp"
#include "lrntf/tensor.hpp"

namespace lrntf {

/// Cube file: raw little-endian f64 payload at `path`, in Tensor3 storage
/// order, plus a JSON header at `path + ".json"`:
///   {"n_row":..,"n_col":..,"bands":..,"dtype":"f64",
///    "order":"row-major (row,col,band)","endianness":"little"}
class CubeFormatError : public IoError {
 public:
  enum class Reason { MissingHeader, CorruptHeader, DtypeMismatch, MissingPayload, Truncated, SizeMismatch };

  CubeFormatError(Reason reason, const std::string &what) : IoError(what), reason_{reason} {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

std::filesystem::path cube_header_path(const std::filesystem::path &payload);

void write_cube(const std::filesystem::path &path, const Tensor3 &t);
Tensor3 read_cube(const std::filesystem::path &path);

struct GrayBounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Writes an 8-bit binary PGM (P5). Values map to round-half-up(255 (v - lo) /
/// (hi - lo)), clamped to [0, 255]. Bounds default to the matrix min/max; pass
/// shared bounds to make maps from different runs comparable. The bounds used
/// are written to `path + ".txt"`. A constant matrix under min/max bounds maps
/// to 128 everywhere and the sidecar says so.
void emit_gray_map(const Mat &m, const std::filesystem::path &path,
                   std::optional<GrayBounds> shared = std::nullopt);

/// Gray level for one value under explicit bounds.
std::uint8_t gray_level(double v, GrayBounds b);

/// CSV columns: iter,re,rmse,res_AV,res_BE,res_asc. Missing series are left blank.
void write_trace_csv(const std::filesystem::path &path, const Trace &trace);

}  // namespace lrntf
