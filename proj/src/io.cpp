// SPDX-License-Identifier: Apache-2.0
#include "lrntf/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <vector>

#include <json.hpp>

namespace lrntf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char *kOrder = "row-major (row,col,band)";

void to_little_endian(std::vector<char> &bytes) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i + 8 <= bytes.size(); i += 8) std::reverse(bytes.begin() + i, bytes.begin() + i + 8);
  }
}

}  // namespace

fs::path cube_header_path(const fs::path &payload) {
  fs::path h = payload;
  h += ".json";
  return h;
}

void write_cube(const fs::path &path, const Tensor3 &t) {
  std::vector<char> bytes(static_cast<std::size_t>(t.size()) * sizeof(double));
  if (!bytes.empty()) std::memcpy(bytes.data(), t.data(), bytes.size());
  to_little_endian(bytes);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  const json header = {{"n_row", t.n_row()},   {"n_col", t.n_col()},  {"bands", t.depth()},
                       {"dtype", "f64"},       {"order", kOrder},     {"endianness", "little"}};
  std::ofstream out(cube_header_path(path));
  if (!out) throw IoError("cannot open '" + cube_header_path(path).string() + "' for writing");
  out << header.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + cube_header_path(path).string() + "'");
}

Tensor3 read_cube(const fs::path &path) {
  using Reason = CubeFormatError::Reason;
  const fs::path hpath = cube_header_path(path);
  std::ifstream hin(hpath);
  if (!hin) throw CubeFormatError(Reason::MissingHeader, "cube header '" + hpath.string() + "' not found");

  Index n_row = 0, n_col = 0, bands = 0;
  try {
    const json h = json::parse(hin);
    n_row = h.at("n_row").get<Index>();
    n_col = h.at("n_col").get<Index>();
    bands = h.at("bands").get<Index>();
    const auto dtype = h.at("dtype").get<std::string>();
    if (dtype != "f64")
      throw CubeFormatError(Reason::DtypeMismatch, "cube header '" + hpath.string() + "': dtype '" +
                                                       dtype + "' is not supported (expected f64)");
    if (h.contains("endianness") && h["endianness"].get<std::string>() != "little")
      throw CubeFormatError(Reason::DtypeMismatch,
                            "cube header '" + hpath.string() + "': only little-endian payloads are supported");
    if (h.contains("order") && h["order"].get<std::string>() != kOrder)
      throw CubeFormatError(Reason::DtypeMismatch, "cube header '" + hpath.string() + "': unsupported order '" +
                                                       h["order"].get<std::string>() + "'");
  } catch (const json::exception &e) {
    throw CubeFormatError(Reason::CorruptHeader,
                          "cube header '" + hpath.string() + "' is corrupt: " + e.what());
  }
  if (n_row < 0 || n_col < 0 || bands < 0)
    throw CubeFormatError(Reason::CorruptHeader, "cube header '" + hpath.string() + "' has negative dimensions");

  std::error_code ec;
  const auto actual = fs::file_size(path, ec);
  if (ec) throw CubeFormatError(Reason::MissingPayload, "cube payload '" + path.string() + "' not found");
  const auto expected = static_cast<std::uintmax_t>(n_row * n_col * bands) * sizeof(double);
  if (actual % sizeof(double) != 0)
    throw CubeFormatError(Reason::Truncated, "cube payload '" + path.string() + "' truncated: expected " +
                                                 std::to_string(expected) + " bytes, found " +
                                                 std::to_string(actual) + " (partial value at offset " +
                                                 std::to_string(actual - actual % sizeof(double)) + ")");
  if (actual != expected)
    throw CubeFormatError(Reason::SizeMismatch,
                          "cube payload '" + path.string() + "' holds " + std::to_string(actual) +
                              " bytes but header '" + hpath.string() + "' (" + std::to_string(n_row) + "x" +
                              std::to_string(n_col) + "x" + std::to_string(bands) + ") implies " +
                              std::to_string(expected));

  std::vector<char> bytes(static_cast<std::size_t>(actual));
  std::ifstream in(path, std::ios::binary);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in && !bytes.empty())
    throw CubeFormatError(Reason::Truncated, "cube payload '" + path.string() + "': short read at offset " +
                                                 std::to_string(in.gcount()));
  to_little_endian(bytes);
  Tensor3 t(n_row, n_col, bands);
  if (!bytes.empty()) std::memcpy(t.data(), bytes.data(), bytes.size());
  return t;
}

std::uint8_t gray_level(double v, GrayBounds b) {
  const double x = 255.0 * (v - b.lo) / (b.hi - b.lo);
  return static_cast<std::uint8_t>(std::clamp(std::floor(x + 0.5), 0.0, 255.0));
}

void emit_gray_map(const Mat &m, const fs::path &path, std::optional<GrayBounds> shared) {
  if (!m.allFinite()) throw DomainError("emit_gray_map: matrix has non-finite entries");
  GrayBounds b = shared.value_or(GrayBounds{m.size() ? m.minCoeff() : 0.0, m.size() ? m.maxCoeff() : 0.0});
  const bool flat = !(b.hi > b.lo);

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(m.size()));
  std::size_t n = 0;
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) pixels[n++] = flat ? 128 : gray_level(m(r, c), b);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  out.write(reinterpret_cast<const char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");

  fs::path side = path;
  side += ".txt";
  std::ofstream note(side);
  if (!note) throw IoError("cannot open '" + side.string() + "' for writing");
  note << std::setprecision(17) << "lo " << b.lo << "\nhi " << b.hi << '\n'
       << "bounds " << (shared ? "shared" : "minmax") << '\n';
  if (flat) note << "note constant matrix, rendered mid-gray\n";
}

void write_trace_csv(const fs::path &path, const Trace &trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "iter,re,rmse,res_AV,res_BE,res_asc\n" << std::setprecision(17);
  auto cell = [&](const std::vector<double> &v, std::size_t i) {
    out << ',';
    if (i < v.size()) out << v[i];
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i + 1 << ',' << trace.re[i];
    cell(trace.rmse, i);
    cell(trace.res_av, i);
    cell(trace.res_be, i);
    cell(trace.res_asc, i);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace lrntf
