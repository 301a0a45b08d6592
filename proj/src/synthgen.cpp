// SPDX-License-Identifier: Apache-2.0
#include "lrntf/synthgen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lrntf/error.hpp"

namespace lrntf {

const char *to_string(MixKind kind) noexcept {
  switch (kind) {
    case MixKind::Gbm: return "gbm";
    case MixKind::Ppnm: return "ppnm";
    case MixKind::Half: return "half";
  }
  return "?";
}

MixKind parse_mix_kind(const std::string &name) {
  if (name == "gbm") return MixKind::Gbm;
  if (name == "ppnm") return MixKind::Ppnm;
  if (name == "half") return MixKind::Half;
  throw ConfigError("unknown mix kind '" + name + "' (expected gbm, ppnm or half)");
}

void SynthConfig::validate(Index library_size) const {
  if (s < 2) throw ConfigError("synth: block side s must be >= 2");
  if (size < 0) throw ConfigError("synth: image size must be >= 0");
  if (k < 1 || k % 2 == 0) throw ConfigError("synth: filter side k must be odd and >= 1");
  if (R < 2) throw ConfigError("synth: need R >= 2 endmembers");
  if (R > library_size)
    throw ConfigError("synth: R = " + std::to_string(R) + " exceeds library size " +
                      std::to_string(library_size));
  if (!(purity_cap * static_cast<double>(R) >= 1.0))
    throw ConfigError("synth: purity_cap must be at least 1/R");
  if (!std::isfinite(ppnm_b)) throw ConfigError("synth: ppnm_b must be finite");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw ConfigError("synth: snr_db must be finite or +inf");
}

Rng make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

namespace {

// Half-sample symmetric reflection: ... c b a | a b c ... | c b a ...
Index reflect(Index i, Index n) {
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Mat box_filter(const Mat &in, Index k) {
  if (k == 1) return in;
  const Index h = k / 2;
  const Index rows = in.rows(), cols = in.cols();
  Mat horiz(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double s = 0.0;
      for (Index d = -h; d <= h; ++d) s += in(r, reflect(c + d, cols));
      horiz(r, c) = s;
    }
  Mat out(rows, cols);
  const double norm = 1.0 / static_cast<double>(k * k);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double s = 0.0;
      for (Index d = -h; d <= h; ++d) s += horiz(reflect(r + d, rows), c);
      out(r, c) = s * norm;
    }
  return out;
}

}  // namespace

Tensor3 gen_abundances(const SynthConfig &cfg, Rng &rng) {
  cfg.validate(cfg.R);
  const Index side = cfg.image_side();
  const Index blocks = (side + cfg.s - 1) / cfg.s;
  std::uniform_int_distribution<Index> pick(0, cfg.R - 1);
  std::vector<Index> label(static_cast<std::size_t>(blocks * blocks));
  for (auto &l : label) l = pick(rng);

  Tensor3 A(side, side, cfg.R);
  for (Index k = 0; k < cfg.R; ++k) {
    Mat onehot = Mat::Zero(side, side);
    for (Index r = 0; r < side; ++r)
      for (Index c = 0; c < side; ++c)
        if (label[static_cast<std::size_t>((r / cfg.s) * blocks + c / cfg.s)] == k)
          onehot(r, c) = 1.0;
    set_slice(A, k, box_filter(onehot, cfg.k));
  }

  auto P = A.pixel_matrix();
  const double uniform = 1.0 / static_cast<double>(cfg.R);
  for (Index p = 0; p < P.rows(); ++p) {
    auto a = P.row(p);
    a /= a.sum();
    if (a.maxCoeff() > cfg.purity_cap) a.setConstant(uniform);
  }
  return A;
}

GbmMix mix_gbm(const Tensor3 &A, const EndmemberSet &ems, Rng &rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor3 gamma(A.n_row(), A.n_col(), ems.interactions());
  for (double &g : gamma.values()) {
    do g = unit(rng);
    while (g == 0.0);
  }
  Tensor3 B = interaction_bound(A, ems.pairs());
  auto b = B.values();
  auto g = gamma.values();
  for (std::size_t n = 0; n < b.size(); ++n) b[n] *= g[n];
  Tensor3 clean = forward({A, B}, ems);
  return {std::move(clean), std::move(B), std::move(gamma)};
}

Tensor3 mix_ppnm(const Tensor3 &A, const EndmemberSet &ems, double b) {
  if (A.depth() != ems.count()) throw ShapeError("mix_ppnm: abundance depth mismatch");
  Tensor3 y(A.n_row(), A.n_col(), ems.bands());
  auto Y = y.pixel_matrix();
  Y.noalias() = A.pixel_matrix() * ems.C().transpose();
  Y.array() += b * Y.array().square();
  return y;
}

GbmMix mix_half(const Tensor3 &A, const EndmemberSet &ems, Rng &rng, double ppnm_b) {
  GbmMix out = mix_gbm(A, ems, rng);
  const Tensor3 ppnm = mix_ppnm(A, ems, ppnm_b);
  const Index split = A.n_col() / 2;
  for (Index r = 0; r < A.n_row(); ++r)
    for (Index c = split; c < A.n_col(); ++c) {
      for (Index l = 0; l < ems.bands(); ++l) out.clean(r, c, l) = ppnm(r, c, l);
      for (Index q = 0; q < ems.interactions(); ++q) {
        out.B_true(r, c, q) = 0.0;
        out.gamma(r, c, q) = 0.0;
      }
    }
  return out;
}

Tensor3 add_noise(const Tensor3 &clean, double snr_db, Rng &rng) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw ConfigError("add_noise: snr_db must be finite or +inf");
  if (std::isinf(snr_db)) return clean;
  const double n = static_cast<double>(clean.size());
  const double sigma = std::sqrt(frob_norm_sq(clean) / (n * std::pow(10.0, snr_db / 10.0)));
  std::normal_distribution<double> noise(0.0, sigma);
  Tensor3 out = clean;
  for (double &v : out.values()) v += noise(rng);
  return out;
}

double realized_snr_db(const Tensor3 &clean, const Tensor3 &noisy) {
  if (!clean.same_dims(noisy)) throw ShapeError("realized_snr_db: shape mismatch");
  double signal = 0.0, noise = 0.0;
  auto c = clean.values();
  auto y = noisy.values();
  for (std::size_t i = 0; i < c.size(); ++i) {
    signal += c[i] * c[i];
    noise += (y[i] - c[i]) * (y[i] - c[i]);
  }
  return 10.0 * std::log10(signal / noise);
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SpectralLibrary load_spectral_library(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectral library '" + path.string() + "'");
  const std::string where = "spectral library '" + path.string() + "'";

  std::string line;
  std::vector<std::string> names;
  while (names.empty() && std::getline(in, line)) {
    if (trim(line).empty()) continue;
    for (auto &c : split_csv(line)) names.push_back(trim(c));
  }
  if (names.empty()) throw ParseError(where + ": empty file");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != names.size())
      throw ParseError(where + ": row " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(names.size()));
    std::vector<double> row;
    for (std::size_t col = 0; col < cells.size(); ++col) {
      const std::string cell = trim(cells[col]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError(where + ": non-numeric cell '" + cell + "' at row " +
                         std::to_string(lineno) + ", column " + std::to_string(col + 1));
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError(where + ": value " + cell + " at row " + std::to_string(lineno) +
                              ", column " + std::to_string(col + 1) + " outside [0, 1]");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(where + ": no data rows");

  SpectralLibrary lib{Mat(static_cast<Index>(rows.size()), static_cast<Index>(names.size())),
                      std::move(names)};
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      lib.C(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return lib;
}

void write_spectral_library(const std::filesystem::path &path, const SpectralLibrary &lib) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write spectral library '" + path.string() + "'");
  for (std::size_t c = 0; c < lib.names.size(); ++c) out << (c ? "," : "") << lib.names[c];
  out << '\n' << std::setprecision(17);
  for (Index r = 0; r < lib.C.rows(); ++r) {
    for (Index c = 0; c < lib.C.cols(); ++c) out << (c ? "," : "") << lib.C(r, c);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

EndmemberSet select_endmembers(const SpectralLibrary &lib, Index R) {
  if (R < 2 || R > lib.C.cols())
    throw ConfigError("select_endmembers: R = " + std::to_string(R) + " with library of " +
                      std::to_string(lib.C.cols()));
  std::vector<std::string> names(lib.names.begin(), lib.names.begin() + R);
  return EndmemberSet(lib.C.leftCols(R), std::move(names));
}

GroundTruth generate_scene(const SynthConfig &cfg, const EndmemberSet &ems) {
  cfg.validate(ems.count());
  if (cfg.R != ems.count())
    throw ConfigError("generate_scene: config R = " + std::to_string(cfg.R) + " but " +
                      std::to_string(ems.count()) + " endmembers supplied");
  Rng abundance_rng = make_stream(cfg.seed, 0);
  Rng mix_rng = make_stream(cfg.seed, 1);
  Rng noise_rng = make_stream(cfg.seed, 2);

  GroundTruth gt;
  gt.A_true = gen_abundances(cfg, abundance_rng);
  switch (cfg.mix) {
    case MixKind::Gbm: {
      auto m = mix_gbm(gt.A_true, ems, mix_rng);
      gt.clean = std::move(m.clean);
      gt.B_true = std::move(m.B_true);
      gt.gamma = std::move(m.gamma);
      break;
    }
    case MixKind::Ppnm:
      gt.clean = mix_ppnm(gt.A_true, ems, cfg.ppnm_b);
      gt.B_true = Tensor3(gt.A_true.n_row(), gt.A_true.n_col(), ems.interactions());
      gt.gamma = gt.B_true;
      break;
    case MixKind::Half: {
      auto m = mix_half(gt.A_true, ems, mix_rng, cfg.ppnm_b);
      gt.clean = std::move(m.clean);
      gt.B_true = std::move(m.B_true);
      gt.gamma = std::move(m.gamma);
      break;
    }
  }
  gt.noisy = add_noise(gt.clean, cfg.snr_db, noise_rng);
  return gt;
}

}  // namespace lrntf
