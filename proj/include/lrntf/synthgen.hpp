// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lrntf/gbm.hpp"
#include "lrntf/tensor.hpp"

namespace lrntf {

using Rng = std::mt19937_64;

enum class MixKind { Gbm, Ppnm, Half };

const char *to_string(MixKind kind) noexcept;
/// Accepts "gbm", "ppnm", "half" (case-sensitive). Throws ConfigError.
MixKind parse_mix_kind(const std::string &name);

/// Synthetic scene parameters. The image is divided into square blocks of
/// side `s`; each block gets one randomly chosen endmember before smoothing.
struct SynthConfig {
  Index s = 10;       ///< block side
  Index size = 0;     ///< image side in pixels; 0 means s * s
  Index k = 9;        ///< box filter side, odd
  Index R = 6;        ///< endmembers, taken as the first R library columns
  double purity_cap = 0.8;
  MixKind mix = MixKind::Gbm;
  double ppnm_b = 0.25;
  double snr_db = 30.0;  ///< +inf disables noise
  std::uint64_t seed = 1;

  Index image_side() const noexcept { return size > 0 ? size : s * s; }
  /// Throws ConfigError when any invariant fails.
  void validate(Index library_size) const;
};

struct GroundTruth {
  Tensor3 A_true;
  Tensor3 B_true;  ///< zero on PPNM pixels (no GBM interaction terms there)
  Tensor3 gamma;   ///< per pixel, per pair; zero on PPNM pixels
  Tensor3 clean;
  Tensor3 noisy;
};

/// Independent generator for one purpose ("stream") of a seeded run.
Rng make_stream(std::uint64_t seed, std::uint32_t stream);

/// Block abundances, k x k box filter with half-sample symmetric padding,
/// per-pixel renormalisation, then any pixel whose largest abundance exceeds
/// purity_cap is replaced by the uniform vector 1/R.
Tensor3 gen_abundances(const SynthConfig &cfg, Rng &rng);

struct GbmMix {
  Tensor3 clean;
  Tensor3 B_true;
  Tensor3 gamma;
};

/// GBM synthesis with gamma ~ U(0, 1) per pixel and pair. Gamma is drawn in
/// pixel-major, pair-minor order.
GbmMix mix_gbm(const Tensor3 &A, const EndmemberSet &ems, Rng &rng);

/// PPNM synthesis: y = Ca + b (Ca) .* (Ca).
Tensor3 mix_ppnm(const Tensor3 &A, const EndmemberSet &ems, double b);

/// Left half (col < n_col / 2) GBM, right half PPNM. Gamma is drawn for every
/// pixel exactly as mix_gbm does, so the left half matches mix_gbm for the
/// same generator state.
GbmMix mix_half(const Tensor3 &A, const EndmemberSet &ems, Rng &rng, double ppnm_b);

/// White Gaussian noise with variance ||clean||_F^2 / (numel * 10^(snr_db/10)).
/// snr_db == +inf returns a copy of clean; NaN or -inf throw ConfigError.
Tensor3 add_noise(const Tensor3 &clean, double snr_db, Rng &rng);

/// Empirical SNR in dB of noisy relative to clean.
double realized_snr_db(const Tensor3 &clean, const Tensor3 &noisy);

struct SpectralLibrary {
  Mat C;  ///< bands x materials
  std::vector<std::string> names;
};

/// CSV with a header row of names and one row per band. Values must lie in
/// [0, 1]; anything else is rejected with the offending row/column.
SpectralLibrary load_spectral_library(const std::filesystem::path &path);
void write_spectral_library(const std::filesystem::path &path, const SpectralLibrary &lib);

/// First R library columns as an endmember set.
EndmemberSet select_endmembers(const SpectralLibrary &lib, Index R);

/// Full pipeline. Streams: 0 abundances, 1 interaction coefficients, 2 noise.
GroundTruth generate_scene(const SynthConfig &cfg, const EndmemberSet &ems);

}  // namespace lrntf
