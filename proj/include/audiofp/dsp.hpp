#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "audiofp/synth.hpp"

namespace audiofp {

struct CompressorParams {
  double threshold_db = -24.0;
  double knee_db = 30.0;
  double ratio = 12.0;
  double attack = 0.003;   // seconds
  double release = 0.25;   // seconds

  void validate() const;
};

struct AnalyserConfig {
  std::size_t fft_size = 2048;
  double smoothing = 0.8;
  double min_db = -100.0;

  void validate() const;
};

// `bins` is what gets hashed. `magnitudes` holds the smoothed linear
// magnitudes and is the state carried into the next analyse() call.
struct FrequencyFrame {
  std::vector<double> bins;
  std::vector<double> magnitudes;

  bool operator==(const FrequencyFrame&) const = default;
};

/// Soft-knee static compression curve, dB in -> dB out.
double compress_curve(double x_db, const CompressorParams& p);

/// Per-sample peak detection, static curve, one-pole attack/release smoothing
/// of the gain reduction (in dB), applied multiplicatively.
AudioBuffer compress(const AudioBuffer& buf, const CompressorParams& p);

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

/// Iterative radix-2 DFT, X[k] = sum x[n] e^{-2 pi i k n / N}.
std::vector<Complex> fft(std::span<const Complex> signal);
std::vector<Complex> fft(std::span<const double> signal);

/// Inverse of fft(), including the 1/N factor.
std::vector<Complex> inverse_fft(std::span<const Complex> spectrum);

/// Blackman-windowed magnitude spectrum of buf[offset, offset + fft_size),
/// scaled by 1/fft_size, smoothed against `prev`, converted to dB and floored.
FrequencyFrame analyse(const AudioBuffer& buf, const AnalyserConfig& cfg, std::size_t frame_offset,
                       const std::optional<FrequencyFrame>& prev = std::nullopt);

/// Runs analyse() over consecutive fft_size blocks ending at `frame_offset`,
/// threading the smoothing state, and returns the last frame.
FrequencyFrame analyse_warm(const AudioBuffer& buf, const AnalyserConfig& cfg,
                            std::size_t frame_offset);

}  // namespace audiofp
