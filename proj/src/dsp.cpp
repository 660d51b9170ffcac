#include "audiofp/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace audiofp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t log2_exact(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

// In-place iterative Cooley-Tukey. `sign` is -1 for forward, +1 for inverse.
void transform(std::vector<Complex>& a, double sign) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft length " + std::to_string(n) + " is not a power of two");
  }
  const std::size_t bits = log2_exact(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    if (i < r) std::swap(a[i], a[r]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly per index; a running product drifts at large n.
    std::vector<Complex> twiddle(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(len);
      twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[start + k];
        const Complex v = a[start + k + half] * twiddle[k];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

}  // namespace

void CompressorParams::validate() const {
  if (!std::isfinite(threshold_db) || !std::isfinite(knee_db) || !std::isfinite(ratio) ||
      !std::isfinite(attack) || !std::isfinite(release)) {
    throw std::invalid_argument("compressor parameters must be finite");
  }
  if (knee_db < 0.0) throw std::invalid_argument("compressor knee must be >= 0 dB");
  if (ratio < 1.0) throw std::invalid_argument("compressor ratio must be >= 1");
  if (attack < 0.0 || release < 0.0) {
    throw std::invalid_argument("compressor attack/release must be >= 0");
  }
}

void AnalyserConfig::validate() const {
  if (fft_size < 32 || fft_size > 32768 || !is_power_of_two(fft_size)) {
    throw std::invalid_argument("analyser fft size must be a power of two in [32, 32768]");
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("analyser smoothing must be in [0, 1)");
  }
  if (!std::isfinite(min_db)) throw std::invalid_argument("analyser min dB must be finite");
}

double compress_curve(double x_db, const CompressorParams& p) {
  const double lower = p.threshold_db - p.knee_db / 2.0;
  const double upper = p.threshold_db + p.knee_db / 2.0;
  if (x_db <= lower) return x_db;
  if (x_db >= upper) return p.threshold_db + (x_db - p.threshold_db) / p.ratio;
  const double d = x_db - lower;
  return x_db + (1.0 / p.ratio - 1.0) * d * d / (2.0 * p.knee_db);
}

AudioBuffer compress(const AudioBuffer& buf, const CompressorParams& p) {
  p.validate();
  const double fs = buf.sample_rate;
  const double attack_coef = p.attack > 0.0 ? std::exp(-1.0 / (p.attack * fs)) : 0.0;
  const double release_coef = p.release > 0.0 ? std::exp(-1.0 / (p.release * fs)) : 0.0;

  AudioBuffer out{fs, std::vector<double>(buf.size())};
  double reduction_db = 0.0;  // <= 0
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double x = buf.samples[i];
    const double level = std::abs(x);
    double target = 0.0;
    if (level > 0.0) {
      const double in_db = 20.0 * std::log10(level);
      target = compress_curve(in_db, p) - in_db;
    }
    const double coef = target < reduction_db ? attack_coef : release_coef;
    reduction_db = target + coef * (reduction_db - target);
    out.samples[i] = x * std::pow(10.0, reduction_db / 20.0);
  }
  return out;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Complex> fft(std::span<const Complex> signal) {
  std::vector<Complex> a(signal.begin(), signal.end());
  transform(a, -1.0);
  return a;
}

std::vector<Complex> fft(std::span<const double> signal) {
  std::vector<Complex> a(signal.begin(), signal.end());
  transform(a, -1.0);
  return a;
}

std::vector<Complex> inverse_fft(std::span<const Complex> spectrum) {
  std::vector<Complex> a(spectrum.begin(), spectrum.end());
  transform(a, 1.0);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (Complex& c : a) c *= scale;
  return a;
}

FrequencyFrame analyse(const AudioBuffer& buf, const AnalyserConfig& cfg, std::size_t frame_offset,
                       const std::optional<FrequencyFrame>& prev) {
  cfg.validate();
  const std::size_t n = cfg.fft_size;
  if (frame_offset > buf.size() || buf.size() - frame_offset < n) {
    throw std::out_of_range("analysis frame [" + std::to_string(frame_offset) + ", " +
                            std::to_string(frame_offset + n) + ") exceeds buffer of " +
                            std::to_string(buf.size()) + " samples");
  }
  const std::size_t half = n / 2;
  if (prev && prev->magnitudes.size() != half) {
    throw std::invalid_argument("previous frame has a different bin count");
  }

  std::vector<Complex> windowed(n);
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / nd;
    const double w = 0.42 - 0.5 * std::cos(kTwoPi * x) + 0.08 * std::cos(2.0 * kTwoPi * x);
    windowed[i] = Complex(buf.samples[frame_offset + i] * w, 0.0);
  }
  transform(windowed, -1.0);

  FrequencyFrame frame;
  frame.bins.resize(half);
  frame.magnitudes.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    const double mag = std::abs(windowed[k]) / nd;
    const double previous = prev ? prev->magnitudes[k] : 0.0;
    const double smoothed = cfg.smoothing * previous + (1.0 - cfg.smoothing) * mag;
    frame.magnitudes[k] = smoothed;
    const double db = smoothed > 0.0 ? 20.0 * std::log10(smoothed) : cfg.min_db;
    frame.bins[k] = std::isfinite(db) && db > cfg.min_db ? db : cfg.min_db;
  }
  return frame;
}

FrequencyFrame analyse_warm(const AudioBuffer& buf, const AnalyserConfig& cfg,
                            std::size_t frame_offset) {
  cfg.validate();
  std::optional<FrequencyFrame> state;
  std::size_t offset = frame_offset % cfg.fft_size;
  for (; offset <= frame_offset; offset += cfg.fft_size) {
    state = analyse(buf, cfg, offset, state);
  }
  return *state;
}

}  // namespace audiofp
