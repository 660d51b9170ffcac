#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "audiofp/execution.hpp"

namespace audiofp {

inline constexpr double kDefaultSampleRate = 44100.0;
inline constexpr double kDefaultDuration = 1.0;

struct AudioBuffer {
  double sample_rate = kDefaultSampleRate;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const AudioBuffer&) const = default;
};

enum class WaveShape { Sine, Triangle, Square, Sawtooth, Custom };

/// Fourier coefficients of a custom periodic wave. Index 0 (DC) is ignored.
struct PeriodicWaveCoefficients {
  std::vector<double> real;
  std::vector<double> imag;
  bool normalize = true;

  /// Throws std::invalid_argument unless real/imag have equal length >= 2
  /// and all entries are finite.
  void validate() const;
};

struct OscillatorSpec {
  WaveShape shape = WaveShape::Sine;
  double frequency = 440.0;
  std::optional<PeriodicWaveCoefficients> custom;
};

struct GainSpec {
  double gain = 1.0;
};

/// Number of harmonics n >= 1 with n * frequency strictly below Nyquist.
std::size_t harmonic_limit(double frequency, double sample_rate);

/// Value of the band-limited shape at continuous time t (seconds). Standard
/// sine/triangle/square/sawtooth Fourier series truncated below Nyquist.
double evaluate_shape(WaveShape shape, double frequency, double sample_rate, double t);

/// Band-limited oscillator render starting at phase 0. Rejects frequencies at
/// or above Nyquist and custom shapes without coefficients.
AudioBuffer synth_wave(const OscillatorSpec& spec, double sample_rate, double duration,
                       Execution exec = Execution::Serial);

/// Variant of synth_wave that renders an oscillator with an empty harmonic set
/// (frequency >= Nyquist) as silence instead of rejecting it.
AudioBuffer synth_wave_allow_silent(const OscillatorSpec& spec, double sample_rate,
                                    double duration, Execution exec = Execution::Serial);

/// x(t) = sum_{n>=1} real[n] cos(2 pi n f t) + imag[n] sin(2 pi n f t), restricted
/// to harmonics below Nyquist; when normalized, scaled so the peak absolute value
/// over one period is 1.
AudioBuffer eval_periodic_wave(const PeriodicWaveCoefficients& coeffs, double frequency,
                               double sample_rate, double duration,
                               Execution exec = Execution::Serial);

/// Peak |x| over one continuous period of the band-limited coefficient series.
double periodic_wave_peak(const PeriodicWaveCoefficients& coeffs, std::size_t harmonics);

/// The 12-entry custom wave used by the custom-signal vector: reals drawn
/// uniformly from [0, 1) by a splitmix64 stream, imag alternating 0 and pi/2.
PeriodicWaveCoefficients seeded_custom_wave(std::uint64_t seed, std::size_t length = 12);

AudioBuffer apply_gain(const AudioBuffer& buf, GainSpec g);

/// Sample-wise sum of equally shaped buffers (channel merge down-mixed to one
/// analysis channel).
AudioBuffer merge(std::span<const AudioBuffer> buffers);

using Modulator = std::pair<AudioBuffer, GainSpec>;

/// out[t] = carrier_gain * (1 + sum g_i * mod_i[t]) * carrier[t]
AudioBuffer am_modulate(std::span<const Modulator> modulators, const AudioBuffer& carrier,
                        GainSpec carrier_gain);

/// out[t] = sin(2 pi fc t + 2 pi sum g_i * integral_0^t mod_i), integral taken
/// as an exclusive cumulative sum scaled by 1/sample_rate.
AudioBuffer fm_modulate(std::span<const Modulator> modulators, double carrier_frequency,
                        double sample_rate, double duration);

}  // namespace audiofp
