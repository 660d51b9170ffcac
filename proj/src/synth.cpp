#include "audiofp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace audiofp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t sample_count(double sample_rate, double duration) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("sample rate must be positive and finite");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("duration must be positive and finite");
  }
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

double frac(double x) { return x - std::floor(x); }

// Phase source for sample i. When both frequency and sample rate are integers
// the phase is the exact rational ((i * p) mod q) / q, which makes renders
// exactly periodic and lets harmonic arguments be reduced in integer arithmetic.
class PhaseGrid {
 public:
  PhaseGrid(double frequency, double sample_rate) {
    if (frequency == std::floor(frequency) && sample_rate == std::floor(sample_rate) &&
        frequency < 9.0e15 && sample_rate < 9.0e15) {
      const auto f = static_cast<std::int64_t>(frequency);
      const auto fs = static_cast<std::int64_t>(sample_rate);
      const std::int64_t g = std::gcd(f, fs);
      p_ = f / g;
      q_ = fs / g;
      exact_ = true;
    }
    frequency_ = frequency;
    sample_rate_ = sample_rate;
  }

  bool exact() const { return exact_; }
  std::int64_t period() const { return q_; }

  std::int64_t residue(std::size_t i) const {
    return static_cast<std::int64_t>((static_cast<unsigned __int128>(i) * p_) % q_);
  }

  // Angle of harmonic n at residue r (exact path).
  double angle(std::int64_t r, std::size_t n) const {
    const auto m = static_cast<std::int64_t>((static_cast<unsigned __int128>(r) * n) % q_);
    return kTwoPi * static_cast<double>(m) / static_cast<double>(q_);
  }

  // Phase fraction of sample i (inexact path).
  double phase(std::size_t i) const {
    return std::fmod(static_cast<double>(i) * frequency_, sample_rate_) / sample_rate_;
  }

 private:
  bool exact_ = false;
  std::int64_t p_ = 0;
  std::int64_t q_ = 1;
  double frequency_ = 0.0;
  double sample_rate_ = 1.0;
};

// Standard series, normalized to unit peak for the ideal shape.
// `sin_n(n)` returns sin(n * theta).
template <class SinN>
double shape_series(WaveShape shape, std::size_t harmonics, SinN&& sin_n) {
  using std::numbers::pi;
  double acc = 0.0;
  switch (shape) {
    case WaveShape::Sine:
      return harmonics >= 1 ? sin_n(1) : 0.0;
    case WaveShape::Square:
      for (std::size_t n = 1; n <= harmonics; n += 2) acc += sin_n(n) / static_cast<double>(n);
      return acc * (4.0 / pi);
    case WaveShape::Sawtooth:
      for (std::size_t n = 1; n <= harmonics; ++n) {
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        acc += sign * sin_n(n) / static_cast<double>(n);
      }
      return acc * (2.0 / pi);
    case WaveShape::Triangle:
      for (std::size_t n = 1; n <= harmonics; n += 2) {
        const double sign = ((n - 1) / 2 % 2 == 0) ? 1.0 : -1.0;
        const auto nd = static_cast<double>(n);
        acc += sign * sin_n(n) / (nd * nd);
      }
      return acc * (8.0 / (pi * pi));
    case WaveShape::Custom:
      break;
  }
  throw std::invalid_argument("custom shape has no standard series");
}

template <class CosN, class SinN>
double custom_series(const PeriodicWaveCoefficients& c, std::size_t harmonics, CosN&& cos_n,
                     SinN&& sin_n) {
  const std::size_t top = std::min(harmonics, c.real.size() - 1);
  double acc = 0.0;
  for (std::size_t n = 1; n <= top; ++n) {
    acc += c.real[n] * cos_n(n) + c.imag[n] * sin_n(n);
  }
  return acc;
}

// Renders `value(angle_of_harmonic)` for every sample. In the exact path the
// distinct phases (at most one period) are tabulated first.
template <class Eval>
std::vector<double> render_phases(const PhaseGrid& grid, std::size_t count, Execution exec,
                                  Eval&& eval) {
  std::vector<double> out(count);
  const bool parallel = exec == Execution::Parallel;
  if (grid.exact()) {
    const auto q = static_cast<std::size_t>(grid.period());
    if (q <= count) {
      std::vector<double> table(q);
      const auto tq = static_cast<std::int64_t>(q);
#pragma omp parallel for schedule(static) if (parallel)
      for (std::int64_t r = 0; r < tq; ++r) {
        table[static_cast<std::size_t>(r)] =
            eval([&](std::size_t n) { return grid.angle(r, n); });
      }
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = table[static_cast<std::size_t>(grid.residue(i))];
      }
    } else {
      const auto tn = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) if (parallel)
      for (std::int64_t i = 0; i < tn; ++i) {
        const std::int64_t r = grid.residue(static_cast<std::size_t>(i));
        out[static_cast<std::size_t>(i)] = eval([&](std::size_t n) { return grid.angle(r, n); });
      }
    }
    return out;
  }
  const auto tn = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < tn; ++i) {
    const double phase = grid.phase(static_cast<std::size_t>(i));
    out[static_cast<std::size_t>(i)] = eval([&](std::size_t n) {
      return kTwoPi * frac(static_cast<double>(n) * phase);
    });
  }
  return out;
}

void check_frequency(double frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw std::invalid_argument("oscillator frequency must be positive and finite");
  }
}

AudioBuffer render_oscillator(const OscillatorSpec& spec, double sample_rate, double duration,
                              Execution exec, bool allow_silent) {
  check_frequency(spec.frequency);
  const std::size_t count = sample_count(sample_rate, duration);
  if (spec.frequency >= sample_rate / 2.0 && !allow_silent) {
    throw std::invalid_argument("oscillator frequency " + std::to_string(spec.frequency) +
                                " Hz is at or above Nyquist");
  }
  if (spec.shape == WaveShape::Custom) {
    if (!spec.custom) throw std::invalid_argument("custom oscillator requires coefficients");
    if (spec.frequency >= sample_rate / 2.0) {
      return AudioBuffer{sample_rate, std::vector<double>(count, 0.0)};
    }
    return eval_periodic_wave(*spec.custom, spec.frequency, sample_rate, duration, exec);
  }
  const std::size_t harmonics = harmonic_limit(spec.frequency, sample_rate);
  const PhaseGrid grid(spec.frequency, sample_rate);
  auto samples = render_phases(grid, count, exec, [&](auto&& angle) {
    return shape_series(spec.shape, harmonics, [&](std::size_t n) { return std::sin(angle(n)); });
  });
  return AudioBuffer{sample_rate, std::move(samples)};
}

void check_same_shape(const AudioBuffer& a, const AudioBuffer& b, const char* what) {
  if (a.sample_rate != b.sample_rate || a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": buffers differ in sample rate or length");
  }
}

}  // namespace

void PeriodicWaveCoefficients::validate() const {
  if (real.size() != imag.size()) {
    throw std::invalid_argument("periodic wave: real and imag lengths differ");
  }
  if (real.size() < 2) {
    throw std::invalid_argument("periodic wave: at least two coefficients required");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(real.begin(), real.end(), finite) ||
      !std::all_of(imag.begin(), imag.end(), finite)) {
    throw std::invalid_argument("periodic wave: coefficients must be finite");
  }
}

std::size_t harmonic_limit(double frequency, double sample_rate) {
  check_frequency(frequency);
  const double nyquist = sample_rate / 2.0;
  if (frequency >= nyquist) return 0;
  auto n = static_cast<std::size_t>(std::floor(nyquist / frequency));
  while (n > 0 && static_cast<double>(n) * frequency >= nyquist) --n;
  return n;
}

double evaluate_shape(WaveShape shape, double frequency, double sample_rate, double t) {
  const std::size_t harmonics = harmonic_limit(frequency, sample_rate);
  const double phase = frac(frequency * t);
  return shape_series(shape, harmonics, [&](std::size_t n) {
    return std::sin(kTwoPi * frac(static_cast<double>(n) * phase));
  });
}

AudioBuffer synth_wave(const OscillatorSpec& spec, double sample_rate, double duration,
                       Execution exec) {
  return render_oscillator(spec, sample_rate, duration, exec, false);
}

AudioBuffer synth_wave_allow_silent(const OscillatorSpec& spec, double sample_rate,
                                    double duration, Execution exec) {
  return render_oscillator(spec, sample_rate, duration, exec, true);
}

double periodic_wave_peak(const PeriodicWaveCoefficients& coeffs, std::size_t harmonics) {
  coeffs.validate();
  const std::size_t top = std::min(harmonics, coeffs.real.size() - 1);
  auto value = [&](double phi) {
    double v = 0.0;
    for (std::size_t n = 1; n <= top; ++n) {
      const double a = kTwoPi * static_cast<double>(n) * phi;
      v += coeffs.real[n] * std::cos(a) + coeffs.imag[n] * std::sin(a);
    }
    return v;
  };
  // First and second derivative with respect to phi.
  auto derivs = [&](double phi) {
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t n = 1; n <= top; ++n) {
      const double w = kTwoPi * static_cast<double>(n);
      const double a = w * phi;
      const double c = std::cos(a);
      const double s = std::sin(a);
      d1 += w * (-coeffs.real[n] * s + coeffs.imag[n] * c);
      d2 += -w * w * (coeffs.real[n] * c + coeffs.imag[n] * s);
    }
    return std::pair{d1, d2};
  };

  const std::size_t grid = std::max<std::size_t>(4096, 64 * (top + 1));
  const double step = 1.0 / static_cast<double>(grid);
  double best_phi = 0.0;
  double best = -1.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double phi = static_cast<double>(i) * step;
    const double v = std::abs(value(phi));
    if (v > best) {
      best = v;
      best_phi = phi;
    }
  }
  // Newton on the derivative, confined to the bracketing grid cell pair.
  double phi = best_phi;
  for (int iter = 0; iter < 50; ++iter) {
    const auto [d1, d2] = derivs(phi);
    if (d2 == 0.0) break;
    double delta = -d1 / d2;
    delta = std::clamp(delta, -step, step);
    const double next = std::clamp(phi + delta, best_phi - step, best_phi + step);
    if (std::abs(next - phi) < 1e-17) break;
    phi = next;
  }
  return std::max(best, std::abs(value(phi)));
}

AudioBuffer eval_periodic_wave(const PeriodicWaveCoefficients& coeffs, double frequency,
                               double sample_rate, double duration, Execution exec) {
  coeffs.validate();
  check_frequency(frequency);
  const std::size_t count = sample_count(sample_rate, duration);
  const std::size_t harmonics = harmonic_limit(frequency, sample_rate);
  double scale = 1.0;
  if (coeffs.normalize) {
    const double peak = periodic_wave_peak(coeffs, harmonics);
    if (!(peak > 0.0)) {
      throw std::invalid_argument("periodic wave: cannot normalize an all-zero wave");
    }
    scale = 1.0 / peak;
  }
  const PhaseGrid grid(frequency, sample_rate);
  auto samples = render_phases(grid, count, exec, [&](auto&& angle) {
    return scale * custom_series(
                       coeffs, harmonics, [&](std::size_t n) { return std::cos(angle(n)); },
                       [&](std::size_t n) { return std::sin(angle(n)); });
  });
  return AudioBuffer{sample_rate, std::move(samples)};
}

PeriodicWaveCoefficients seeded_custom_wave(std::uint64_t seed, std::size_t length) {
  PeriodicWaveCoefficients c;
  c.real.resize(length);
  c.imag.resize(length);
  std::uint64_t state = seed;
  for (std::size_t n = 0; n < length; ++n) {
    // splitmix64
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    c.real[n] = static_cast<double>(z >> 11) * 0x1.0p-53;
    c.imag[n] = (n % 2 == 1) ? std::numbers::pi / 2.0 : 0.0;
  }
  c.normalize = true;
  return c;
}

AudioBuffer apply_gain(const AudioBuffer& buf, GainSpec g) {
  AudioBuffer out{buf.sample_rate, buf.samples};
  for (double& s : out.samples) s *= g.gain;
  return out;
}

AudioBuffer merge(std::span<const AudioBuffer> buffers) {
  if (buffers.empty()) throw std::invalid_argument("merge: no input buffers");
  AudioBuffer out{buffers.front().sample_rate, std::vector<double>(buffers.front().size(), 0.0)};
  for (const AudioBuffer& b : buffers) {
    check_same_shape(buffers.front(), b, "merge");
    for (std::size_t i = 0; i < b.size(); ++i) out.samples[i] += b.samples[i];
  }
  return out;
}

AudioBuffer am_modulate(std::span<const Modulator> modulators, const AudioBuffer& carrier,
                        GainSpec carrier_gain) {
  for (const auto& [mod, g] : modulators) check_same_shape(carrier, mod, "am_modulate");
  AudioBuffer out{carrier.sample_rate, std::vector<double>(carrier.size())};
  for (std::size_t i = 0; i < carrier.size(); ++i) {
    double envelope = 1.0;
    for (const auto& [mod, g] : modulators) envelope += g.gain * mod.samples[i];
    out.samples[i] = carrier_gain.gain * envelope * carrier.samples[i];
  }
  return out;
}

AudioBuffer fm_modulate(std::span<const Modulator> modulators, double carrier_frequency,
                        double sample_rate, double duration) {
  check_frequency(carrier_frequency);
  const std::size_t count = sample_count(sample_rate, duration);
  for (const auto& [mod, g] : modulators) {
    if (mod.sample_rate != sample_rate || mod.size() != count) {
      throw std::invalid_argument("fm_modulate: modulator differs in sample rate or length");
    }
  }
  const PhaseGrid grid(carrier_frequency, sample_rate);
  AudioBuffer out{sample_rate, std::vector<double>(count)};
  double integral = 0.0;  // sum_i g_i * integral of mod_i, in cycles
  for (std::size_t i = 0; i < count; ++i) {
    const double carrier_phase = grid.exact()
                                     ? static_cast<double>(grid.residue(i)) /
                                           static_cast<double>(grid.period())
                                     : grid.phase(i);
    out.samples[i] = std::sin(kTwoPi * frac(carrier_phase + frac(integral)));
    double drive = 0.0;
    for (const auto& [mod, g] : modulators) drive += g.gain * mod.samples[i];
    integral += drive / sample_rate;
  }
  return out;
}

}  // namespace audiofp
