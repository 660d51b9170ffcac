#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "audiofp/dsp.hpp"
#include "oracles.hpp"

using namespace audiofp;
using Catch::Approx;

namespace {

std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

}  // namespace

TEST_CASE("compressor static curve") {
  const CompressorParams p;
  CHECK(compress_curve(-60.0, p) == -60.0);
  // knee: x + (1/r - 1) (x - T + k/2)^2 / (2k) at x = -24
  const double knee = -24.0 + (1.0 / 12.0 - 1.0) * 15.0 * 15.0 / 60.0;
  CHECK(knee == -27.4375);
  CHECK(compress_curve(-24.0, p) == Approx(knee).margin(1e-12));
  CHECK(compress_curve(0.0, p) == Approx(-24.0 + 24.0 / 12.0).margin(1e-12));
}

TEST_CASE("compressor curve is continuous and monotone") {
  const CompressorParams p;
  for (double edge : {-39.0, -9.0}) {
    CHECK(std::abs(compress_curve(edge - 1e-10, p) - compress_curve(edge + 1e-10, p)) < 1e-9);
  }
  double prev = compress_curve(-100.0, p);
  for (int i = 1; i <= 10000; ++i) {
    const double y = compress_curve(-100.0 + 0.01 * i, p);
    REQUIRE(y >= prev);
    prev = y;
  }
  CompressorParams hard = p;
  hard.knee_db = 0.0;
  CHECK(compress_curve(-24.0, hard) == Approx(-24.0));
  CHECK(compress_curve(-12.0, hard) == Approx(-23.0));
}

TEST_CASE("compressor parameters are validated") {
  CompressorParams p;
  p.ratio = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.knee_db = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.attack = std::nan("");
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("compress on simple inputs") {
  const CompressorParams p;
  const AudioBuffer silent{44100.0, std::vector<double>(4410, 0.0)};
  CHECK(compress(silent, p) == silent);

  const AudioBuffer quiet{44100.0, std::vector<double>(44100, 0.001)};  // -60 dB
  const AudioBuffer q = compress(quiet, p);
  for (std::size_t i = 22050; i < q.size(); ++i) REQUIRE(std::abs(q.samples[i] - 0.001) < 1e-9);

  const AudioBuffer loud{44100.0, std::vector<double>(44100, 1.0)};  // 0 dB
  const AudioBuffer l = compress(loud, p);
  CHECK(20.0 * std::log10(l.samples.back()) == Approx(-22.0).margin(0.1));
}

TEST_CASE("fft edge cases") {
  CHECK_THROWS_AS(fft(std::vector<double>(6, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(fft(std::vector<double>{}), std::invalid_argument);

  for (const Complex& c : fft(std::vector<double>(64, 0.0))) CHECK(c == Complex(0.0, 0.0));

  std::vector<double> impulse(64, 0.0);
  impulse[0] = 1.0;
  for (const Complex& c : fft(impulse)) {
    CHECK(c.real() == Approx(1.0).margin(1e-15));
    CHECK(c.imag() == Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("fft matches the naive DFT") {
  for (std::size_t n : {2u, 8u, 64u, 512u, 2048u}) {
    const auto x = random_signal(n, static_cast<unsigned>(n));
    const auto fast = fft(x);
    const auto slow = oracle::naive_dft(x);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(fast[k] - slow[k]));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("fft round trip and Parseval") {
  const auto x = random_signal(4096, 7);
  const auto X = fft(x);
  const auto back = inverse_fft(X);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - Complex(x[i], 0.0)));
  CHECK(err < 1e-9);

  double time_energy = 0.0;
  double freq_energy = 0.0;
  for (double v : x) time_energy += v * v;
  for (const Complex& c : X) freq_energy += std::norm(c);
  freq_energy /= static_cast<double>(x.size());
  CHECK(std::abs(time_energy - freq_energy) / time_energy < 1e-9);
}

TEST_CASE("analyser config validation") {
  AnalyserConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.fft_size = 1000;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.fft_size = 16;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.fft_size = 65536;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.smoothing = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("analyse on silence is floored") {
  const AnalyserConfig cfg;
  const AudioBuffer silent{44100.0, std::vector<double>(4096, 0.0)};
  const FrequencyFrame f = analyse(silent, cfg, 0);
  REQUIRE(f.bins.size() == 1024);
  for (double b : f.bins) CHECK(b == cfg.min_db);
  CHECK_THROWS_AS(analyse(silent, cfg, 2049), std::out_of_range);
}

TEST_CASE("analyse finds a bin-centred cosine at the window's coherent gain") {
  AnalyserConfig cfg;
  cfg.smoothing = 0.0;
  const std::size_t n = cfg.fft_size;
  const std::size_t k0 = 100;
  AudioBuffer buf{44100.0, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    buf.samples[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k0 * i) / static_cast<double>(n));
  }
  const FrequencyFrame f = analyse(buf, cfg, 0);
  const auto peak = std::max_element(f.bins.begin(), f.bins.end());
  CHECK(static_cast<std::size_t>(peak - f.bins.begin()) == k0);

  // Blackman window through the oracle DFT.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    w[i] = buf.samples[i] * (0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t));
  }
  const auto X = oracle::naive_dft(w);
  const double expected = 20.0 * std::log10(std::abs(X[k0]) / static_cast<double>(n));
  CHECK(*peak == Approx(expected).margin(1e-9));
  CHECK(*peak == Approx(20.0 * std::log10(0.21)).margin(1e-3));
}

TEST_CASE("smoothing reaches a fixed point on identical frames") {
  const AnalyserConfig cfg;
  AudioBuffer buf{44100.0, random_signal(2048, 3)};
  const FrequencyFrame once = analyse(buf, cfg, 0);
  const FrequencyFrame twice = analyse(buf, cfg, 0, once);
  // prev = m_once = 0.2 m, next = 0.8 * 0.2 m + 0.2 m = 0.36 m
  for (std::size_t k = 0; k < once.magnitudes.size(); ++k) {
    REQUIRE(twice.magnitudes[k] == Approx(once.magnitudes[k] * 1.8).epsilon(1e-12));
  }
  FrequencyFrame state = once;
  for (int i = 0; i < 200; ++i) state = analyse(buf, cfg, 0, state);
  const FrequencyFrame next = analyse(buf, cfg, 0, state);
  for (std::size_t k = 0; k < next.bins.size(); ++k) {
    REQUIRE(next.bins[k] == Approx(state.bins[k]).margin(1e-9));
  }
}

TEST_CASE("analyse is deterministic and never below the floor") {
  const AnalyserConfig cfg;
  AudioBuffer buf{44100.0, random_signal(44100, 11)};
  const FrequencyFrame a = analyse_warm(buf, cfg, 22050);
  CHECK(a == analyse_warm(buf, cfg, 22050));
  for (double b : a.bins) {
    CHECK(std::isfinite(b));
    CHECK(b >= cfg.min_db);
  }
}
