#include "audiofp/vectors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "audiofp/device.hpp"
#include "audiofp/digest.hpp"

namespace audiofp {
namespace {

constexpr std::array<std::string_view, kVectorCount> kNames = {
    "DC", "FFT", "Hybrid", "CustomSignal", "MergedSignals", "AM", "FM"};

AudioBuffer oscillator(WaveShape shape, double frequency, const RenderConfig& cfg) {
  return synth_wave_allow_silent(OscillatorSpec{shape, frequency, std::nullopt}, cfg.sample_rate,
                                 cfg.duration);
}

}  // namespace

std::string_view vector_name(VectorId v) { return kNames.at(vector_index(v)); }

std::optional<VectorId> parse_vector(std::string_view name) {
  for (VectorId v : kAllVectors) {
    if (vector_name(v) == name) return v;
  }
  return std::nullopt;
}

std::size_t RenderConfig::frame_offset() const {
  return static_cast<std::size_t>(std::llround(frame_offset_seconds * sample_rate));
}

AudioBuffer render_source(VectorId v, const RenderConfig& cfg) {
  switch (v) {
    case VectorId::DC:
    case VectorId::FFT:
    case VectorId::Hybrid:
      return synth_wave(OscillatorSpec{WaveShape::Triangle, cfg.triangle_frequency, std::nullopt},
                        cfg.sample_rate, cfg.duration);
    case VectorId::CustomSignal:
      return synth_wave(OscillatorSpec{WaveShape::Custom, cfg.custom_frequency,
                                       seeded_custom_wave(cfg.custom_seed)},
                        cfg.sample_rate, cfg.duration);
    case VectorId::MergedSignals: {
      const std::array<AudioBuffer, 4> inputs = {
          oscillator(WaveShape::Sine, cfg.merge_sine, cfg),
          oscillator(WaveShape::Triangle, cfg.merge_triangle, cfg),
          oscillator(WaveShape::Square, cfg.merge_square, cfg),
          oscillator(WaveShape::Sawtooth, cfg.merge_sawtooth, cfg)};
      return merge(inputs);
    }
    case VectorId::AM: {
      const std::array<Modulator, 2> mods = {
          Modulator{oscillator(WaveShape::Triangle, cfg.mod_triangle, cfg),
                    GainSpec{cfg.am_triangle_gain}},
          Modulator{oscillator(WaveShape::Square, cfg.mod_square, cfg),
                    GainSpec{cfg.am_square_gain}}};
      return am_modulate(mods, oscillator(WaveShape::Sine, cfg.carrier, cfg),
                         GainSpec{cfg.am_carrier_gain});
    }
    case VectorId::FM: {
      const std::array<Modulator, 2> mods = {
          Modulator{oscillator(WaveShape::Triangle, cfg.mod_triangle, cfg),
                    GainSpec{cfg.fm_triangle_gain}},
          Modulator{oscillator(WaveShape::Square, cfg.mod_square, cfg),
                    GainSpec{cfg.fm_square_gain}}};
      return fm_modulate(mods, cfg.carrier, cfg.sample_rate, cfg.duration);
    }
  }
  throw std::invalid_argument("unknown vector");
}

RenderedVector render_vector(VectorId v, const RenderConfig& cfg) {
  AudioBuffer source = render_source(v, cfg);
  if (v == VectorId::FFT) {
    // Oscillator straight into the analyser; no compressor on this path.
    return analyse_warm(source, cfg.analyser, cfg.frame_offset());
  }
  AudioBuffer compressed = compress(source, cfg.compressor);
  if (v == VectorId::DC) return compressed;
  return analyse_warm(compressed, cfg.analyser, cfg.frame_offset());
}

ElementaryFingerprint fingerprint_output(VectorId v, const RenderedVector& rendered,
                                         const DeviceProfile& device, std::size_t iteration,
                                         const RenderConfig& cfg) {
  if (v == VectorId::DC) {
    const auto& buf = std::get<AudioBuffer>(rendered);
    return {v, digest_buffer(perturb_buffer(buf, device.class_id).samples)};
  }
  const auto& frame = std::get<FrequencyFrame>(rendered);
  return {v, digest_buffer(perturb(frame, device, v, iteration, cfg.analyser.min_db).bins)};
}

IterationResult run_vector(VectorId v, const DeviceProfile& device, std::size_t iteration,
                           const RenderConfig& cfg) {
  device.validate();
  const auto start = std::chrono::steady_clock::now();
  const RenderedVector rendered = render_vector(v, cfg);
  ElementaryFingerprint fp = fingerprint_output(v, rendered, device, iteration, cfg);
  const auto stop = std::chrono::steady_clock::now();
  return {std::move(fp), std::chrono::duration_cast<Milliseconds>(stop - start)};
}

VectorRuns run_all(const DeviceProfile& device, std::size_t k, const RenderConfig& cfg) {
  if (k < 1) throw std::invalid_argument("iteration count must be >= 1");
  VectorRuns runs;
  for (VectorId v : kAllVectors) {
    auto& out = runs[vector_index(v)];
    out.reserve(k);
    for (std::size_t it = 0; it < k; ++it) out.push_back(run_vector(v, device, it, cfg));
  }
  return runs;
}

Engine::Engine(RenderConfig cfg) : cfg_(std::move(cfg)) {
  for (VectorId v : kAllVectors) rendered_[vector_index(v)] = render_vector(v, cfg_);
}

IterationResult Engine::run_vector(VectorId v, const DeviceProfile& device,
                                   std::size_t iteration) const {
  const auto start = std::chrono::steady_clock::now();
  const int variant = select_variant(device, v, iteration);
  Key key{vector_index(v), device.class_id, variant};
  std::string digest;
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) digest = it->second;
  }
  if (digest.empty()) {
    const auto& out = rendered(v);
    if (v == VectorId::DC) {
      digest = digest_buffer(perturb_buffer(std::get<AudioBuffer>(out), device.class_id).samples);
    } else {
      digest = digest_buffer(perturb_variant(std::get<FrequencyFrame>(out), device.class_id, v,
                                             variant, cfg_.analyser.min_db)
                                 .bins);
    }
    std::lock_guard lock(mutex_);
    memo_.emplace(std::move(key), digest);
  }
  const auto stop = std::chrono::steady_clock::now();
  return {ElementaryFingerprint{v, std::move(digest)},
          std::chrono::duration_cast<Milliseconds>(stop - start)};
}

VectorRuns Engine::run_all(const DeviceProfile& device, std::size_t k) const {
  if (k < 1) throw std::invalid_argument("iteration count must be >= 1");
  device.validate();
  VectorRuns runs;
  for (VectorId v : kAllVectors) {
    auto& out = runs[vector_index(v)];
    out.reserve(k);
    for (std::size_t it = 0; it < k; ++it) out.push_back(run_vector(v, device, it));
  }
  return runs;
}

}  // namespace audiofp
