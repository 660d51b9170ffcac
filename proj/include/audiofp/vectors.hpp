#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "audiofp/dsp.hpp"
#include "audiofp/synth.hpp"

namespace audiofp {

// Table order; also the serialization and run order.
enum class VectorId : std::uint8_t { DC, FFT, Hybrid, CustomSignal, MergedSignals, AM, FM };

inline constexpr std::size_t kVectorCount = 7;
inline constexpr std::array<VectorId, kVectorCount> kAllVectors = {
    VectorId::DC,           VectorId::FFT, VectorId::Hybrid, VectorId::CustomSignal,
    VectorId::MergedSignals, VectorId::AM, VectorId::FM};

std::string_view vector_name(VectorId v);
std::optional<VectorId> parse_vector(std::string_view name);
inline std::size_t vector_index(VectorId v) { return static_cast<std::size_t>(v); }
inline bool is_fft_family(VectorId v) { return v != VectorId::DC; }

struct ElementaryFingerprint {
  VectorId vector = VectorId::DC;
  std::string digest;  // 32 lowercase hex chars

  auto operator<=>(const ElementaryFingerprint&) const = default;
};

using Milliseconds = std::chrono::duration<double, std::milli>;

struct IterationResult {
  ElementaryFingerprint fingerprint;
  Milliseconds elapsed{0.0};

  bool operator==(const IterationResult&) const = default;
};

using VectorRuns = std::array<std::vector<IterationResult>, kVectorCount>;

/// Graph parameters shared by all seven pipelines.
struct RenderConfig {
  double sample_rate = kDefaultSampleRate;
  double duration = kDefaultDuration;
  double frame_offset_seconds = 0.5;

  double triangle_frequency = 10000.0;  // DC / FFT / Hybrid source
  double custom_frequency = 440.0;
  std::uint64_t custom_seed = 1;

  double merge_sine = 440.0;
  double merge_triangle = 10000.0;
  double merge_square = 1880.0;
  double merge_sawtooth = 22000.0;

  double mod_triangle = 440.0;
  double mod_square = 18.0;
  double carrier = 10000.0;
  double am_triangle_gain = 1.0;
  double am_square_gain = 1.0;
  double am_carrier_gain = 1.0;
  double fm_triangle_gain = 60.0;
  double fm_square_gain = 30.0;

  CompressorParams compressor;
  AnalyserConfig analyser;

  std::size_t frame_offset() const;
};

/// Unperturbed pipeline output: the full compressed buffer for DC, the analyser
/// frame for every FFT-family vector.
using RenderedVector = std::variant<AudioBuffer, FrequencyFrame>;

/// Signal feeding the vector's compressor/analyser stage.
AudioBuffer render_source(VectorId v, const RenderConfig& cfg);
RenderedVector render_vector(VectorId v, const RenderConfig& cfg);

struct DeviceProfile;

/// Applies the device perturbation to a rendered output and digests it.
ElementaryFingerprint fingerprint_output(VectorId v, const RenderedVector& rendered,
                                         const DeviceProfile& device, std::size_t iteration,
                                         const RenderConfig& cfg);

/// Full render + perturb + digest of one iteration, timed.
IterationResult run_vector(VectorId v, const DeviceProfile& device, std::size_t iteration,
                           const RenderConfig& cfg = {});

/// k iterations of every vector, in vector order.
VectorRuns run_all(const DeviceProfile& device, std::size_t k, const RenderConfig& cfg = {});

/// Renders each vector once and memoizes digests per (vector, class, variant);
/// perturbation is a pure function of those, so results equal run_vector().
/// Safe to share between threads.
class Engine {
 public:
  explicit Engine(RenderConfig cfg = {});

  const RenderConfig& config() const { return cfg_; }
  const RenderedVector& rendered(VectorId v) const { return rendered_[vector_index(v)]; }

  IterationResult run_vector(VectorId v, const DeviceProfile& device, std::size_t iteration) const;
  VectorRuns run_all(const DeviceProfile& device, std::size_t k) const;

 private:
  using Key = std::tuple<std::size_t, std::string, int>;

  RenderConfig cfg_;
  std::array<RenderedVector, kVectorCount> rendered_;
  mutable std::mutex mutex_;
  mutable std::map<Key, std::string> memo_;
};

}  // namespace audiofp
