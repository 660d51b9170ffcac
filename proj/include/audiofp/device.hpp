#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "audiofp/dsp.hpp"
#include "audiofp/vectors.hpp"

namespace audiofp {

inline constexpr double kClassOffsetDb = 0.5;
inline constexpr double kVariantOffsetDb = 0.05;

/// A simulated browser/hardware stack. Devices sharing `class_id` produce the
/// same base output; `variant_count` and `fickleness_p` control how many
/// alternative outputs a device may emit across iterations.
struct DeviceProfile {
  std::string class_id = "class-0";
  std::uint64_t perturb_seed = 0;
  int variant_count = 1;
  double fickleness_p = 0.0;
  // Per-vector multiplier on fickleness_p. DC ignores fickleness entirely.
  std::array<double, kVectorCount> fickle_scale{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

  void validate() const;
  double effective_fickleness(VectorId v) const;
};

/// Stable 64-bit hash of a class identifier (FNV-1a).
std::uint64_t class_hash(std::string_view class_id);

/// Variant emitted on this iteration: 0 is the device's home output, 1..n-1
/// are its fickle alternatives. Always 0 for DC and for zero fickleness.
int select_variant(const DeviceProfile& device, VectorId v, std::size_t iteration);

/// Adds the class base offset (|offset| <= 0.5 dB per bin) and, for variant > 0,
/// that variant's micro-offset (<= 0.05 dB per bin); re-floors at min_db.
FrequencyFrame perturb_variant(const FrequencyFrame& frame, std::string_view class_id, VectorId v,
                               int variant, double min_db);

FrequencyFrame perturb(const FrequencyFrame& frame, const DeviceProfile& device, VectorId v,
                       std::size_t iteration, double min_db = -100.0);

/// DC path: class-level gain within +-0.5 dB, no fickleness.
AudioBuffer perturb_buffer(const AudioBuffer& buf, std::string_view class_id);

}  // namespace audiofp
