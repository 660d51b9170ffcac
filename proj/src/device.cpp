#include "audiofp/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "audiofp/rng.hpp"

namespace audiofp {
namespace {

constexpr std::uint64_t kBaseTag = 0xB45E;
constexpr std::uint64_t kVariantTag = 0x7A41;
constexpr std::uint64_t kDrawTag = 0xD4A7;

}  // namespace

void DeviceProfile::validate() const {
  if (class_id.empty()) throw std::invalid_argument("device class id must not be empty");
  if (variant_count < 1) throw std::invalid_argument("device variant count must be >= 1");
  if (!(fickleness_p >= 0.0 && fickleness_p <= 1.0)) {
    throw std::invalid_argument("device fickleness must be a probability");
  }
  for (double s : fickle_scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("fickleness scale must be finite and >= 0");
    }
  }
}

double DeviceProfile::effective_fickleness(VectorId v) const {
  if (v == VectorId::DC) return 0.0;
  return std::clamp(fickleness_p * fickle_scale[vector_index(v)], 0.0, 1.0);
}

std::uint64_t class_hash(std::string_view class_id) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : class_id) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

int select_variant(const DeviceProfile& device, VectorId v, std::size_t iteration) {
  const double p = device.effective_fickleness(v);
  if (p <= 0.0 || device.variant_count <= 1) return 0;
  SplitMix64 rng(combine(combine(combine(device.perturb_seed, kDrawTag), vector_index(v)),
                         iteration));
  if (rng.uniform() >= p) return 0;
  return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(device.variant_count - 1)));
}

FrequencyFrame perturb_variant(const FrequencyFrame& frame, std::string_view class_id, VectorId v,
                               int variant, double min_db) {
  const std::uint64_t cls = combine(class_hash(class_id), vector_index(v));
  SplitMix64 base(combine(cls, kBaseTag));
  FrequencyFrame out = frame;
  for (double& b : out.bins) b += kClassOffsetDb * (2.0 * base.uniform() - 1.0);
  if (variant > 0) {
    SplitMix64 micro(combine(combine(cls, kVariantTag), static_cast<std::uint64_t>(variant)));
    for (double& b : out.bins) b += kVariantOffsetDb * (2.0 * micro.uniform() - 1.0);
  }
  for (double& b : out.bins) b = std::max(b, min_db);
  return out;
}

FrequencyFrame perturb(const FrequencyFrame& frame, const DeviceProfile& device, VectorId v,
                       std::size_t iteration, double min_db) {
  return perturb_variant(frame, device.class_id, v, select_variant(device, v, iteration), min_db);
}

AudioBuffer perturb_buffer(const AudioBuffer& buf, std::string_view class_id) {
  SplitMix64 rng(combine(combine(class_hash(class_id), vector_index(VectorId::DC)), kBaseTag));
  const double offset_db = kClassOffsetDb * (2.0 * rng.uniform() - 1.0);
  return apply_gain(buf, GainSpec{std::pow(10.0, offset_db / 20.0)});
}

}  // namespace audiofp
