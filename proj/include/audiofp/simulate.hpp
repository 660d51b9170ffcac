#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "audiofp/device.hpp"
#include "audiofp/record.hpp"
#include "audiofp/vectors.hpp"

namespace audiofp {

struct FamilyFickleness {
  int variant_count = 1;
  double fickleness_p = 0.0;
};

struct PopulationConfig {
  std::size_t num_users = 2093;
  std::size_t num_classes = 95;
  double zipf_exponent = 1.2;
  // Explicit per-class weights; when empty, Zipf(zipf_exponent) over class rank.
  std::vector<double> class_weights;
  std::map<std::string, double> browser_mix{{"Chrome", 0.904}, {"Firefox", 0.096}};
  std::map<std::string, FamilyFickleness> family_fickleness{{"Chrome", {26, 0.12}},
                                                            {"Firefox", {3, 0.005}}};
  // Relative fickleness of each vector (DC is always stable).
  std::array<double, kVectorCount> vector_fickle_scale{0.0, 0.35, 0.45, 0.45, 0.6, 1.0, 1.0};
  std::size_t iterations = 30;
  std::uint64_t seed = 1;
  std::string ip_salt = "audiofp-sim";

  void validate() const;
  /// Normalized class weights (explicit or Zipf).
  std::vector<double> weights() const;
};

/// The desk-scale stand-in for the field study: 2093 users, 95 classes, Zipf
/// class popularity, Chrome-like fickle family and a Firefox-like stable one.
PopulationConfig field_study_config();

/// Class ids per browser family. Classes are split into contiguous rank
/// blocks sized by the family mix, so no class spans two families.
std::map<std::string, std::vector<std::size_t>> family_classes(const PopulationConfig& cfg);

std::string class_id_for(std::size_t class_index);

/// Device drawn for one user; a pure function of (cfg.seed, user_index).
struct SimulatedUser {
  DeviceProfile device;
  std::string family;
  std::string os;
};
SimulatedUser draw_user(const PopulationConfig& cfg, std::size_t user_index);

/// OpenMP across users. Output is bit-identical to the serial reference.
std::vector<UserRecord> generate_population(const PopulationConfig& cfg, const Engine& engine);
std::vector<UserRecord> generate_population_serial(const PopulationConfig& cfg,
                                                   const Engine& engine);

}  // namespace audiofp
