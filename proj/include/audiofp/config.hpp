#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "audiofp/device.hpp"
#include "audiofp/record.hpp"
#include "audiofp/simulate.hpp"

namespace audiofp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Device profile file: a [device] section and an optional [record] section
/// with the non-audio fields written alongside the fingerprints.
struct DeviceFile {
  DeviceProfile device;
  std::string user_id = "u000001";
  std::string ip_address = "127.0.0.1";
  std::string ip_salt = "audiofp-local";
  std::string ua;
  AudioConfig audio_config;
  std::string canvas;
  std::string fonts;
  std::optional<std::string> country;
  std::int64_t timestamp = 0;
};

DeviceFile parse_device_file(std::istream& in);
DeviceFile load_device_file(const std::filesystem::path& path);

/// Population file. Sections: [population], [browser_mix], [family.<Name>],
/// [vector_fickle_scale]. Omitted keys keep their defaults; unknown keys are errors.
PopulationConfig parse_population_config(std::istream& in);
PopulationConfig load_population_config(const std::filesystem::path& path);

}  // namespace audiofp
