#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "audiofp/vectors.hpp"

namespace audiofp {

struct AudioConfig {
  double sample_rate = 44100.0;
  int max_channel_count = 2;
  double base_latency = 0.01;  // seconds

  bool operator==(const AudioConfig&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::string ip_digest;  // salted digest, never a raw address
  std::string ua;
  AudioConfig audio_config;
  std::map<VectorId, std::vector<IterationResult>> per_vector;
  std::string canvas;
  std::string fonts;
  std::optional<std::string> country;
  std::int64_t timestamp = 0;

  bool operator==(const UserRecord&) const = default;

  /// Smallest iteration count over all seven vectors (0 if any is missing).
  std::size_t min_iterations() const;
  bool complete(std::size_t k) const { return min_iterations() >= k; }
  std::size_t fingerprint_count() const;
};

/// Thrown for wire-format violations; `path` names the offending field
/// (e.g. "perVector.AM[3].digest").
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

nlohmann::json to_json(const UserRecord& r);

/// Parses and type-checks one record. Missing vectors are allowed here
/// (incomplete records are pruned later); see require_complete().
UserRecord record_from_json(const nlohmann::json& j);

/// Throws SchemaError unless all seven vectors carry the same, non-zero
/// number of iterations.
void require_complete(const UserRecord& r);

/// Salted digest of a network address, suitable for the ipDigest field.
std::string ip_digest(std::string_view address, std::string_view salt);

}  // namespace audiofp
