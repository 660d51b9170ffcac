#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "audiofp/record.hpp"

namespace audiofp {

inline constexpr const char* kToolVersion = "0.3.0";

struct DatasetMeta {
  std::size_t k = 0;
  std::string created_at;  // ISO-8601, UTC
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;

  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  std::vector<UserRecord> records;
  std::optional<DatasetMeta> meta;

  bool operator==(const Dataset&) const = default;
};

/// Malformed dataset input. `line` is 1-based.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One JSON object per line. An optional first line {"meta": {...}} carries
/// dataset metadata. Blank lines are skipped. User ids must be unique.
Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

std::string serialize_dataset(const Dataset& d);
/// Written to a sibling temp file, then renamed over `path`.
void save_dataset(const std::filesystem::path& path, const Dataset& d);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// One record per (ipDigest, ua). The survivor has the most iterations on its
/// weakest vector; ties go to the earliest timestamp, then input order. Output
/// keeps input order.
std::vector<UserRecord> dedup(std::span<const UserRecord> records);

/// Drops records missing a vector or with fewer than k iterations on any.
std::vector<UserRecord> prune_incomplete(std::span<const UserRecord> records, std::size_t k);

std::string utc_timestamp();

}  // namespace audiofp
