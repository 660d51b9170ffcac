#include "audiofp/record.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "audiofp/digest.hpp"

namespace audiofp {

using nlohmann::json;

namespace {

const json& field(const json& j, const std::string& parent, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(parent.empty() ? name : parent + "." + name, "missing");
  return *it;
}

std::string path_of(const std::string& parent, const char* name) {
  return parent.empty() ? std::string(name) : parent + "." + name;
}

std::string get_string(const json& j, const std::string& parent, const char* name) {
  const json& v = field(j, parent, name);
  if (!v.is_string()) throw SchemaError(path_of(parent, name), "expected string");
  return v.get<std::string>();
}

double get_number(const json& j, const std::string& parent, const char* name) {
  const json& v = field(j, parent, name);
  if (!v.is_number()) throw SchemaError(path_of(parent, name), "expected number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path_of(parent, name), "must be finite");
  return d;
}

bool is_ip_digest(std::string_view s) { return is_hex_digest(s, 32) || is_hex_digest(s, 64); }

}  // namespace

std::size_t UserRecord::min_iterations() const {
  std::size_t least = std::numeric_limits<std::size_t>::max();
  for (VectorId v : kAllVectors) {
    auto it = per_vector.find(v);
    least = std::min(least, it == per_vector.end() ? std::size_t{0} : it->second.size());
  }
  return least;
}

std::size_t UserRecord::fingerprint_count() const {
  std::size_t n = 0;
  for (const auto& [v, runs] : per_vector) n += runs.size();
  return n;
}

json to_json(const UserRecord& r) {
  json per_vector = json::object();
  for (const auto& [v, runs] : r.per_vector) {
    json arr = json::array();
    for (const IterationResult& it : runs) {
      arr.push_back({{"digest", it.fingerprint.digest}, {"elapsedMs", it.elapsed.count()}});
    }
    per_vector[std::string(vector_name(v))] = std::move(arr);
  }
  json j = {
      {"userId", r.user_id},
      {"ipDigest", r.ip_digest},
      {"ua", r.ua},
      {"audioConfig",
       {{"sampleRate", r.audio_config.sample_rate},
        {"maxChannelCount", r.audio_config.max_channel_count},
        {"baseLatency", r.audio_config.base_latency}}},
      {"perVector", std::move(per_vector)},
      {"canvas", r.canvas},
      {"fonts", r.fonts},
      {"timestamp", r.timestamp},
  };
  j["country"] = r.country ? json(*r.country) : json(nullptr);
  return j;
}

UserRecord record_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("$", "record must be an object");
  UserRecord r;
  r.user_id = get_string(j, "", "userId");
  if (r.user_id.empty()) throw SchemaError("userId", "must not be empty");
  r.ip_digest = get_string(j, "", "ipDigest");
  if (!is_ip_digest(r.ip_digest)) {
    throw SchemaError("ipDigest", "must be a lowercase hex digest (32 or 64 chars)");
  }
  r.ua = get_string(j, "", "ua");

  const json& ac = field(j, "", "audioConfig");
  if (!ac.is_object()) throw SchemaError("audioConfig", "expected object");
  r.audio_config.sample_rate = get_number(ac, "audioConfig", "sampleRate");
  if (!(r.audio_config.sample_rate > 0.0)) {
    throw SchemaError("audioConfig.sampleRate", "must be positive");
  }
  const json& mcc = field(ac, "audioConfig", "maxChannelCount");
  if (!mcc.is_number_integer() || mcc.get<std::int64_t>() < 0) {
    throw SchemaError("audioConfig.maxChannelCount", "expected non-negative integer");
  }
  r.audio_config.max_channel_count = mcc.get<int>();
  r.audio_config.base_latency = get_number(ac, "audioConfig", "baseLatency");
  if (r.audio_config.base_latency < 0.0) {
    throw SchemaError("audioConfig.baseLatency", "must be >= 0");
  }

  const json& pv = field(j, "", "perVector");
  if (!pv.is_object()) throw SchemaError("perVector", "expected object");
  for (const auto& [name, runs] : pv.items()) {
    const std::string base = "perVector." + name;
    const auto v = parse_vector(name);
    if (!v) throw SchemaError(base, "unknown vector");
    if (!runs.is_array()) throw SchemaError(base, "expected array");
    std::vector<IterationResult> out;
    out.reserve(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string item = base + "[" + std::to_string(i) + "]";
      const json& it = runs[i];
      if (!it.is_object()) throw SchemaError(item, "expected object");
      std::string digest = get_string(it, item, "digest");
      if (!is_hex_digest(digest)) throw SchemaError(item + ".digest", "expected 32 hex chars");
      const double ms = get_number(it, item, "elapsedMs");
      if (ms < 0.0) throw SchemaError(item + ".elapsedMs", "must be >= 0");
      out.push_back({ElementaryFingerprint{*v, std::move(digest)}, Milliseconds(ms)});
    }
    r.per_vector.emplace(*v, std::move(out));
  }

  r.canvas = get_string(j, "", "canvas");
  r.fonts = get_string(j, "", "fonts");
  if (auto it = j.find("country"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("country", "expected string or null");
    r.country = it->get<std::string>();
  }
  const json& ts = field(j, "", "timestamp");
  if (!ts.is_number_integer()) throw SchemaError("timestamp", "expected integer seconds");
  r.timestamp = ts.get<std::int64_t>();
  return r;
}

void require_complete(const UserRecord& r) {
  std::size_t expected = 0;
  for (VectorId v : kAllVectors) {
    const std::string path = "perVector." + std::string(vector_name(v));
    auto it = r.per_vector.find(v);
    if (it == r.per_vector.end()) throw SchemaError(path, "missing");
    if (it->second.empty()) throw SchemaError(path, "no iterations");
    if (expected == 0) expected = it->second.size();
    if (it->second.size() != expected) {
      throw SchemaError(path, "iteration count " + std::to_string(it->second.size()) +
                                  " differs from " + std::to_string(expected));
    }
  }
}

std::string ip_digest(std::string_view address, std::string_view salt) {
  std::string material(salt);
  material.push_back('\n');
  material.append(address);
  return md5_hex(material);
}

}  // namespace audiofp
