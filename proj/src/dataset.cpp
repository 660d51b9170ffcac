#include "audiofp/dataset.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unistd.h>

namespace audiofp {

using nlohmann::json;

namespace {

json meta_to_json(const DatasetMeta& m) {
  json j{{"k", m.k}, {"createdAt", m.created_at}, {"toolVersion", m.tool_version}};
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  return j;
}

DatasetMeta meta_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("meta must be an object");
  DatasetMeta m;
  m.k = j.at("k").get<std::size_t>();
  m.created_at = j.value("createdAt", std::string());
  m.tool_version = j.value("toolVersion", std::string());
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) m.seed = it->get<std::uint64_t>();
  return m;
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  Dataset d;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.size() == 1 && j.contains("meta")) {
      if (!d.records.empty() || d.meta) throw DatasetError(line_no, "meta must be the first line");
      try {
        d.meta = meta_from_json(j["meta"]);
      } catch (const std::exception& e) {
        throw DatasetError(line_no, std::string("bad meta: ") + e.what());
      }
      continue;
    }
    try {
      UserRecord r = record_from_json(j);
      if (!ids.insert(r.user_id).second) {
        throw DatasetError(line_no, "duplicate userId " + r.user_id);
      }
      d.records.push_back(std::move(r));
    } catch (const SchemaError& e) {
      throw DatasetError(line_no, e.what());
    }
  }
  if (in.bad()) throw DatasetError(line_no, "read error");
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_dataset(in);
}

std::string serialize_dataset(const Dataset& d) {
  std::string out;
  if (d.meta) {
    out += json{{"meta", meta_to_json(*d.meta)}}.dump();
    out.push_back('\n');
  }
  for (const UserRecord& r : d.records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  write_file_atomic(path, serialize_dataset(d));
}

std::vector<UserRecord> dedup(std::span<const UserRecord> records) {
  using Rank = std::tuple<std::size_t, std::int64_t, std::size_t>;  // (-iters, ts, index)
  std::map<std::pair<std::string, std::string>, Rank> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const UserRecord& r = records[i];
    const Rank rank{std::numeric_limits<std::size_t>::max() - r.min_iterations(), r.timestamp, i};
    auto [it, inserted] = best.try_emplace({r.ip_digest, r.ua}, rank);
    if (!inserted && rank < it->second) it->second = rank;
  }
  std::vector<bool> keep(records.size(), false);
  for (const auto& [key, rank] : best) keep[std::get<2>(rank)] = true;
  std::vector<UserRecord> out;
  out.reserve(best.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

std::vector<UserRecord> prune_incomplete(std::span<const UserRecord> records, std::size_t k) {
  std::vector<UserRecord> out;
  for (const UserRecord& r : records) {
    if (r.complete(std::max<std::size_t>(k, 1))) out.push_back(r);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace audiofp
