#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "audiofp/dataset.hpp"
#include "audiofp/record.hpp"

using namespace audiofp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("audiofp-data-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string hex32(std::mt19937_64& rng) {
  static const char* digits = "0123456789abcdef";
  std::string s(32, '0');
  for (char& c : s) c = digits[rng() % 16];
  return s;
}

UserRecord make_record(std::mt19937_64& rng, std::string id, std::size_t k) {
  UserRecord r;
  r.user_id = std::move(id);
  r.ip_digest = hex32(rng);
  r.ua = "Mozilla/5.0 test " + std::to_string(rng() % 50);
  r.audio_config = {rng() % 2 ? 44100.0 : 48000.0, static_cast<int>(rng() % 8), 0.001 * (rng() % 20)};
  for (VectorId v : kAllVectors) {
    auto& runs = r.per_vector[v];
    for (std::size_t i = 0; i < k; ++i) {
      runs.push_back({{v, hex32(rng)}, Milliseconds(0.125 * static_cast<double>(rng() % 1000))});
    }
  }
  r.canvas = hex32(rng);
  r.fonts = "Arial,Helvetica," + std::to_string(rng() % 100);
  if (rng() % 2) r.country = "DE";
  r.timestamp = static_cast<std::int64_t>(1600000000 + rng() % 100000);
  return r;
}

std::string write(const fs::path& p, const std::string& contents) {
  std::ofstream(p, std::ios::binary) << contents;
  return p.string();
}

std::string schema_path(nlohmann::json j) {
  try {
    require_complete(record_from_json(j));
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_CASE("record json round trip") {
  std::mt19937_64 rng(1);
  const UserRecord r = make_record(rng, "u1", 3);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("perVector").size() == 7);
  CHECK(j.at("perVector").at("AM").size() == 3);
  CHECK(record_from_json(j) == r);
  CHECK(record_from_json(nlohmann::json::parse(j.dump())) == r);

  UserRecord no_country = r;
  no_country.country.reset();
  CHECK(to_json(no_country).at("country").is_null());
  CHECK(record_from_json(to_json(no_country)) == no_country);
}

TEST_CASE("schema violations name the offending field") {
  std::mt19937_64 rng(2);
  const nlohmann::json good = to_json(make_record(rng, "u1", 2));
  CHECK(schema_path(good).empty());

  nlohmann::json j = good;
  j["perVector"].erase("FM");
  CHECK(schema_path(j) == "perVector.FM");

  j = good;
  j["perVector"]["AM"][1]["digest"] = "XYZ";
  CHECK(schema_path(j) == "perVector.AM[1].digest");

  j = good;
  j["perVector"]["Hybrid"].push_back(j["perVector"]["Hybrid"][0]);
  CHECK(schema_path(j) == "perVector.Hybrid");

  j = good;
  j["perVector"]["Canvas"] = nlohmann::json::array();
  CHECK(schema_path(j) == "perVector.Canvas");

  j = good;
  j.erase("userId");
  CHECK(schema_path(j) == "userId");

  j = good;
  j["audioConfig"]["maxChannelCount"] = 1.5;
  CHECK(schema_path(j) == "audioConfig.maxChannelCount");

  j = good;
  j["timestamp"] = "yesterday";
  CHECK(schema_path(j) == "timestamp");

  j = good;
  j["ipDigest"] = "10.0.0.1";
  CHECK(schema_path(j) == "ipDigest");

  CHECK_THROWS_AS(record_from_json(nlohmann::json::array()), SchemaError);
}

TEST_CASE("ip digests are salted") {
  CHECK(ip_digest("10.0.0.1", "a") == ip_digest("10.0.0.1", "a"));
  CHECK(ip_digest("10.0.0.1", "a") != ip_digest("10.0.0.1", "b"));
  CHECK(ip_digest("10.0.0.1", "a") != ip_digest("10.0.0.2", "a"));
  CHECK(ip_digest("10.0.0.1", "a").find("10.0.0.1") == std::string::npos);
}

TEST_CASE("dedup keeps one record per address and user agent") {
  std::mt19937_64 rng(3);
  UserRecord a = make_record(rng, "a", 30);
  UserRecord b = a;
  b.user_id = "b";
  b.timestamp = a.timestamp + 10;
  UserRecord c = a;
  c.user_id = "c";
  c.ua = "a different browser";

  const std::vector<UserRecord> same{a, b};
  const auto kept = dedup(same);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].user_id == "a");

  const std::vector<UserRecord> reversed{b, a};
  REQUIRE(dedup(reversed).size() == 1);
  CHECK(dedup(reversed)[0].user_id == "a");

  const std::vector<UserRecord> other_ua{a, c};
  CHECK(dedup(other_ua).size() == 2);

  // the more complete submission wins over the earlier one
  UserRecord partial = a;
  partial.user_id = "partial";
  partial.timestamp = a.timestamp - 100;
  partial.per_vector[VectorId::AM].pop_back();
  const std::vector<UserRecord> mixed{partial, a};
  REQUIRE(dedup(mixed).size() == 1);
  CHECK(dedup(mixed)[0].user_id == "a");
}

TEST_CASE("prune drops incomplete records") {
  std::mt19937_64 rng(4);
  UserRecord full = make_record(rng, "full", 30);
  UserRecord missing = make_record(rng, "missing", 30);
  missing.per_vector.erase(VectorId::FM);
  UserRecord short_run = make_record(rng, "short", 30);
  short_run.per_vector[VectorId::DC].pop_back();
  const std::vector<UserRecord> all{full, missing, short_run};
  const auto kept = prune_incomplete(all, 30);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].user_id == "full");
  CHECK(prune_incomplete(all, 29).size() == 2);
  CHECK(prune_incomplete(all, 0).size() == 2);
}

TEST_CASE("dedup is idempotent and commutes with prune") {
  std::mt19937_64 rng(5);
  std::vector<UserRecord> records;
  std::vector<std::string> ips{hex32(rng), hex32(rng), hex32(rng)};
  for (int i = 0; i < 200; ++i) {
    UserRecord r = make_record(rng, "u" + std::to_string(i), 28 + rng() % 4);
    r.ip_digest = ips[rng() % ips.size()];
    r.ua = "ua" + std::to_string(rng() % 4);
    r.timestamp = static_cast<std::int64_t>(rng() % 5);
    if (rng() % 5 == 0) r.per_vector.erase(VectorId::AM);
    records.push_back(std::move(r));
  }
  const auto once = dedup(records);
  CHECK(dedup(once) == once);
  CHECK(once.size() <= 12);
  for (std::size_t k : {1u, 28u, 30u, 31u, 40u}) {
    CHECK(dedup(prune_incomplete(records, k)) == prune_incomplete(dedup(records), k));
  }
}

TEST_CASE("dataset save and load round trip") {
  TempDir dir;
  std::mt19937_64 rng(6);
  Dataset d;
  for (int i = 0; i < 1000; ++i) d.records.push_back(make_record(rng, "u" + std::to_string(i), 1 + rng() % 3));
  d.meta = DatasetMeta{30, "2021-06-01T00:00:00Z", kToolVersion, 42};
  const fs::path p = dir.path / "data.jsonl";
  save_dataset(p, d);
  CHECK(load_dataset(p) == d);

  d.meta.reset();
  save_dataset(p, d);
  const Dataset plain = load_dataset(p);
  CHECK_FALSE(plain.meta.has_value());
  CHECK(plain == d);

  std::size_t leftovers = 0;
  for (const auto& entry : fs::directory_iterator(dir.path)) leftovers += entry.path() != p;
  CHECK(leftovers == 0);
}

TEST_CASE("meta line") {
  std::istringstream in(
      "{\"meta\":{\"k\":30,\"createdAt\":\"\",\"toolVersion\":\"0.3.0\",\"seed\":7}}\n");
  const Dataset d = parse_dataset(in);
  REQUIRE(d.meta.has_value());
  CHECK(d.meta->k == 30);
  CHECK(d.meta->seed == 7u);
  CHECK(d.records.empty());
  CHECK(serialize_dataset(d).rfind("{\"meta\"", 0) == 0);
}

TEST_CASE("empty and blank inputs") {
  TempDir dir;
  const fs::path p = write(dir.path / "empty.jsonl", "");
  CHECK(load_dataset(p).records.empty());
  std::istringstream blank("\n\n");
  CHECK(parse_dataset(blank).records.empty());
  CHECK_THROWS_AS(load_dataset(dir.path / "absent.jsonl"), std::runtime_error);
}

TEST_CASE("malformed lines report their line number") {
  std::mt19937_64 rng(7);
  const std::string good = to_json(make_record(rng, "u1", 1)).dump();
  const std::string good2 = to_json(make_record(rng, "u2", 1)).dump();

  std::istringstream truncated(good + "\n" + good2.substr(0, good2.size() / 2) + "\n");
  try {
    parse_dataset(truncated);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.line() == 2);
  }

  std::istringstream duplicate(good + "\n\n" + good + "\n");
  try {
    parse_dataset(duplicate);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.line() == 3);
  }

  nlohmann::json bad = nlohmann::json::parse(good);
  bad["perVector"]["AM"][0]["digest"] = 5;
  std::istringstream schema(bad.dump() + "\n");
  try {
    parse_dataset(schema);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("perVector.AM[0].digest") != std::string::npos);
  }
}

TEST_CASE("atomic writes replace the whole file") {
  TempDir dir;
  const fs::path p = dir.path / "out.txt";
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "second\n");
  CHECK_THROWS(write_file_atomic(dir.path / "missing" / "x.txt", "y"));
}

TEST_CASE("utc timestamps") {
  const std::string ts = utc_timestamp();
  CHECK(ts.size() == 20);
  CHECK(ts[10] == 'T');
  CHECK(ts.back() == 'Z');
}
