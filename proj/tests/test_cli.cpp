#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = AUDIOFP_CLI;
const fs::path kConfigs = AUDIOFP_CONFIG_DIR;

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("audiofp-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args) {
  const std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// Data rows of a CSV report, skipping "# key=value" metadata and the header.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  for (const std::string& line : lines_of(p)) {
    if (line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t digest_count(const json& record) {
  std::size_t n = 0;
  for (const auto& [name, runs] : record.at("perVector").items()) n += runs.size();
  return n;
}

}  // namespace

TEST_CASE("fingerprint writes one record") {
  Workspace ws;
  const std::string device = (kConfigs / "device_example.ini").string();
  REQUIRE(run("fingerprint --device '" + device + "' -k 30 -o '" + (ws / "a.json").string() + "'") == 0);
  const auto lines = lines_of(ws / "a.json");
  REQUIRE(lines.size() == 1);
  const json a = json::parse(lines[0]);
  CHECK(digest_count(a) == 210);
  CHECK(a.at("userId") == "u000001");

  REQUIRE(run("fingerprint --device '" + device + "' -k 30 -o '" + (ws / "b.json").string() + "'") == 0);
  CHECK(slurp(ws / "a.json") == slurp(ws / "b.json"));

  REQUIRE(run("fingerprint --device '" + device + "' -k 1 -o '" + (ws / "c.json").string() + "'") == 0);
  CHECK(digest_count(json::parse(lines_of(ws / "c.json")[0])) == 7);
}

TEST_CASE("fingerprint rejects bad input") {
  Workspace ws;
  std::ofstream(ws / "bad.ini") << "[device]\nvariant_count = 0\n";
  CHECK(run("fingerprint --device '" + (ws / "bad.ini").string() + "' -o -") == 2);
  std::ofstream(ws / "typo.ini") << "[device]\nfickleness = 0.1\n";
  CHECK(run("fingerprint --device '" + (ws / "typo.ini").string() + "' -o -") == 2);
  CHECK(run("fingerprint --device '" + (ws / "absent.ini").string() + "' -o -") != 0);
  CHECK(run("fingerprint --device '" + (kConfigs / "device_example.ini").string() +
            "' -k 0 -o -") == 2);
}

TEST_CASE("simulate is reproducible") {
  Workspace ws;
  const std::string cfg = (kConfigs / "stable.ini").string();
  REQUIRE(run("simulate -c '" + cfg + "' --seed 9 --out '" + (ws / "a.jsonl").string() + "'") == 0);
  REQUIRE(run("simulate -c '" + cfg + "' --seed 9 --out '" + (ws / "b.jsonl").string() + "'") == 0);
  CHECK(slurp(ws / "a.jsonl") == slurp(ws / "b.jsonl"));
  REQUIRE(run("simulate -c '" + cfg + "' --seed 9 --serial --out '" + (ws / "c.jsonl").string() + "'") == 0);
  CHECK(slurp(ws / "a.jsonl") == slurp(ws / "c.jsonl"));
  const auto lines = lines_of(ws / "a.jsonl");
  REQUIRE(lines.size() == 201);
  CHECK(json::parse(lines[0]).at("meta").at("seed") == 9);

  REQUIRE(run("simulate -c '" + cfg + "' --users 0 --out '" + (ws / "empty.jsonl").string() + "'") == 0);
  CHECK(lines_of(ws / "empty.jsonl").size() == 1);
}

TEST_CASE("analyze on a stable corpus") {
  Workspace ws;
  const std::string data = (ws / "s.jsonl").string();
  REQUIRE(run("simulate -c '" + (kConfigs / "stable.ini").string() + "' --out '" + data + "'") == 0);

  REQUIRE(run("analyze match -d '" + data + "' --s 3 -o '" + (ws / "m.csv").string() + "'") == 0);
  const auto match = csv_rows(ws / "m.csv");
  CHECK(match.size() == 7);
  for (const auto& row : match) CHECK(std::stod(row.back()) == 1.0);

  REQUIRE(run("analyze stability -d '" + data + "' --s 5 -o '" + (ws / "st.csv").string() + "'") == 0);
  for (const auto& row : csv_rows(ws / "st.csv")) CHECK(std::stod(row.back()) == 1.0);
  CHECK(fs::exists(ws / "st.csv.heatmap.csv"));

  CHECK(run("analyze match -d '" + data + "' --s 16") == 2);
  CHECK(run("analyze stability -d '" + data + "' --s 0") == 2);
  CHECK(run("analyze compare -d '" + data + "' -o '" + (ws / "c.csv").string() + "'") == 0);
  CHECK(run("analyze ua -d '" + data + "' -o '" + (ws / "u.csv").string() + "'") == 0);
  CHECK(fs::exists(ws / "u.csv.clusters.csv"));
  CHECK(run("analyze distinct -d '" + data + "' --format text -o '" + (ws / "d.txt").string() + "'") == 0);
}

TEST_CASE("diversity of a single-class corpus") {
  Workspace ws;
  std::ofstream(ws / "one.ini") << "[population]\nnum_users = 40\nnum_classes = 1\n"
                                   "[browser_mix]\nChrome = 1\n"
                                   "[family.Chrome]\nvariant_count = 26\nfickleness_p = 0.5\n";
  const std::string data = (ws / "one.jsonl").string();
  REQUIRE(run("simulate -c '" + (ws / "one.ini").string() + "' --out '" + data + "'") == 0);
  REQUIRE(run("analyze diversity -d '" + data + "' -o '" + (ws / "div.csv").string() + "'") == 0);
  std::size_t audio_rows = 0;
  for (const auto& row : csv_rows(ws / "div.csv")) {
    if (row[0] == "Combined" || row[0] == "DC" || row[0] == "AM" || row[0] == "FM") {
      ++audio_rows;
      CHECK(row[1] == "1");
      CHECK(std::stod(row[3]) == 0.0);
    }
  }
  CHECK(audio_rows == 4);
}

TEST_CASE("usage errors") {
  Workspace ws;
  CHECK(run("--no-such-flag") == 2);
  CHECK(run("simulate --out") == 2);
  CHECK(run("analyze match") == 2);
  CHECK(run("analyze diversity -d '" + (ws / "absent.jsonl").string() + "'") != 0);
  std::ofstream(ws / "broken.jsonl") << "{\"userId\": \n";
  CHECK(run("analyze diversity -d '" + (ws / "broken.jsonl").string() + "'") == 2);
  std::ofstream(ws / "bad.ini") << "[population]\nnum_users = lots\n";
  CHECK(run("simulate -c '" + (ws / "bad.ini").string() + "' --out '" + (ws / "x").string() + "'") == 2);
  CHECK(run("--help") == 0);
}
