// audiofp: simulate, fingerprint, analyze and ingest audio fingerprint datasets.

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "audiofp/analysis.hpp"
#include "audiofp/config.hpp"
#include "audiofp/dataset.hpp"
#include "audiofp/ingest_server.hpp"
#include "audiofp/report.hpp"
#include "audiofp/simulate.hpp"
#include "audiofp/vectors.hpp"

namespace {

using namespace audiofp;

constexpr int kExitEnvironment = 1;
constexpr int kExitUsage = 2;

// Thrown for bad user input after flag parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalyzeOptions {
  std::string dataset;
  std::string out;
  std::string format = "csv";
  std::vector<std::size_t> s;
  std::string vector;
  std::optional<std::size_t> k;
  bool no_dedup = false;
};

void emit(const std::string& out_path, const std::string& contents) {
  if (out_path.empty() || out_path == "-") {
    std::cout << contents;
  } else {
    write_file_atomic(out_path, contents);
  }
}

std::vector<VectorId> selected_vectors(const std::string& name) {
  if (name.empty() || name == "all") return {kAllVectors.begin(), kAllVectors.end()};
  const auto v = parse_vector(name);
  if (!v) throw UsageError("unknown vector '" + name + "'");
  return {*v};
}

struct Loaded {
  std::vector<UserRecord> records;
  std::size_t k = 0;
  ReportMeta meta;
};

Loaded load_for_analysis(const AnalyzeOptions& o) {
  Dataset d = load_dataset(o.dataset);
  std::size_t k = 0;
  if (o.k) {
    k = *o.k;
  } else if (d.meta && d.meta->k > 0) {
    k = d.meta->k;
  } else {
    for (const UserRecord& r : d.records) k = std::max(k, r.min_iterations());
  }
  if (k == 0) throw UsageError("cannot determine the iteration count; pass --k");
  std::vector<UserRecord> records =
      prune_incomplete(o.no_dedup ? d.records : dedup(d.records), k);
  if (records.empty()) throw UsageError("no complete records with k=" + std::to_string(k));
  // Analysis uses exactly k iterations per vector.
  for (UserRecord& r : records) {
    for (auto& [v, runs] : r.per_vector) runs.resize(k);
  }
  Loaded out{std::move(records), k, {}};
  out.meta["dataset"] = o.dataset;
  out.meta["users"] = std::to_string(out.records.size());
  out.meta["k"] = std::to_string(k);
  out.meta["seed"] = d.meta && d.meta->seed ? std::to_string(*d.meta->seed) : "none";
  out.meta["dedup"] = o.no_dedup ? "off" : "on";
  return out;
}

std::vector<std::size_t> s_values(const AnalyzeOptions& o, std::size_t k) {
  if (!o.s.empty()) {
    for (std::size_t s : o.s) {
      if (s < 1 || 2 * s > k) {
        throw UsageError("s=" + std::to_string(s) + " out of range [1, " + std::to_string(k / 2) +
                         "] for k=" + std::to_string(k));
      }
    }
    return o.s;
  }
  std::vector<std::size_t> all;
  for (std::size_t s = 1; 2 * s <= k; ++s) all.push_back(s);
  if (all.empty()) throw UsageError("k=" + std::to_string(k) + " is too small for subsets");
  return all;
}

std::string render(const AnalyzeOptions& o, const Table& t, const ReportMeta& meta,
                   const std::string& title) {
  if (o.format == "text") return to_text(t, title);
  return to_csv(t, meta);
}

int run_analyze(const std::string& report, const AnalyzeOptions& o) {
  Loaded data = load_for_analysis(o);
  const auto vectors = selected_vectors(o.vector);
  std::string out;
  if (report == "stability") {
    data.meta["ami_normalization"] = "arithmetic";
    std::vector<StabilityReport> reports;
    for (VectorId v : vectors) {
      for (std::size_t s : s_values(o, data.k)) reports.push_back(stability(data.records, v, s));
    }
    out = render(o, stability_summary(reports), data.meta, "Average subset agreement (AMI)");
    if (o.format == "csv" && !o.out.empty() && o.out != "-") {
      write_file_atomic(o.out + ".heatmap.csv", to_csv(stability_heatmap(reports), data.meta));
    }
  } else if (report == "match") {
    std::vector<MatchScoreEntry> entries;
    for (VectorId v : vectors) {
      for (std::size_t s : s_values(o, data.k)) entries.push_back(match_score(data.records, v, s));
    }
    out = render(o, match_table(entries), data.meta, "Fingerprint match scores");
  } else if (report == "diversity") {
    if (data.records.size() < 2) throw UsageError("diversity needs at least two users");
    out = render(o, diversity_table_report(diversity_table(data.records)), data.meta,
                 "Fingerprint diversity");
  } else if (report == "compare") {
    data.meta["ami_normalization"] = "arithmetic";
    out = render(o, compare_table(compare_vectors(collate_all(data.records))), data.meta,
                 "Cross-vector cluster agreement (AMI)");
  } else if (report == "ua") {
    std::map<std::string, std::string> ua;
    for (const UserRecord& r : data.records) ua[r.user_id] = r.ua;
    Table summary;
    Table clusters;
    for (VectorId v : vectors) {
      const UaHomogeneity h = ua_homogeneity(collate_vector(data.records, v), ua);
      Table s = ua_summary_table(h, v);
      Table c = ua_cluster_table(h, v);
      summary.header = s.header;
      clusters.header = c.header;
      summary.rows.insert(summary.rows.end(), s.rows.begin(), s.rows.end());
      clusters.rows.insert(clusters.rows.end(), c.rows.begin(), c.rows.end());
    }
    out = render(o, summary, data.meta, "User-Agent homogeneity");
    if (o.format == "csv" && !o.out.empty() && o.out != "-") {
      write_file_atomic(o.out + ".clusters.csv", to_csv(clusters, data.meta));
    } else if (o.format == "text") {
      out += "\n" + to_text(clusters, "Clusters");
    }
  } else if (report == "distinct") {
    out = render(o, distinct_table(data.records), data.meta, "Distinct digests per user");
  } else {
    throw UsageError("unknown report " + report);
  }
  emit(o.out, out);
  return 0;
}

int run_fingerprint(const std::string& device_path, std::size_t k, const std::string& out_path,
                    std::optional<std::uint64_t> seed, bool timing) {
  if (k < 1) throw UsageError("--iterations must be >= 1");
  DeviceFile file = load_device_file(device_path);
  if (seed) file.device.perturb_seed = *seed;

  UserRecord r;
  r.user_id = file.user_id;
  r.ip_digest = ip_digest(file.ip_address, file.ip_salt);
  r.ua = file.ua;
  r.audio_config = file.audio_config;
  r.canvas = file.canvas;
  r.fonts = file.fonts;
  r.country = file.country;
  r.timestamp = file.timestamp;

  VectorRuns runs;
  if (timing) {
    runs = run_all(file.device, k);
  } else {
    runs = Engine().run_all(file.device, k);
    for (auto& per : runs) {
      for (IterationResult& it : per) it.elapsed = Milliseconds(0.0);
    }
  }
  for (VectorId v : kAllVectors) r.per_vector.emplace(v, std::move(runs[vector_index(v)]));
  emit(out_path, to_json(r).dump() + "\n");
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<std::size_t> users,
                 bool serial, bool stamp) {
  PopulationConfig cfg = config_path.empty() ? field_study_config() : load_population_config(config_path);
  if (seed) cfg.seed = *seed;
  if (users) cfg.num_users = *users;
  const Engine engine;
  Dataset d;
  d.records = serial ? generate_population_serial(cfg, engine) : generate_population(cfg, engine);
  d.meta = DatasetMeta{cfg.iterations, stamp ? utc_timestamp() : "", kToolVersion, cfg.seed};
  if (out_path.empty() || out_path == "-") {
    std::cout << serialize_dataset(d);
  } else {
    save_dataset(out_path, d);
  }
  return 0;
}

IngestServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::string& bind, const std::string& dataset, std::size_t max_body,
              const std::string& salt) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind expects host:port");
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad port in --bind " + bind);
  }
  if (port < 0 || port > 65535) throw UsageError("bad port in --bind " + bind);

  IngestOptions options;
  options.dataset_path = dataset;
  options.max_body_bytes = max_body;
  if (!salt.empty()) options.ip_salt = salt;
  IngestServer server(options);
  if (!server.bind(host, port)) {
    std::cerr << "audiofp: cannot bind " << bind << "\n";
    return kExitEnvironment;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "audiofp: listening on " << bind << ", appending to " << dataset << "\n";
  const bool ok = server.listen_after_bind();
  g_server = nullptr;
  return ok ? 0 : kExitEnvironment;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio fingerprinting toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(audiofp::kToolVersion));

  std::string device_path;
  std::size_t iterations = 30;
  std::string fp_out;
  std::optional<std::uint64_t> fp_seed;
  bool timing = false;
  auto* fingerprint = app.add_subcommand("fingerprint", "Fingerprint one simulated device");
  fingerprint->add_option("--device", device_path, "Device profile (INI)")->required();
  fingerprint->add_option("--iterations,-k", iterations, "Iterations per vector");
  fingerprint->add_option("--out,-o", fp_out, "Output record file (- for stdout)")->required();
  fingerprint->add_option("--seed", fp_seed, "Override the profile's perturb_seed");
  fingerprint->add_flag("--record-timing", timing, "Store measured per-iteration times");

  std::string config_path;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_users;
  bool serial = false;
  bool stamp = false;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic population dataset");
  simulate->add_option("--config,-c", config_path, "Population config (INI); defaults to the field-study population");
  simulate->add_option("--out,-o", sim_out, "Output dataset (- for stdout)")->required();
  simulate->add_option("--seed", sim_seed, "Override the config seed");
  simulate->add_option("--users", sim_users, "Override the number of users");
  simulate->add_flag("--serial", serial, "Use the single-threaded generator");
  simulate->add_flag("--stamp", stamp, "Record the creation time in the dataset header");

  AnalyzeOptions analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Compute a report over a dataset");
  analyze->require_subcommand(1);
  std::string report;
  const std::pair<const char*, const char*> reports[] = {
      {"stability", "Subset clustering agreement (AMI) per vector"},
      {"diversity", "Distinct, unique and entropy per vector and combination"},
      {"match", "Fingerprint match scores against a training subset"},
      {"compare", "Pairwise AMI between vector clusterings"},
      {"ua", "User-Agent homogeneity of vector clusters"},
      {"distinct", "Distinct raw digests per user"},
  };
  for (const auto& [name, description] : reports) {
    auto* sub = analyze->add_subcommand(name, description);
    sub->add_option("--dataset,-d", analyze_opts.dataset, "Dataset file")->required();
    sub->add_option("--out,-o", analyze_opts.out, "Output file (default stdout)");
    sub->add_option("--format", analyze_opts.format, "csv or text")
        ->check(CLI::IsMember({"csv", "text"}));
    sub->add_option("--k", analyze_opts.k, "Iterations per vector (default from dataset)");
    sub->add_flag("--no-dedup", analyze_opts.no_dedup, "Skip the (ipDigest, ua) filter");
    if (std::string(name) == "stability" || std::string(name) == "match") {
      sub->add_option("--s", analyze_opts.s, "Subset size; repeatable (default: all valid)");
    }
    if (std::string(name) != "diversity" && std::string(name) != "compare" &&
        std::string(name) != "distinct") {
      sub->add_option("--vector", analyze_opts.vector, "One vector name (default: all)");
    }
    sub->callback([&report, name] { report = name; });
  }

  std::string bind = "127.0.0.1:8080";
  std::string serve_dataset;
  std::size_t max_body = 1 << 20;
  std::string salt;
  auto* serve = app.add_subcommand("serve", "Run the ingest endpoint");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--dataset", serve_dataset, "Dataset file to append to")->required();
  serve->add_option("--max-body", max_body, "Request size cap in bytes");
  serve->add_option("--ip-salt", salt, "Salt for server-derived ipDigest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fingerprint) return run_fingerprint(device_path, iterations, fp_out, fp_seed, timing);
    if (*simulate) return run_simulate(config_path, sim_out, sim_seed, sim_users, serial, stamp);
    if (*analyze) return run_analyze(report, analyze_opts);
    if (*serve) return run_serve(bind, serve_dataset, max_body, salt);
  } catch (const UsageError& e) {
    std::cerr << "audiofp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "audiofp: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DatasetError& e) {
    std::cerr << "audiofp: dataset: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "audiofp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "audiofp: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitUsage;
}
