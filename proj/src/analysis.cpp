#include "audiofp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace audiofp {
namespace {

// Relabels to dense ids 0..n-1 in first-seen order.
std::vector<std::size_t> dense(std::span<const std::size_t> labels, std::size_t& classes) {
  std::unordered_map<std::size_t, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (std::size_t l : labels) out.push_back(ids.emplace(l, ids.size()).first->second);
  classes = ids.size();
  return out;
}

std::vector<std::size_t> sizes_of(std::span<const std::size_t> dense_labels, std::size_t classes) {
  std::vector<std::size_t> sizes(classes, 0);
  for (std::size_t l : dense_labels) ++sizes[l];
  return sizes;
}

bool same_partition(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::unordered_map<std::size_t, std::size_t> ab;
  std::unordered_map<std::size_t, std::size_t> ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    if (!new1 && it1->second != b[i]) return false;
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (!new2 && it2->second != a[i]) return false;
  }
  return true;
}

void check_lengths(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
}

double entropy_of_sizes(const std::vector<std::size_t>& sizes, double n) {
  double h = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / n;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<std::size_t> labels_as_ids(const Clustering& c,
                                       std::unordered_map<std::string, std::size_t>& ids) {
  std::vector<std::size_t> out;
  out.reserve(c.size());
  for (const auto& [user, label] : c.labels) out.push_back(ids.emplace(label, ids.size()).first->second);
  return out;
}

std::string join_tuple(std::span<const LabelColumn> columns, std::size_t row) {
  std::string key;
  for (const LabelColumn& col : columns) {
    key += col[row];
    key.push_back('\x1f');
  }
  return key;
}

}  // namespace

// ---------------------------------------------------------------------------

IterationSet split_iterations(std::size_t k, std::size_t s) {
  if (s < 1 || s > k) {
    throw std::invalid_argument("subset size " + std::to_string(s) + " outside [1, " +
                                std::to_string(k) + "]");
  }
  IterationSet set{k, s, {}};
  for (std::size_t i = 0; i < k / s; ++i) set.subsets.emplace_back(i * s, (i + 1) * s);
  return set;
}

// ---------------------------------------------------------------------------

double entropy_nats(std::span<const std::size_t> labels) {
  if (labels.empty()) return 0.0;
  std::size_t classes = 0;
  const auto d = dense(labels, classes);
  const auto sizes = sizes_of(d, classes);
  return entropy_of_sizes(sizes, static_cast<double>(labels.size()));
}

double mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  check_lengths(a, b);
  if (a.empty()) return 0.0;
  std::size_t ra = 0;
  std::size_t rb = 0;
  const auto da = dense(a, ra);
  const auto db = dense(b, rb);
  const auto sa = sizes_of(da, ra);
  const auto sb = sizes_of(db, rb);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;
  for (std::size_t i = 0; i < da.size(); ++i) ++table[{da[i], db[i]}];
  const auto n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [cell, count] : table) {
    const auto nij = static_cast<double>(count);
    mi += nij / n *
          std::log(n * nij / (static_cast<double>(sa[cell.first]) * static_cast<double>(sb[cell.second])));
  }
  return std::max(mi, 0.0);
}

double expected_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  check_lengths(a, b);
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::size_t ra = 0;
  std::size_t rb = 0;
  const auto da = dense(a, ra);
  const auto db = dense(b, rb);
  const auto sa = sizes_of(da, ra);
  const auto sb = sizes_of(db, rb);
  // Cluster sizes with multiplicity; EMI only depends on the size multisets.
  std::map<std::size_t, std::size_t> size_a;
  std::map<std::size_t, std::size_t> size_b;
  for (std::size_t s : sa) ++size_a[s];
  for (std::size_t s : sb) ++size_b[s];

  std::vector<double> log_fact(n + 1, 0.0);
  for (std::size_t i = 2; i <= n; ++i) log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));
  const auto nd = static_cast<double>(n);

  double emi = 0.0;
  for (const auto& [ai, ca] : size_a) {
    for (const auto& [bj, cb] : size_b) {
      const std::size_t lo = std::max<std::size_t>(1, ai + bj > n ? ai + bj - n : 0);
      const std::size_t hi = std::min(ai, bj);
      const double fixed = log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj] -
                           log_fact[n];
      double cell = 0.0;
      for (std::size_t nij = lo; nij <= hi; ++nij) {
        const double log_p = fixed - log_fact[nij] - log_fact[ai - nij] - log_fact[bj - nij] -
                             log_fact[n - ai - bj + nij];
        const auto x = static_cast<double>(nij);
        cell += x / nd * std::log(nd * x / (static_cast<double>(ai) * static_cast<double>(bj))) *
                std::exp(log_p);
      }
      emi += static_cast<double>(ca) * static_cast<double>(cb) * cell;
    }
  }
  return emi;
}

double ami(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  check_lengths(a, b);
  if (same_partition(a, b)) return 1.0;
  const double mi = mutual_information(a, b);
  const double emi = expected_mutual_information(a, b);
  const double mean_h = 0.5 * (entropy_nats(a) + entropy_nats(b));
  double denom = mean_h - emi;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  denom = denom < 0.0 ? std::min(denom, -kEps) : std::max(denom, kEps);
  return (mi - emi) / denom;
}

double ami(const Clustering& a, const Clustering& b) {
  if (a.size() != b.size() ||
      !std::equal(a.labels.begin(), a.labels.end(), b.labels.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("ami: clusterings cover different user sets");
  }
  std::unordered_map<std::string, std::size_t> ids_a;
  std::unordered_map<std::string, std::size_t> ids_b;
  const auto la = labels_as_ids(a, ids_a);
  const auto lb = labels_as_ids(b, ids_b);
  return ami(la, lb);
}

// ---------------------------------------------------------------------------

void ClusterCounts::validate() const {
  std::size_t sum = 0;
  for (std::size_t c : counts) {
    if (c == 0) throw std::invalid_argument("cluster counts must be >= 1");
    sum += c;
  }
  if (sum != total) throw std::invalid_argument("cluster counts do not sum to the user total");
}

double shannon_entropy(const ClusterCounts& c) {
  c.validate();
  if (c.total == 0) return 0.0;
  const auto u = static_cast<double>(c.total);
  double e = 0.0;
  for (std::size_t count : c.counts) {
    const double p = static_cast<double>(count) / u;
    e -= p * std::log2(p);
  }
  return std::max(e, 0.0);
}

double normalized_entropy(double entropy_bits, std::size_t users) {
  if (users < 2) throw std::invalid_argument("normalized entropy needs at least two users");
  return entropy_bits / std::log2(static_cast<double>(users));
}

DiversityReport diversity(const ClusterCounts& c) {
  DiversityReport r;
  r.distinct = c.counts.size();
  r.unique = static_cast<std::size_t>(std::count(c.counts.begin(), c.counts.end(), 1));
  r.entropy_bits = shannon_entropy(c);
  r.normalized = normalized_entropy(r.entropy_bits, c.total);
  return r;
}

ClusterCounts counts_of(const LabelColumn& column) {
  const LabelColumn* one = &column;
  return combine_vectors(std::span(one, 1));
}

ClusterCounts combine_vectors(std::span<const LabelColumn> columns) {
  if (columns.empty()) throw std::invalid_argument("combine_vectors: no columns");
  const std::size_t users = columns.front().size();
  for (const LabelColumn& c : columns) {
    if (c.size() != users) throw std::invalid_argument("combine_vectors: columns differ in length");
  }
  std::map<std::string, std::size_t> groups;
  for (std::size_t row = 0; row < users; ++row) ++groups[join_tuple(columns, row)];
  ClusterCounts out{users, {}};
  out.counts.reserve(groups.size());
  for (const auto& [key, count] : groups) out.counts.push_back(count);
  return out;
}

LabelColumn column_from_clustering(std::span<const UserRecord> records, const Clustering& c) {
  LabelColumn col;
  col.reserve(records.size());
  for (const UserRecord& r : records) col.push_back(c.labels.at(r.user_id));
  return col;
}

std::vector<DiversityRow> diversity_table(std::span<const UserRecord> records) {
  const auto per_vector = collate_all(records);
  std::vector<LabelColumn> audio;
  std::vector<DiversityRow> rows;
  for (VectorId v : kAllVectors) {
    audio.push_back(column_from_clustering(records, per_vector[vector_index(v)]));
    rows.push_back({std::string(vector_name(v)), diversity(counts_of(audio.back()))});
  }
  // The audio tuple is itself a column for the combinations below.
  LabelColumn combined;
  combined.reserve(records.size());
  for (std::size_t row = 0; row < records.size(); ++row) combined.push_back(join_tuple(audio, row));
  rows.push_back({"Combined", diversity(counts_of(combined))});

  LabelColumn canvas;
  LabelColumn fonts;
  LabelColumn ua;
  LabelColumn sample_rate;
  LabelColumn channels;
  LabelColumn latency;
  for (const UserRecord& r : records) {
    canvas.push_back(r.canvas);
    fonts.push_back(r.fonts);
    ua.push_back(r.ua);
    sample_rate.push_back(std::to_string(r.audio_config.sample_rate));
    channels.push_back(std::to_string(r.audio_config.max_channel_count));
    latency.push_back(std::to_string(r.audio_config.base_latency));
  }
  auto row = [&](std::string name, std::vector<LabelColumn> cols) {
    rows.push_back({std::move(name), diversity(combine_vectors(cols))});
  };
  row("Canvas", {canvas});
  row("Fonts", {fonts});
  row("User-Agent", {ua});
  row("Canvas + Audio", {canvas, combined});
  row("Canvas + Font", {canvas, fonts});
  row("Canvas + Font + Audio", {canvas, fonts, combined});
  row("Canvas + Font + UA", {canvas, fonts, ua});
  row("Canvas + Font + UA + Audio", {canvas, fonts, ua, combined});
  row("UA + Audio", {ua, combined});
  row("sampleRate", {sample_rate});
  row("maxChannelCount", {channels});
  row("baseLatency", {latency});
  return rows;
}

// ---------------------------------------------------------------------------

std::size_t common_iterations(std::span<const UserRecord> records) {
  std::size_t k = std::numeric_limits<std::size_t>::max();
  for (const UserRecord& r : records) k = std::min(k, r.min_iterations());
  return records.empty() ? 0 : k;
}

std::vector<Clustering> subset_clusterings(std::span<const UserRecord> records, VectorId v,
                                           const IterationSet& set, Execution exec) {
  std::vector<Clustering> out(set.subsets.size());
  const auto n = static_cast<std::int64_t>(set.subsets.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto [begin, end] = set.subsets[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = build_graph(records, v, begin, end).components();
  }
  return out;
}

StabilityReport stability(std::span<const UserRecord> records, VectorId v, std::size_t s,
                          Execution exec) {
  const std::size_t k = common_iterations(records);
  const IterationSet set = split_iterations(k, s);
  if (set.subsets.size() < 2) {
    throw std::invalid_argument("stability needs at least two subsets (s <= k/2)");
  }
  const auto clusterings = subset_clusterings(records, v, set, exec);
  const std::size_t m = clusterings.size();
  StabilityReport report{v, s, std::vector<std::vector<double>>(m, std::vector<double>(m, 1.0)), 1.0};

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> scores(pairs.size());
  const auto np = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
  for (std::int64_t p = 0; p < np; ++p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    scores[static_cast<std::size_t>(p)] = ami(clusterings[i], clusterings[j]);
  }
  double total = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    report.ami_matrix[i][j] = report.ami_matrix[j][i] = scores[p];
    total += scores[p];
  }
  report.average = total / static_cast<double>(pairs.size());
  return report;
}

// ---------------------------------------------------------------------------

MatchOutcome classify_match(const CollationGraph& training, std::string_view user,
                            std::span<const ElementaryFingerprint> fingerprints) {
  std::set<std::size_t> touched;
  for (const ElementaryFingerprint& fp : fingerprints) {
    if (auto node = training.fingerprint_node(fp)) touched.insert(training.root(*node));
  }
  if (touched.empty()) return MatchOutcome::NewCluster;
  if (touched.size() > 1) return MatchOutcome::Merge;
  const auto own = training.user_node(user);
  if (own && training.root(*own) == *touched.begin()) return MatchOutcome::Positive;
  return MatchOutcome::WrongCluster;
}

MatchScoreEntry match_score(std::span<const UserRecord> records, VectorId v, std::size_t s) {
  const std::size_t k = common_iterations(records);
  if (s < 1 || k < 2 * s) {
    throw std::invalid_argument("match score needs k >= 2s (k=" + std::to_string(k) +
                                ", s=" + std::to_string(s) + ")");
  }
  const IterationSet set = split_iterations(k, s);
  const CollationGraph training = build_graph(records, v, set.subsets[0].first, set.subsets[0].second);
  MatchScoreEntry entry{v, s, 0, 0, 0.0};
  std::vector<ElementaryFingerprint> fps;
  for (const UserRecord& r : records) {
    const auto& runs = r.per_vector.at(v);
    for (std::size_t sub = 1; sub < set.subsets.size(); ++sub) {
      fps.clear();
      for (std::size_t i = set.subsets[sub].first; i < set.subsets[sub].second; ++i) {
        fps.push_back(runs[i].fingerprint);
      }
      ++entry.total;
      if (classify_match(training, r.user_id, fps) == MatchOutcome::Positive) ++entry.positives;
    }
  }
  entry.score = entry.total == 0 ? 0.0
                                 : static_cast<double>(entry.positives) /
                                       static_cast<double>(entry.total);
  return entry;
}

// ---------------------------------------------------------------------------

BrowserInfo parse_user_agent(std::string_view ua) {
  auto has = [&](std::string_view needle) { return ua.find(needle) != std::string_view::npos; };
  BrowserInfo info;
  if (has("Firefox/")) {
    info.family = "Firefox";
  } else if (has("Edg/")) {
    info.family = "Edge";
  } else if (has("OPR/")) {
    info.family = "Opera";
  } else if (has("SamsungBrowser/")) {
    info.family = "Samsung";
  } else if (has("Chrome/")) {
    info.family = "Chrome";
  } else {
    info.family = "Other";
  }
  if (has("Android")) {
    info.os = "Android";
  } else if (has("iPhone") || has("iPad")) {
    info.os = "iOS";
  } else if (has("Windows")) {
    info.os = "Windows";
  } else if (has("Macintosh") || has("Mac OS X")) {
    info.os = "MacOS";
  } else if (has("Linux") || has("X11")) {
    info.os = "Linux";
  } else {
    info.os = "Other";
  }
  return info;
}

UaHomogeneity ua_homogeneity(const Clustering& clustering,
                             const std::map<std::string, std::string>& ua) {
  std::map<std::string, ClusterUaSummary> clusters;
  std::map<std::string, std::set<std::string>> cluster_uas;
  std::map<std::string, std::set<std::string>> ua_clusters;
  std::map<std::string, std::size_t> ua_users;
  for (const auto& [user, label] : clustering.labels) {
    auto it = ua.find(user);
    if (it == ua.end()) throw std::invalid_argument("no User-Agent for user " + user);
    const BrowserInfo info = parse_user_agent(it->second);
    ClusterUaSummary& summary = clusters[label];
    summary.label = label;
    ++summary.users;
    ++summary.families[info.family];
    ++summary.browser_os[info.family + "/" + info.os];
    cluster_uas[label].insert(it->second);
    ua_clusters[it->second].insert(label);
    ++ua_users[it->second];
  }
  UaHomogeneity out;
  for (auto& [label, summary] : clusters) {
    summary.distinct_uas = cluster_uas[label].size();
    if (summary.families.size() > 1) ++out.mixed_family_clusters;
    out.clusters.push_back(std::move(summary));
  }
  std::stable_sort(out.clusters.begin(), out.clusters.end(),
                   [](const auto& a, const auto& b) { return a.users > b.users; });
  for (const auto& [agent, users] : ua_users) {
    if (users < 2) continue;
    ++out.multi_user_uas;
    out.users_in_multi_user_uas += users;
    if (ua_clusters[agent].size() > 1) {
      ++out.spanning_uas;
      out.users_in_spanning_uas += users;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

AmiMatrix compare_vectors(const std::array<Clustering, kVectorCount>& per_vector, Execution exec) {
  AmiMatrix m{};
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < kVectorCount; ++i) {
    m[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kVectorCount; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> scores(pairs.size());
  const auto np = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
  for (std::int64_t p = 0; p < np; ++p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    scores[static_cast<std::size_t>(p)] = ami(per_vector[i], per_vector[j]);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    m[i][j] = m[j][i] = scores[p];
  }
  return m;
}

std::array<Clustering, kVectorCount> collate_all(std::span<const UserRecord> records) {
  std::array<Clustering, kVectorCount> out;
  for (VectorId v : kAllVectors) out[vector_index(v)] = collate_vector(records, v);
  return out;
}

}  // namespace audiofp
