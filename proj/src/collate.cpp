#include "audiofp/collate.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

namespace audiofp {

std::size_t DisjointSets::add() {
  parent_.push_back(parent_.size());
  rank_.push_back(0);
  ++sets_;
  return parent_.size() - 1;
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

std::size_t DisjointSets::find(std::size_t x) const {
  while (parent_[x] != x) x = parent_[x];
  return x;
}

bool DisjointSets::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return false;
  if (rank_[x] < rank_[y]) std::swap(x, y);
  parent_[y] = x;
  if (rank_[x] == rank_[y]) ++rank_[x];
  --sets_;
  return true;
}

std::size_t Clustering::cluster_count() const {
  std::set<std::string_view> distinct;
  for (const auto& [user, label] : labels) distinct.insert(label);
  return distinct.size();
}

std::string fingerprint_key(const ElementaryFingerprint& fp) {
  std::string key(vector_name(fp.vector));
  key.push_back(':');
  key += fp.digest;
  return key;
}

std::size_t CollationGraph::new_node(std::size_t user_slot) {
  const std::size_t node = dsu_.add();
  node_user_.push_back(user_slot);
  adjacency_.emplace_back();
  fingerprint_keys_.emplace_back();
  return node;
}

void CollationGraph::add_user(std::string_view user) {
  if (users_.contains(std::string(user))) return;
  const std::size_t slot = user_names_.size();
  user_names_.emplace_back(user);
  users_.emplace(std::string(user), new_node(slot));
}

MergeReport CollationGraph::add_observation(std::string_view user,
                                            const ElementaryFingerprint& fp) {
  MergeReport report;
  std::size_t u = 0;
  if (auto it = users_.find(std::string(user)); it != users_.end()) {
    u = it->second;
  } else {
    add_user(user);
    u = users_.at(std::string(user));
    report.new_user = true;
  }

  std::string key = fingerprint_key(fp);
  std::size_t f = 0;
  if (auto it = fingerprints_.find(key); it != fingerprints_.end()) {
    f = it->second;
  } else {
    f = new_node(kNoUser);
    fingerprint_keys_[f] = key;
    fingerprints_.emplace(std::move(key), f);
    report.new_fingerprint = true;
  }

  const std::uint64_t edge = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(f);
  if (!edges_.insert(edge).second) return report;
  report.new_edge = true;
  adjacency_[u].push_back(f);
  adjacency_[f].push_back(u);
  edge_order_.emplace_back(u, f);
  const bool distinct = dsu_.unite(u, f);
  report.merged = distinct && !report.new_user && !report.new_fingerprint;
  return report;
}

std::optional<std::size_t> CollationGraph::user_node(std::string_view user) const {
  if (auto it = users_.find(std::string(user)); it != users_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::size_t> CollationGraph::fingerprint_node(const ElementaryFingerprint& fp) const {
  if (auto it = fingerprints_.find(fingerprint_key(fp)); it != fingerprints_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::size_t CollationGraph::component_count() const {
  std::set<std::size_t> roots;
  for (const auto& [name, node] : users_) roots.insert(dsu_.find(node));
  return roots.size();
}

Clustering CollationGraph::components() const {
  std::unordered_map<std::size_t, const std::string*> smallest;
  for (const auto& [name, node] : users_) {
    const std::size_t r = dsu_.find(node);
    auto [it, inserted] = smallest.emplace(r, &name);
    if (!inserted && name < *it->second) it->second = &name;
  }
  Clustering out;
  for (const auto& [name, node] : users_) out.labels.emplace(name, *smallest.at(dsu_.find(node)));
  return out;
}

void CollationGraph::export_edges(std::ostream& out) const {
  for (const auto& [u, f] : edge_order_) {
    out << user_names_[node_user_[u]] << ' ' << fingerprint_keys_[f] << '\n';
  }
}

CollationGraph build_graph(std::span<const UserRecord> records, VectorId v, std::size_t begin,
                           std::size_t end) {
  CollationGraph g;
  for (const UserRecord& r : records) {
    g.add_user(r.user_id);
    auto it = r.per_vector.find(v);
    if (it == r.per_vector.end()) continue;
    const auto& runs = it->second;
    for (std::size_t i = begin; i < std::min(end, runs.size()); ++i) {
      g.add_observation(r.user_id, runs[i].fingerprint);
    }
  }
  return g;
}

Clustering collate_vector(std::span<const UserRecord> records, VectorId v) {
  return build_graph(records, v, 0, std::numeric_limits<std::size_t>::max()).components();
}

DistinctStats distinct_per_user(std::span<const UserRecord> records, VectorId v) {
  if (records.empty()) throw std::invalid_argument("distinct_per_user: no records");
  DistinctStats stats;
  stats.min = std::numeric_limits<std::size_t>::max();
  double total = 0.0;
  for (const UserRecord& r : records) {
    auto it = r.per_vector.find(v);
    if (it == r.per_vector.end() || it->second.empty()) {
      throw std::invalid_argument("user " + r.user_id + " has no iterations for " +
                                  std::string(vector_name(v)));
    }
    std::set<std::string_view> distinct;
    for (const IterationResult& run : it->second) distinct.insert(run.fingerprint.digest);
    stats.min = std::min(stats.min, distinct.size());
    stats.max = std::max(stats.max, distinct.size());
    total += static_cast<double>(distinct.size());
  }
  stats.mean = total / static_cast<double>(records.size());
  return stats;
}

}  // namespace audiofp
