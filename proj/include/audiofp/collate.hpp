#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "audiofp/record.hpp"
#include "audiofp/vectors.hpp"

namespace audiofp {

/// Union-find with path halving and union by rank.
class DisjointSets {
 public:
  std::size_t add();
  std::size_t find(std::size_t x);
  /// Root lookup without path compression, for const callers.
  std::size_t find(std::size_t x) const;
  /// True if x and y were in different sets.
  bool unite(std::size_t x, std::size_t y);
  std::size_t size() const { return parent_.size(); }
  std::size_t set_count() const { return sets_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::size_t sets_ = 0;
};

/// Partition of users; each label is the smallest user id in its component.
struct Clustering {
  std::map<std::string, std::string> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t cluster_count() const;
  bool operator==(const Clustering&) const = default;
};

struct MergeReport {
  // Both endpoints already existed and sat in different components.
  bool merged = false;
  bool new_user = false;
  bool new_fingerprint = false;
  bool new_edge = false;
};

/// Bipartite user <-> elementary-fingerprint graph. Connected components are
/// collated fingerprints. Fingerprint nodes are keyed by (vector, digest), so
/// one graph can hold several vectors without cross-talk.
class CollationGraph {
 public:
  MergeReport add_observation(std::string_view user, const ElementaryFingerprint& fp);
  /// Registers a user with no observations (its own singleton cluster).
  void add_user(std::string_view user);

  std::optional<std::size_t> user_node(std::string_view user) const;
  std::optional<std::size_t> fingerprint_node(const ElementaryFingerprint& fp) const;
  std::size_t root(std::size_t node) const { return dsu_.find(node); }

  std::size_t node_count() const { return dsu_.size(); }
  std::size_t user_count() const { return user_names_.size(); }
  std::size_t fingerprint_count() const { return node_count() - user_count(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool is_user(std::size_t node) const { return node_user_[node] != kNoUser; }
  const std::string& user_name(std::size_t node) const { return user_names_[node_user_[node]]; }
  const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }

  /// Number of components that contain at least one user.
  std::size_t component_count() const;
  Clustering components() const;

  /// One "user vector:digest" pair per line, in insertion order.
  void export_edges(std::ostream& out) const;

 private:
  static constexpr std::size_t kNoUser = static_cast<std::size_t>(-1);

  std::size_t new_node(std::size_t user_slot);

  DisjointSets dsu_;
  std::unordered_map<std::string, std::size_t> users_;
  std::unordered_map<std::string, std::size_t> fingerprints_;
  std::vector<std::string> user_names_;        // by user slot
  std::vector<std::string> fingerprint_keys_;  // by node, empty for users
  std::vector<std::size_t> node_user_;         // node -> user slot or kNoUser
  std::vector<std::vector<std::size_t>> adjacency_;
  std::unordered_set<std::uint64_t> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> edge_order_;
};

std::string fingerprint_key(const ElementaryFingerprint& fp);

/// Graph of one vector over iterations [begin, end) of every record. Users with
/// no iterations in range still appear, as singletons.
CollationGraph build_graph(std::span<const UserRecord> records, VectorId v, std::size_t begin,
                           std::size_t end);

/// Collation over all iterations.
Clustering collate_vector(std::span<const UserRecord> records, VectorId v);

struct DistinctStats {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
};

/// Per-user count of distinct raw digests for one vector.
DistinctStats distinct_per_user(std::span<const UserRecord> records, VectorId v);

}  // namespace audiofp
