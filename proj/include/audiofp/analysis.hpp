#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "audiofp/collate.hpp"
#include "audiofp/execution.hpp"
#include "audiofp/record.hpp"
#include "audiofp/vectors.hpp"

namespace audiofp {

// ---------------------------------------------------------------------------
// Iteration subsets

struct IterationSet {
  std::size_t k = 0;
  std::size_t s = 0;
  std::vector<std::pair<std::size_t, std::size_t>> subsets;  // [begin, end)
};

/// floor(k/s) contiguous subsets of size s; trailing iterations are dropped.
IterationSet split_iterations(std::size_t k, std::size_t s);

// ---------------------------------------------------------------------------
// Adjusted mutual information (natural log; arithmetic-mean normalization;
// expected MI under the hypergeometric permutation model).

double entropy_nats(std::span<const std::size_t> labels);
double mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b);
double expected_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// AMI of two labelings of the same items. Identical partitions score 1.
double ami(std::span<const std::size_t> a, std::span<const std::size_t> b);
/// Throws std::invalid_argument unless both clusterings label the same users.
double ami(const Clustering& a, const Clustering& b);

// ---------------------------------------------------------------------------
// Entropy / diversity

struct ClusterCounts {
  std::size_t total = 0;             // U
  std::vector<std::size_t> counts;   // u_i, each >= 1

  void validate() const;
};

struct DiversityReport {
  std::size_t distinct = 0;
  std::size_t unique = 0;
  double entropy_bits = 0.0;
  double normalized = 0.0;
};

/// e = -sum (u_i/U) log2(u_i/U)
double shannon_entropy(const ClusterCounts& c);
/// e / log2(U); U must be >= 2.
double normalized_entropy(double entropy_bits, std::size_t users);
DiversityReport diversity(const ClusterCounts& c);

/// One value per user, aligned with the record order.
using LabelColumn = std::vector<std::string>;

ClusterCounts counts_of(const LabelColumn& column);
/// Groups users by equality of their tuple of column values.
ClusterCounts combine_vectors(std::span<const LabelColumn> columns);

LabelColumn column_from_clustering(std::span<const UserRecord> records, const Clustering& c);

struct DiversityRow {
  std::string name;
  DiversityReport report;
};

/// Rows for every audio vector (collated), their combination, the comparison
/// vectors (Canvas, Fonts, UA), their combinations with audio, and the audio
/// configuration properties.
std::vector<DiversityRow> diversity_table(std::span<const UserRecord> records);

// ---------------------------------------------------------------------------
// Stability

struct StabilityReport {
  VectorId vector = VectorId::DC;
  std::size_t s = 0;
  std::vector<std::vector<double>> ami_matrix;  // symmetric, unit diagonal
  double average = 1.0;                         // mean of off-diagonal entries
};

/// One collated clustering per iteration subset.
std::vector<Clustering> subset_clusterings(std::span<const UserRecord> records, VectorId v,
                                           const IterationSet& set,
                                           Execution exec = Execution::Parallel);

/// Pairwise AMI among subset clusterings; requires at least two subsets.
StabilityReport stability(std::span<const UserRecord> records, VectorId v, std::size_t s,
                          Execution exec = Execution::Parallel);

/// Iterations per user shared by every record and vector.
std::size_t common_iterations(std::span<const UserRecord> records);

// ---------------------------------------------------------------------------
// Match scores

enum class MatchOutcome { Positive, NewCluster, Merge, WrongCluster };

/// Classifies an evaluation subset against a training graph. Fingerprints absent
/// from the training graph are ignored; positive iff the rest touch exactly
/// one component and it is the user's own.
MatchOutcome classify_match(const CollationGraph& training, std::string_view user,
                            std::span<const ElementaryFingerprint> fingerprints);

struct MatchScoreEntry {
  VectorId vector = VectorId::DC;
  std::size_t s = 0;
  std::size_t positives = 0;
  std::size_t total = 0;
  double score = 0.0;
};

/// Training graph from subset 1; every (user, later subset) pair classified.
MatchScoreEntry match_score(std::span<const UserRecord> records, VectorId v, std::size_t s);

// ---------------------------------------------------------------------------
// User-Agent homogeneity

struct BrowserInfo {
  std::string family;  // Firefox, Chrome, Edge, Opera, Samsung, Other
  std::string os;      // Windows, MacOS, Android, Linux, iOS, Other
};

BrowserInfo parse_user_agent(std::string_view ua);

struct ClusterUaSummary {
  std::string label;
  std::size_t users = 0;
  std::size_t distinct_uas = 0;
  std::map<std::string, std::size_t> families;
  std::map<std::string, std::size_t> browser_os;  // "Chrome/Windows" -> users
};

struct UaHomogeneity {
  std::vector<ClusterUaSummary> clusters;  // by descending size, then label
  std::size_t multi_user_uas = 0;          // UAs shared by >= 2 users
  std::size_t users_in_multi_user_uas = 0;
  std::size_t spanning_uas = 0;            // multi-user UAs seen in > 1 cluster
  std::size_t users_in_spanning_uas = 0;
  std::size_t mixed_family_clusters = 0;   // clusters containing > 1 browser family
};

/// `ua` maps every clustered user to its User-Agent string.
UaHomogeneity ua_homogeneity(const Clustering& clustering,
                             const std::map<std::string, std::string>& ua);

// ---------------------------------------------------------------------------
// Cross-vector agreement

using AmiMatrix = std::array<std::array<double, kVectorCount>, kVectorCount>;

AmiMatrix compare_vectors(const std::array<Clustering, kVectorCount>& per_vector,
                          Execution exec = Execution::Parallel);

std::array<Clustering, kVectorCount> collate_all(std::span<const UserRecord> records);

}  // namespace audiofp
