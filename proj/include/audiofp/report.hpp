#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "audiofp/analysis.hpp"
#include "audiofp/collate.hpp"

namespace audiofp {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Key/value lines emitted as "# key=value" before the CSV header.
using ReportMeta = std::map<std::string, std::string>;

std::string to_csv(const Table& t, const ReportMeta& meta = {});
/// Column-aligned plain text with an optional title line.
std::string to_text(const Table& t, const std::string& title = {});

std::string format_fixed(double x, int precision);

/// Per-vector min/max/mean distinct digests per user.
Table distinct_table(std::span<const UserRecord> records);
/// Long form: vector, s, row, col, ami.
Table stability_heatmap(std::span<const StabilityReport> reports);
/// vector, s, subsets, average_ami.
Table stability_summary(std::span<const StabilityReport> reports);
Table match_table(std::span<const MatchScoreEntry> entries);
Table diversity_table_report(std::span<const DiversityRow> rows);
/// Long form: row, col, ami over vector names.
Table compare_table(const AmiMatrix& m);
/// One row per cluster: label, users, distinct_uas, families, browser_os.
Table ua_cluster_table(const UaHomogeneity& h, VectorId v);
Table ua_summary_table(const UaHomogeneity& h, VectorId v);

}  // namespace audiofp
