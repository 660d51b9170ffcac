#include "audiofp/report.hpp"

#include <algorithm>
#include <cstdio>

namespace audiofp {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_counts(const std::map<std::string, std::size_t>& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    if (!out.empty()) out.push_back(';');
    out += k + ":" + std::to_string(v);
  }
  return out;
}

}  // namespace

std::string format_fixed(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

std::string to_csv(const Table& t, const ReportMeta& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_field(cells[i]);
    }
    out.push_back('\n');
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

std::string to_text(const Table& t, const std::string& title) {
  std::vector<std::size_t> width(t.header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], cells[i].size());
    }
  };
  measure(t.header);
  for (const auto& row : t.rows) measure(row);

  std::string out;
  if (!title.empty()) out += title + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) {
      if (i) out += "  ";
      // first column left-aligned, the rest right-aligned
      const std::string pad(width[i] - cells[i].size(), ' ');
      out += i == 0 ? cells[i] + pad : pad + cells[i];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out.push_back('\n');
  };
  line(t.header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& row : t.rows) line(row);
  return out;
}

Table distinct_table(std::span<const UserRecord> records) {
  Table t{{"vector", "min", "max", "mean"}, {}};
  for (VectorId v : kAllVectors) {
    const DistinctStats s = distinct_per_user(records, v);
    t.rows.push_back({std::string(vector_name(v)), std::to_string(s.min), std::to_string(s.max),
                      format_fixed(s.mean, 2)});
  }
  return t;
}

Table stability_heatmap(std::span<const StabilityReport> reports) {
  Table t{{"vector", "s", "row", "col", "ami"}, {}};
  for (const StabilityReport& r : reports) {
    for (std::size_t i = 0; i < r.ami_matrix.size(); ++i) {
      for (std::size_t j = 0; j < r.ami_matrix[i].size(); ++j) {
        t.rows.push_back({std::string(vector_name(r.vector)), std::to_string(r.s),
                          std::to_string(i + 1), std::to_string(j + 1),
                          format_fixed(r.ami_matrix[i][j], 6)});
      }
    }
  }
  return t;
}

Table stability_summary(std::span<const StabilityReport> reports) {
  Table t{{"vector", "s", "subsets", "average_ami"}, {}};
  for (const StabilityReport& r : reports) {
    t.rows.push_back({std::string(vector_name(r.vector)), std::to_string(r.s),
                      std::to_string(r.ami_matrix.size()), format_fixed(r.average, 6)});
  }
  return t;
}

Table match_table(std::span<const MatchScoreEntry> entries) {
  Table t{{"vector", "s", "positives", "total", "score"}, {}};
  for (const MatchScoreEntry& e : entries) {
    t.rows.push_back({std::string(vector_name(e.vector)), std::to_string(e.s),
                      std::to_string(e.positives), std::to_string(e.total),
                      format_fixed(e.score, 4)});
  }
  return t;
}

Table diversity_table_report(std::span<const DiversityRow> rows) {
  Table t{{"fingerprint", "distinct", "unique", "entropy_bits", "normalized"}, {}};
  for (const DiversityRow& r : rows) {
    t.rows.push_back({r.name, std::to_string(r.report.distinct), std::to_string(r.report.unique),
                      format_fixed(r.report.entropy_bits, 3), format_fixed(r.report.normalized, 3)});
  }
  return t;
}

Table compare_table(const AmiMatrix& m) {
  Table t{{"row", "col", "ami"}, {}};
  for (VectorId a : kAllVectors) {
    for (VectorId b : kAllVectors) {
      t.rows.push_back({std::string(vector_name(a)), std::string(vector_name(b)),
                        format_fixed(m[vector_index(a)][vector_index(b)], 6)});
    }
  }
  return t;
}

Table ua_cluster_table(const UaHomogeneity& h, VectorId v) {
  Table t{{"vector", "cluster", "users", "distinct_uas", "families", "browser_os"}, {}};
  for (const ClusterUaSummary& c : h.clusters) {
    t.rows.push_back({std::string(vector_name(v)), c.label, std::to_string(c.users),
                      std::to_string(c.distinct_uas), join_counts(c.families),
                      join_counts(c.browser_os)});
  }
  return t;
}

Table ua_summary_table(const UaHomogeneity& h, VectorId v) {
  return Table{{"vector", "clusters", "multi_user_uas", "users_in_multi_user_uas", "spanning_uas",
                "users_in_spanning_uas", "mixed_family_clusters"},
               {{std::string(vector_name(v)), std::to_string(h.clusters.size()),
                 std::to_string(h.multi_user_uas), std::to_string(h.users_in_multi_user_uas),
                 std::to_string(h.spanning_uas), std::to_string(h.users_in_spanning_uas),
                 std::to_string(h.mixed_family_clusters)}}};
}

}  // namespace audiofp
