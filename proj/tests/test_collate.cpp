#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "audiofp/collate.hpp"
#include "oracles.hpp"

using namespace audiofp;

namespace {

ElementaryFingerprint efp(int i) {
  // Any distinct 32-hex strings will do for graph tests.
  char buf[33];
  std::snprintf(buf, sizeof buf, "%032x", i);
  return {VectorId::FFT, buf};
}

CollationGraph four_user_example() {
  CollationGraph g;
  for (int f : {1, 2, 3}) g.add_observation("U1", efp(f));
  for (int f : {3, 4, 5}) g.add_observation("U2", efp(f));
  for (int f : {6, 7}) g.add_observation("U3", efp(f));
  for (int f : {8, 9}) g.add_observation("U4", efp(f));
  return g;
}

}  // namespace

TEST_CASE("disjoint sets") {
  DisjointSets d;
  for (int i = 0; i < 6; ++i) d.add();
  CHECK(d.set_count() == 6);
  CHECK(d.unite(0, 1));
  CHECK(d.unite(2, 3));
  CHECK_FALSE(d.unite(1, 0));
  CHECK(d.unite(1, 3));
  CHECK(d.set_count() == 3);
  CHECK(d.find(0) == d.find(2));
  CHECK(d.find(4) != d.find(5));
}

TEST_CASE("four-user collation example") {
  CollationGraph g = four_user_example();
  CHECK(g.component_count() == 3);
  const Clustering c = g.components();
  CHECK(c.labels == std::map<std::string, std::string>{
                        {"U1", "U1"}, {"U2", "U1"}, {"U3", "U3"}, {"U4", "U4"}});
  CHECK(g.user_count() == 4);
  CHECK(g.fingerprint_count() == 9);
  CHECK(g.edge_count() == 10);
}

TEST_CASE("U5 joining one cluster does not merge") {
  CollationGraph g = four_user_example();
  const MergeReport first = g.add_observation("U5", efp(8));
  CHECK(first.new_user);
  CHECK_FALSE(first.merged);
  const MergeReport second = g.add_observation("U5", efp(9));
  CHECK_FALSE(second.merged);
  CHECK(g.component_count() == 3);
  CHECK(g.components().labels.at("U5") == "U4");
}

TEST_CASE("U5 bridging two clusters merges them") {
  CollationGraph g = four_user_example();
  CHECK_FALSE(g.add_observation("U5", efp(7)).merged);
  CHECK(g.component_count() == 3);
  const MergeReport bridge = g.add_observation("U5", efp(9));
  CHECK(bridge.merged);
  CHECK(g.component_count() == 2);
  const Clustering c = g.components();
  CHECK(c.labels.at("U3") == "U3");
  CHECK(c.labels.at("U4") == "U3");
  CHECK(c.labels.at("U5") == "U3");
}

TEST_CASE("repeated observations are idempotent") {
  CollationGraph g = four_user_example();
  const MergeReport again = g.add_observation("U1", efp(1));
  CHECK_FALSE(again.new_edge);
  CHECK_FALSE(again.merged);
  CHECK(g.edge_count() == 10);
}

TEST_CASE("vectors never share fingerprint nodes") {
  CollationGraph g;
  g.add_observation("a", {VectorId::AM, "00000000000000000000000000000001"});
  g.add_observation("b", {VectorId::FM, "00000000000000000000000000000001"});
  CHECK(g.component_count() == 2);
}

TEST_CASE("empty graph and singleton users") {
  CollationGraph g;
  CHECK(g.components().size() == 0);
  g.add_user("lonely");
  CHECK(g.component_count() == 1);
  CHECK(g.components().labels.at("lonely") == "lonely");
}

TEST_CASE("edge export") {
  CollationGraph g;
  g.add_observation("u1", efp(1));
  g.add_observation("u2", efp(1));
  std::ostringstream out;
  g.export_edges(out);
  CHECK(out.str() ==
        "u1 FFT:00000000000000000000000000000001\nu2 FFT:00000000000000000000000000000001\n");
}

TEST_CASE("union-find agrees with BFS on random graphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int users = 1 + static_cast<int>(rng() % 300);
    const int fps = 1 + static_cast<int>(rng() % 400);
    const int edges = static_cast<int>(rng() % 600);
    std::vector<std::string> names;
    for (int u = 0; u < users; ++u) names.push_back("u" + std::to_string(u));
    std::vector<std::pair<std::string, std::string>> edge_list;
    CollationGraph g;
    for (const auto& n : names) g.add_user(n);
    for (int e = 0; e < edges; ++e) {
      const int u = static_cast<int>(rng() % static_cast<unsigned>(users));
      const int f = static_cast<int>(rng() % static_cast<unsigned>(fps));
      const ElementaryFingerprint fp = efp(f);
      edge_list.emplace_back(names[static_cast<std::size_t>(u)], fingerprint_key(fp));
      g.add_observation(names[static_cast<std::size_t>(u)], fp);
      if (e % 97 == 0) {
        REQUIRE(g.components().labels == oracle::bfs_partition(names, edge_list));
      }
    }
    REQUIRE(g.components().labels == oracle::bfs_partition(names, edge_list));

    // any insertion order yields the same partition
    std::shuffle(edge_list.begin(), edge_list.end(), rng);
    CollationGraph shuffled;
    for (const auto& n : names) shuffled.add_user(n);
    for (const auto& [u, key] : edge_list) {
      shuffled.add_observation(u, {VectorId::FFT, key.substr(4)});
    }
    REQUIRE(shuffled.components() == g.components());
  }
}

TEST_CASE("component count never increases") {
  std::mt19937_64 rng(5);
  CollationGraph g;
  for (int u = 0; u < 200; ++u) g.add_user("u" + std::to_string(u));
  std::size_t prev = g.component_count();
  for (int e = 0; e < 2000; ++e) {
    g.add_observation("u" + std::to_string(rng() % 200), efp(static_cast<int>(rng() % 500)));
    const std::size_t now = g.component_count();
    REQUIRE(now <= prev);
    prev = now;
  }
}

TEST_CASE("distinct digests per user") {
  std::vector<UserRecord> records(3);
  const std::vector<std::vector<int>> per_user{{1, 1, 1}, {1, 2, 2}, {4, 5, 6}};
  for (std::size_t u = 0; u < 3; ++u) {
    records[u].user_id = "u" + std::to_string(u);
    for (int f : per_user[u]) records[u].per_vector[VectorId::FFT].push_back({efp(f), {}});
  }
  const DistinctStats s = distinct_per_user(records, VectorId::FFT);
  CHECK(s.min == 1);
  CHECK(s.max == 3);
  CHECK(s.mean == Catch::Approx(2.0));
  CHECK_THROWS_AS(distinct_per_user(records, VectorId::AM), std::invalid_argument);
}

TEST_CASE("subset graphs use only the requested iterations") {
  std::vector<UserRecord> records(2);
  records[0].user_id = "a";
  records[1].user_id = "b";
  // a: [1, 2], b: [3, 2] -> joined only when iteration 1 is included
  records[0].per_vector[VectorId::FFT] = {{efp(1), {}}, {efp(2), {}}};
  records[1].per_vector[VectorId::FFT] = {{efp(3), {}}, {efp(2), {}}};
  CHECK(build_graph(records, VectorId::FFT, 0, 1).component_count() == 2);
  CHECK(build_graph(records, VectorId::FFT, 0, 2).component_count() == 1);
  CHECK(collate_vector(records, VectorId::FFT).cluster_count() == 1);
}
