#include <gtest/gtest.h>

#include <memory>
#include <vector>

#include "rcb/ingest.hpp"
#include "rcb/oracle.hpp"
#include "rcb/random.hpp"
#include "rcb/structures.hpp"

using namespace rcb;

namespace {

std::shared_ptr<const Dataset> unit_grid(std::uint64_t n) {
  return std::make_shared<const Dataset>(synth_uniform(n, n));
}

std::vector<Interval> level_intervals(const IndexStructure& s, int level) {
  std::vector<Interval> out;
  auto [a, b] = s.level_range(level);
  for (NodeId id = a; id < b; ++id) out.push_back(s.interval(id));
  return out;
}

}  // namespace

TEST(BuildTree, UniformSixteen) {
  auto t = build_tree(unit_grid(16));
  EXPECT_EQ(t.height(), 4);
  EXPECT_EQ(level_intervals(t, 1), (std::vector<Interval>{{0, 8}, {8, 16}}));
  EXPECT_EQ(level_intervals(t, 2), (std::vector<Interval>{{0, 4}, {4, 8}, {8, 12}, {12, 16}}));
  EXPECT_EQ(level_histogram(t), (std::map<int, std::uint64_t>{{0, 1}, {1, 2}, {2, 4}, {3, 8}, {4, 16}}));
}

TEST(BuildTree, SinglePointIsRootLeaf) {
  auto t = build_tree(Dataset({0}, 1));
  EXPECT_EQ(t.height(), 0);
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_TRUE(t.node(t.root()).is_leaf());
  EXPECT_EQ(payload_size(t), 1u);
}

TEST(BuildTree, EmptyDatasetFails) {
  EXPECT_THROW(build_tree(Dataset({}, 4)), ConstructionError);
}

TEST(BuildCdag, ThreeDagLevelTwo) {
  auto g = build_cdag(unit_grid(16), DagConfig(3));
  EXPECT_EQ(level_intervals(g, 2),
            (std::vector<Interval>{{0, 4}, {2, 6}, {4, 8}, {6, 10}, {8, 12}, {10, 14}, {12, 16}}));
  EXPECT_EQ(level_histogram(g).at(2), 7u);
}

TEST(BuildCdag, FiveDagLevelOne) {
  auto g = build_cdag(unit_grid(16), DagConfig(5));
  EXPECT_EQ(level_histogram(g).at(1), 5u);
}

TEST(BuildCdag, TwoPointsMergeCoincidentMiddles) {
  for (int c : {3, 5, 9}) {
    auto g = build_cdag(unit_grid(2), DagConfig(c));
    EXPECT_EQ(g.node_count(), 3u) << "c=" << c;
    EXPECT_EQ(g.children(g.root()).size(), 2u);
  }
}

TEST(BuildCdag, RejectsTreeBranching) {
  EXPECT_THROW(build_cdag(unit_grid(4), DagConfig(2)), ConfigError);
}

TEST(BuildCdag, ThreeDagPayloadMatchesEnumeration) {
  auto g = build_cdag(unit_grid(16), DagConfig(3));
  std::uint64_t sum = 0;
  for (const auto& [level, nodes] : level_histogram(g)) {
    auto [a, b] = g.level_range(level);
    for (NodeId id = a; id < b; ++id) sum += g.point_count(id);
  }
  EXPECT_EQ(payload_size(g), sum);
  // Levels hold 1, 3, 7, 15, 16 nodes of 16, 8, 4, 2, 1 points.
  EXPECT_EQ(payload_size(g), 16u + 24 + 28 + 30 + 16);
}

TEST(Payload, BalancedTreeFormula) {
  for (int e = 1; e <= 12; ++e) {
    std::uint64_t n = std::uint64_t{1} << e;
    EXPECT_EQ(payload_size(build_tree(unit_grid(n))), n * (e + 1));
  }
}

TEST(Structure, NodeInvariantsOnRandomData) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::uint64_t n = 1 + rng.below(300);
    auto d = std::make_shared<const Dataset>(synth_clustered(n, n * 8, 1 + static_cast<int>(rng.below(4)), 0.05, rng.next()));
    for (int c : {2, 3, 5, 9}) {
      auto s = build_structure(d, DagConfig(c));
      EXPECT_EQ(s.interval(s.root()), (Interval{0, d->domain_size()}));
      for (NodeId id = 0; id < s.node_count(); ++id) {
        Interval iv = s.interval(id);
        ASSERT_LT(iv.lo, iv.hi);
        EXPECT_EQ(s.point_count(id), exact_range_answer(*d, QueryRange{double(iv.lo), double(iv.hi - iv.lo)}));
        auto kids = s.children(id);
        if (kids.empty()) continue;
        Coord lo = iv.hi, hi = iv.lo;
        for (NodeId k : kids) {
          EXPECT_EQ(s.level(k), s.level(id) + 1);
          EXPECT_TRUE(iv.contains(s.interval(k)));
          lo = std::min(lo, s.interval(k).lo);
          hi = std::max(hi, s.interval(k).hi);
        }
        EXPECT_EQ(lo, iv.lo);
        EXPECT_EQ(hi, iv.hi);
      }
    }
  }
}

TEST(SrcSearch, FigureOneQueries) {
  auto d = unit_grid(16);
  auto t = build_tree(d);
  auto g = build_cdag(d, DagConfig(3));
  auto t1 = src_search(t, QueryRange{2, 4});
  EXPECT_EQ(t1.level, 1);
  EXPECT_EQ(t1.interval, (Interval{0, 8}));
  auto g1 = src_search(g, QueryRange{2, 4});
  EXPECT_EQ(g1.level, 2);
  EXPECT_EQ(g1.interval, (Interval{2, 6}));
  for (const IndexStructure* s : {&t, &g}) {
    auto r = src_search(*s, QueryRange{11, 4});
    EXPECT_EQ(r.level, 1);
    EXPECT_EQ(r.interval, (Interval{8, 16}));
  }
}

TEST(SrcSearch, PointQueryReturnsSameLeaf) {
  auto d = unit_grid(64);
  auto t = build_tree(d);
  for (int c : {3, 5, 9}) {
    auto g = build_cdag(d, DagConfig(c));
    for (Coord x = 0; x < 64; ++x) {
      QueryRange q{double(x), 1};
      auto a = src_search(t, q);
      auto b = src_search(g, q);
      EXPECT_EQ(a.level, b.level);
      EXPECT_EQ(a.interval, (Interval{x, x + 1}));
      EXPECT_EQ(b.interval, (Interval{x, x + 1}));
    }
  }
}

TEST(SrcSearch, OutsideDomainFails) {
  auto t = build_tree(unit_grid(16));
  EXPECT_THROW(src_search(t, QueryRange{14, 4}), DomainError);
  EXPECT_THROW(src_search(t, QueryRange{-1, 2}), DomainError);
}

TEST(SrcSearch, MatchesBruteForceWithinVisitCap) {
  SplitMix64 rng(17);
  for (std::uint64_t n : {64u, 512u}) {
    for (bool skewed : {false, true}) {
      auto d = skewed ? std::make_shared<const Dataset>(synth_clustered(n, n * 32, 3, 0.02, rng.next())) : unit_grid(n);
      for (int c : {2, 3, 5, 9}) {
        auto s = build_structure(d, DagConfig(c));
        const std::uint64_t cap = static_cast<std::uint64_t>(c) * (s.height() + 1);
        for (int i = 0; i < 300; ++i) {
          double m = static_cast<double>(d->domain_size());
          double len = 1 + rng.uniform() * (m - 1);
          QueryRange q{rng.uniform() * (m - len), len};
          auto fast = src_search(s, q);
          auto ref = brute_force_src(s, q);
          ASSERT_EQ(fast.node, ref.node) << "N=" << n << " c=" << c << " q=[" << q.start << "," << q.end() << ")";
          EXPECT_LE(fast.visited_nodes, cap);
        }
      }
    }
  }
}

TEST(SrcSearch, IrregularSizesMatchBruteForce) {
  SplitMix64 rng(23);
  for (std::uint64_t n : {5u, 37u, 1000u}) {
    auto d = unit_grid(n);
    for (int c : {3, 5}) {
      auto s = build_cdag(d, DagConfig(c));
      EXPECT_FALSE(s.regular());
      for (int i = 0; i < 200; ++i) {
        double len = 1 + rng.uniform() * (double(n) - 1);
        QueryRange q{rng.uniform() * (double(n) - len), len};
        EXPECT_EQ(src_search(s, q).node, brute_force_src(s, q).node);
      }
    }
  }
}

TEST(ToJson, LayoutFields) {
  auto g = build_cdag(unit_grid(4), DagConfig(3));
  auto j = to_json(g);
  EXPECT_EQ(j["c"], 3);
  EXPECT_EQ(j["N"], 4);
  EXPECT_EQ(j["nodes"].size(), g.node_count());
  EXPECT_EQ(j["nodes"][0][2], 0);
  EXPECT_EQ(j["nodes"][0][3], 4);
}
