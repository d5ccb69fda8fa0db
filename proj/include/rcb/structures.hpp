#pragma once

// 1D-Tree and c-DAG builders plus single-range-cover (SRC) search.
//
// Both structures share one representation: nodes are stored level-major,
// each node owns a contiguous run of the sorted dataset (offset, count) and
// its canonical interval is derived from that run:
//
//   lo = 0 if the run starts at the first point, else the run's first point
//   hi = M if the run ends at the last point, else the next point after it
//
// so sibling intervals abut, every node's interval holds exactly its points,
// and the root spans the whole domain [0, M).

#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcb/core.hpp"

namespace rcb {

using NodeId = std::uint32_t;

struct NodeRecord {
  NodeId id = 0;
  int level = 0;
  Interval interval;
  std::uint64_t point_count = 0;
  std::uint64_t point_offset = 0;
  std::span<const NodeId> children;

  bool is_leaf() const { return children.empty(); }
};

struct SearchResult {
  NodeId node = 0;
  int level = 0;
  std::uint64_t covered_count = 0;
  std::uint64_t visited_nodes = 0;
  Interval interval;
};

class IndexStructure {
 public:
  const DagConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  const std::shared_ptr<const Dataset>& dataset_ptr() const { return dataset_; }

  NodeId root() const { return 0; }
  int height() const { return static_cast<int>(level_begin_.size()) - 2; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Node ids at `level` form the half-open range [first, last).
  std::pair<NodeId, NodeId> level_range(int level) const {
    return {level_begin_[static_cast<std::size_t>(level)], level_begin_[static_cast<std::size_t>(level) + 1]};
  }

  Interval interval(NodeId id) const {
    const Node& n = nodes_[id];
    const Dataset& d = *dataset_;
    std::uint64_t end = std::uint64_t{n.offset} + n.count;
    return {n.offset == 0 ? Coord{0} : d[n.offset], end == d.size() ? d.domain_size() : d[end]};
  }

  std::span<const NodeId> children(NodeId id) const {
    const Node& n = nodes_[id];
    return std::span<const NodeId>(children_).subspan(n.child_begin, n.child_count);
  }

  int level(NodeId id) const { return nodes_[id].level; }
  std::uint64_t point_count(NodeId id) const { return nodes_[id].count; }

  NodeRecord node(NodeId id) const {
    const Node& n = nodes_[id];
    return {id, n.level, interval(id), n.count, n.offset, children(id)};
  }

  /// True when all nodes of each level hold the same number of points.
  bool regular() const { return regular_; }

  /// Number of middle children whose start was clamped during construction.
  std::uint64_t clamped_children() const { return clamped_children_; }

 private:
  struct Node {
    std::uint32_t offset = 0;
    std::uint32_t count = 0;
    std::uint32_t child_begin = 0;
    std::uint16_t child_count = 0;
    std::uint8_t level = 0;
  };

  IndexStructure(std::shared_ptr<const Dataset> d, DagConfig c) : dataset_(std::move(d)), config_(c) {}

  friend IndexStructure build_structure(std::shared_ptr<const Dataset>, DagConfig);

  std::shared_ptr<const Dataset> dataset_;
  DagConfig config_;
  std::vector<Node> nodes_;
  std::vector<NodeId> children_;
  std::vector<NodeId> level_begin_;
  std::uint64_t clamped_children_ = 0;
  bool regular_ = true;
};

/// Builds the 1D-Tree (c == 2) or a c-DAG (c >= 3) level by level. Children
/// with identical point runs are created once per level and shared.
inline IndexStructure build_structure(std::shared_ptr<const Dataset> dataset, DagConfig config) {
  if (!dataset || dataset->empty()) throw ConstructionError("cannot build over an empty dataset");
  if (dataset->size() > UINT32_MAX) throw ConstructionError("dataset too large for 32-bit node offsets");

  IndexStructure s(std::move(dataset), config);
  const int c = config.branching();

  struct Run {
    std::uint32_t offset;
    std::uint32_t count;
    auto operator<=>(const Run&) const = default;
  };

  s.nodes_.push_back({0, static_cast<std::uint32_t>(s.dataset_->size()), 0, 0, 0});
  s.level_begin_ = {0, 1};

  std::vector<Run> runs;
  std::vector<std::vector<Run>> per_parent;
  for (int level = 0;; ++level) {
    const NodeId first = s.level_begin_[static_cast<std::size_t>(level)];
    const NodeId last = s.level_begin_[static_cast<std::size_t>(level) + 1];
    runs.clear();
    per_parent.assign(last - first, {});

    for (NodeId id = first; id < last; ++id) {
      const auto parent = s.nodes_[id];
      if (parent.count < 2) continue;
      const std::uint32_t n = parent.count;
      const std::uint32_t left = n / 2;
      const std::uint32_t right = n - left;
      const std::uint32_t parent_end = parent.offset + n;
      auto& mine = per_parent[id - first];
      mine.push_back({parent.offset, left});
      // Middle children start every `step` points. When the prescribed step
      // rounds to zero the middles advance one point at a time instead and
      // are clamped to end at the parent's last point.
      const std::uint32_t step = std::max<std::uint32_t>(1, n / (2 * static_cast<std::uint32_t>(c - 1)));
      for (int m = 1; m <= c - 2; ++m) {
        std::uint32_t start = parent.offset + static_cast<std::uint32_t>(m) * step;
        if (start + right > parent_end) {
          start = parent_end - right;
          ++s.clamped_children_;
        }
        mine.push_back({start, right});
      }
      mine.push_back({parent.offset + left, right});
      std::sort(mine.begin(), mine.end());
      mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
      runs.insert(runs.end(), mine.begin(), mine.end());
    }
    if (runs.empty()) break;

    std::sort(runs.begin(), runs.end());
    runs.erase(std::unique(runs.begin(), runs.end()), runs.end());
    for (const Run& r : runs)
      if (r.count != runs.front().count) s.regular_ = false;
    const NodeId next_first = static_cast<NodeId>(s.nodes_.size());
    for (const Run& r : runs)
      s.nodes_.push_back({r.offset, r.count, 0, 0, static_cast<std::uint8_t>(level + 1)});
    s.level_begin_.push_back(static_cast<NodeId>(s.nodes_.size()));

    for (NodeId id = first; id < last; ++id) {
      const auto& mine = per_parent[id - first];
      s.nodes_[id].child_begin = static_cast<std::uint32_t>(s.children_.size());
      s.nodes_[id].child_count = static_cast<std::uint16_t>(mine.size());
      for (const Run& r : mine) {
        auto it = std::lower_bound(runs.begin(), runs.end(), r);
        s.children_.push_back(next_first + static_cast<NodeId>(it - runs.begin()));
      }
    }
  }
  return s;
}

inline IndexStructure build_tree(std::shared_ptr<const Dataset> dataset) {
  return build_structure(std::move(dataset), DagConfig(2));
}
inline IndexStructure build_tree(Dataset dataset) {
  return build_tree(std::make_shared<const Dataset>(std::move(dataset)));
}

inline IndexStructure build_cdag(std::shared_ptr<const Dataset> dataset, DagConfig config) {
  if (config.branching() < 3) throw ConfigError("c-DAG requires c >= 3, got " + std::to_string(config.branching()));
  return build_structure(std::move(dataset), config);
}
inline IndexStructure build_cdag(Dataset dataset, DagConfig config) {
  return build_cdag(std::make_shared<const Dataset>(std::move(dataset)), config);
}

namespace detail {

// Exhaustive level-by-level descent. The frontier holds every node of the
// current level whose interval contains the query; every containing node at
// level l+1 has all of its parents in the level-l frontier, so the last
// non-empty frontier holds exactly the deepest covers.
template <RangeQuery Q>
SearchResult frontier_search(const IndexStructure& s, const Q& query) {
  std::vector<NodeId> frontier{s.root()};
  std::vector<NodeId> next;
  std::vector<NodeId> tested;
  std::uint64_t visited = 1;
  for (;;) {
    tested.clear();
    for (NodeId v : frontier)
      for (NodeId child : s.children(v)) tested.push_back(child);
    std::sort(tested.begin(), tested.end());
    tested.erase(std::unique(tested.begin(), tested.end()), tested.end());
    visited += tested.size();
    next.clear();
    for (NodeId child : tested)
      if (query.within(s.interval(child))) next.push_back(child);
    if (next.empty()) break;
    frontier.swap(next);
  }
  // Frontier ids are ascending and a level is ordered by lower endpoint.
  NodeId best = frontier.front();
  return {best, s.level(best), s.point_count(best), visited, s.interval(best)};
}

}  // namespace detail

/// SRC search: the inclusion-minimal node containing the query, ties going to
/// the smallest lower endpoint and then the smallest id.
///
/// On regular structures (equal point counts across each level, e.g. any N
/// that is a power of two) this is a single descent: step into the leftmost
/// child that still contains the query until no child does, then walk left
/// along the final level to the leftmost containing node. At most c nodes are
/// tested per level. Irregular structures use the exhaustive frontier descent.
template <RangeQuery Q>
SearchResult src_search(const IndexStructure& s, const Q& query) {
  if (!query.within_domain(s.dataset().domain_size())) throw DomainError("query outside the structure's domain");
  assert(query.within(s.interval(s.root())));
  if (!s.regular()) return detail::frontier_search(s, query);

  NodeId current = s.root();
  std::uint64_t visited = 1;
  for (;;) {
    NodeId next = current;
    for (NodeId child : s.children(current)) {
      ++visited;
      if (query.within(s.interval(child))) {
        next = child;
        break;
      }
    }
    if (next == current) break;
    // Each step strictly shrinks the candidate's point set.
    assert(s.point_count(next) < s.point_count(current));
    current = next;
  }
  const NodeId level_first = s.level_range(s.level(current)).first;
  while (current > level_first) {
    ++visited;
    if (!query.within(s.interval(current - 1))) break;
    --current;
  }
  return {current, s.level(current), s.point_count(current), visited, s.interval(current)};
}

inline std::uint64_t payload_size(const IndexStructure& s) {
  std::uint64_t total = 0;
  for (NodeId id = 0; id < s.node_count(); ++id) total += s.point_count(id);
  return total;
}

inline std::map<int, std::uint64_t> level_histogram(const IndexStructure& s) {
  std::map<int, std::uint64_t> out;
  for (int l = 0; l <= s.height(); ++l) {
    auto [a, b] = s.level_range(l);
    out[l] = b - a;
  }
  return out;
}

/// Dump layout:
///   {"c": int, "N": int, "M": int, "height": int, "root": 0,
///    "nodes": [[id, level, lo, hi, point_offset, point_count, [child ids]], ...]}
inline nlohmann::json to_json(const IndexStructure& s) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId id = 0; id < s.node_count(); ++id) {
    NodeRecord r = s.node(id);
    nodes.push_back({r.id, r.level, r.interval.lo, r.interval.hi, r.point_offset, r.point_count,
                     std::vector<NodeId>(r.children.begin(), r.children.end())});
  }
  return {{"c", s.config().branching()},
          {"N", s.dataset().size()},
          {"M", s.dataset().domain_size()},
          {"height", s.height()},
          {"root", s.root()},
          {"nodes", std::move(nodes)}};
}

}  // namespace rcb
