#pragma once

// Reference computations: a literal scan-every-node SRC, exact range counts,
// and the exact start-position sweep that produces level-difference
// distributions directly from built structures.

#include <algorithm>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "rcb/core.hpp"
#include "rcb/structures.hpp"

namespace rcb {

/// Number of dataset points inside the query.
template <RangeQuery Q>
std::uint64_t exact_range_answer(const Dataset& d, const Q& query) {
  std::uint64_t n = 0;
  for (Coord p : d.points())
    if (query.contains_point(p)) ++n;
  return n;
}

/// Scans every node; among covers with no covering child picks the deepest,
/// then smallest lower endpoint, then smallest id.
template <RangeQuery Q>
SearchResult brute_force_src(const IndexStructure& s, const Q& query) {
  if (!query.within_domain(s.dataset().domain_size())) throw DomainError("query outside the structure's domain");
  bool found = false;
  SearchResult best;
  for (NodeId id = 0; id < s.node_count(); ++id) {
    Interval iv = s.interval(id);
    if (!query.within(iv)) continue;
    bool child_covers = false;
    for (NodeId ch : s.children(id))
      if (query.within(s.interval(ch))) {
        child_covers = true;
        break;
      }
    if (child_covers) continue;
    int lvl = s.level(id);
    bool better = !found || lvl > best.level || (lvl == best.level && iv.lo < best.interval.lo);
    if (better) {
      best = {id, lvl, s.point_count(id), 0, iv};
      found = true;
    }
  }
  if (!found) throw DomainError("no node covers the query");
  best.visited_nodes = s.node_count();
  return best;
}

struct ExactLdd {
  LevelDifferenceDistribution distribution;
  /// Length of start positions x producing each (tree level, dag level).
  std::map<std::pair<int, int>, Rational> pair_measure;
  /// Level pairs observed at the zero-measure critical starts.
  std::set<std::pair<int, int>> critical_pairs;
  /// Length of the start space, M - s.
  Rational span;
};

/// Exact level-difference distribution for uniformly random real starts
/// x in [0, M - s]. The start space is cut at every x where some node's
/// containment of [x, x + s) can change (x = a or x = a - s for a node
/// endpoint a); within each open piece both searches return a fixed level,
/// evaluated at the piece's midpoint.
inline ExactLdd exact_level_measure(const IndexStructure& tree, const IndexStructure& dag, const Rational& s) {
  if (tree.dataset_ptr() != dag.dataset_ptr() && !(tree.dataset() == dag.dataset()))
    throw ValidationError("structures are built over different datasets");
  const Dataset& d = tree.dataset();
  const std::uint64_t n_points = d.size();
  if (s < 1 || s > Rational(n_points) || s > Rational(d.domain_size()))
    throw ParameterError("query length " + to_string(s) + " outside [1, N]");
  if (numerator(s) > BigInt(INT32_MAX) || denominator(s) > BigInt(INT32_MAX))
    throw ParameterError("query length " + to_string(s) + " has too large a representation");

  const auto p = numerator(s).convert_to<std::int64_t>();
  const auto q = denominator(s).convert_to<std::int64_t>();
  const auto m_scaled = static_cast<std::int64_t>(d.domain_size()) * q;
  const std::int64_t last_start = m_scaled - p;  // in units of 1/q

  std::vector<Coord> endpoints;
  endpoints.reserve(2 * (tree.node_count() + dag.node_count()));
  for (const IndexStructure* st : {&tree, &dag})
    for (NodeId id = 0; id < st->node_count(); ++id) {
      Interval iv = st->interval(id);
      endpoints.push_back(iv.lo);
      endpoints.push_back(iv.hi);
    }
  std::sort(endpoints.begin(), endpoints.end());
  endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());

  std::vector<std::int64_t> cuts{0, last_start};
  for (Coord a : endpoints) {
    std::int64_t as = static_cast<std::int64_t>(a) * q;
    for (std::int64_t x : {as, as - p})
      if (x >= 0 && x <= last_start) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto levels_at = [&](const ExactQuery& query) {
    return std::pair{src_search(tree, query).level, src_search(dag, query).level};
  };

  ExactLdd out;
  out.span = Rational(last_start, q);
  const int kappa = kappa_of(n_points, s);

  for (std::int64_t x : cuts) out.critical_pairs.insert(levels_at(ExactQuery{x, p, q}));

  if (s == 1) {
    // Unit-length queries are point queries: starts range over the integer
    // grid, each carrying an equal share of the span.
    std::map<std::pair<int, int>, std::uint64_t> hits;
    for (Coord x = 0; x < d.domain_size(); ++x) ++hits[levels_at(ExactQuery{static_cast<std::int64_t>(x), 1, 1})];
    std::map<int, Rational> mass;
    for (int k = 0; k <= kappa; ++k) mass[k] = 0;
    const Rational points(d.domain_size());
    for (const auto& [pair, count] : hits) {
      out.pair_measure[pair] = Rational(count) * out.span / points;
      mass[pair.second - pair.first] += Rational(count) / points;
    }
    out.distribution = LevelDifferenceDistribution(kappa, std::move(mass));
    return out;
  }

  if (cuts.size() == 1) {
    // Single admissible start: the distribution is the point mass it produces.
    auto [t, g] = *out.critical_pairs.begin();
    out.distribution = LevelDifferenceDistribution::point_mass(g - t, kappa);
    return out;
  }

  std::map<std::pair<int, int>, std::int64_t> lengths;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    ExactQuery mid{cuts[i] + cuts[i + 1], 2 * p, 2 * q};
    lengths[levels_at(mid)] += cuts[i + 1] - cuts[i];
  }

  std::map<int, Rational> mass;
  for (int k = 0; k <= kappa; ++k) mass[k] = 0;
  for (const auto& [pair, len] : lengths) {
    out.pair_measure[pair] = Rational(len, q);
    mass[pair.second - pair.first] += Rational(len, last_start);
  }
  out.distribution = LevelDifferenceDistribution(kappa, std::move(mass));
  return out;
}

inline ExactLdd exact_level_measure(const IndexStructure& tree, const IndexStructure& dag, std::uint64_t s) {
  return exact_level_measure(tree, dag, Rational(s));
}

}  // namespace rcb
