// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.
//
// Grid criteria compare the closed forms against the exact start-position
// sweep, which is computed from the built structures alone.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcb/rcb.hpp"

using namespace rcb;

namespace {

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  lines[id] = std::string(ok ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + title + ": " + detail;
  if (!ok) ++failures;
}

void skip(int id, const std::string& title, const std::string& detail) {
  lines[id] = "SKIP [" + std::to_string(id) + "] " + title + ": " + detail;
}

std::shared_ptr<const Dataset> unit_grid(std::uint64_t n) {
  return std::make_shared<const Dataset>(synth_uniform(n, n));
}

constexpr int kNMin = 2;
constexpr int kNMax = 9;
constexpr int kBranchings[] = {3, 5, 9};

struct GridTally {
  std::uint64_t points = 0;
  std::uint64_t failed = 0;
  std::string first_failure;

  void check(bool ok, const std::string& where) {
    ++points;
    if (!ok && failed++ == 0) first_failure = where;
  }
  std::string summary() const {
    std::string s = std::to_string(points - failed) + "/" + std::to_string(points) + " grid points";
    if (failed) s += ", first failure at " + first_failure;
    return s;
  }
};

std::string where(std::uint64_t n, int c, const Rational& s) {
  return "N=" + std::to_string(n) + " c=" + std::to_string(c) + " s=" + to_string(s);
}

void grid_criteria() {
  GridTally exactness, level_bound, fp_bound, confinement, confinement_half;
  double worst_level_ratio = 0;
  Rational spot_5_3 = -1, spot_3_4 = -1;

  const auto t0 = std::chrono::steady_clock::now();
  for (int n = kNMin; n <= kNMax; ++n) {
    const std::uint64_t big_n = std::uint64_t{1} << (n + 1);
    auto data = unit_grid(big_n);
    auto tree = build_tree(data);
    for (int c : kBranchings) {
      auto dag = build_cdag(data, DagConfig(c));
      const Rational bound = Rational(2 * (c - 2), c - 1);

      std::vector<Rational> lengths;
      for (std::uint64_t s = 1; s <= big_n; ++s) lengths.emplace_back(s);
      // Non-integer lengths exercise level confinement on the smaller sizes.
      if (big_n <= 64)
        for (std::uint64_t s = 1; s < big_n; ++s) lengths.emplace_back(2 * s + 1, 2);

      for (const Rational& s : lengths) {
        const bool integer = denominator(s) == 1;
        const std::string at = where(big_n, c, s);
        ExactLdd exact = exact_level_measure(tree, dag, s);
        const LevelDifferenceDistribution& sweep = exact.distribution;
        const int kappa = kappa_of(big_n, s);

        if (integer) {
          exactness.check(theoretical_ldd(big_n, c, s) == sweep, at);

          const Rational ek = expected_level_difference(sweep);
          level_bound.check(ek < bound && ek == expected_level_difference_closed_form(big_n, c, s), at);
          worst_level_ratio = std::max(worst_level_ratio, to_double(ek / bound));

          const Rational e2k = expected_fp_ratio(sweep);
          const Rational half_kappa(kappa, 2);
          const Rational lower = half_kappa > 1 ? half_kappa : Rational(1);
          const bool bound_ok = s == 1 ? e2k == 1 : e2k >= lower;
          fp_bound.check(bound_ok && e2k == expected_fp_ratio_closed_form(big_n, c, s), at);
          if (big_n == 16 && c == 5 && s == 3) spot_5_3 = e2k;
          if (big_n == 16 && c == 3 && s == 4) spot_3_4 = e2k;
        }

        if (s > 1) {
          std::set<int> dag_levels;
          for (const auto& [pair, len] : exact.pair_measure)
            if (len > 0) dag_levels.insert(pair.second);
          for (const auto& pair : exact.critical_pairs) dag_levels.insert(pair.second);
          bool ok = true;
          for (int level : dag_levels) ok = ok && (level == kappa || level == kappa - 1);
          const bool small = s <= Rational(c - 2, c - 1) * pow2(n - kappa + 1);
          if (c >= 5 && small) ok = ok && dag_levels == std::set<int>{kappa};
          (integer ? confinement : confinement_half).check(ok, at);
        }
      }
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream timing;
  timing.precision(3);
  timing << ", sweep " << seconds << " s";
  report(1, "closed-form LDD equals exact sweep", exactness.failed == 0, exactness.summary() + timing.str());

  std::ostringstream lb;
  lb.precision(4);
  lb << level_bound.summary() << ", max E[k]/bound " << worst_level_ratio;
  report(2, "E[k] below 2(c-2)/(c-1) and equal to closed form", level_bound.failed == 0, lb.str());

  const bool spots = spot_5_3 == Rational(28, 13) && spot_3_4 == Rational(4, 3);
  report(3, "E[2^k] >= max{1, kappa/2} (1 at s=1) and equal to closed form", fp_bound.failed == 0 && spots,
         fp_bound.summary() + ", (16,5,3) -> " + to_string(spot_5_3) + ", (16,3,4) -> " + to_string(spot_3_4));

  report(7, "c-DAG levels confined to {kappa-1, kappa}, exactly {kappa} for small s and c >= 5",
         confinement.failed == 0 && confinement_half.failed == 0,
         "integer s " + confinement.summary() + "; half-integer s " + confinement_half.summary());
}

// Criteria 4 and 6 share the random-query workload.
void search_criteria() {
  std::uint64_t compared = 0, mismatched = 0, over_cap = 0, queries = 0, max_visits = 0, max_cap = 0;
  SplitMix64 rng(kDefaultSeed);
  for (std::uint64_t n : {256u, 1024u}) {
    for (bool clustered : {false, true}) {
      auto data = clustered ? std::make_shared<const Dataset>(synth_clustered(n, n * 64, 4, 0.01, kDefaultSeed + n))
                            : unit_grid(n);
      for (int c : {3, 5}) {
        auto dag = build_cdag(data, DagConfig(c));
        auto queries_seed = rng.next();
        const double m = static_cast<double>(data->domain_size());
        SplitMix64 qrng(queries_seed);
        for (int i = 0; i < 1000; ++i) {
          const double len = 1 + qrng.uniform() * (m - 1);
          QueryRange q{qrng.uniform() * (m - len), len};
          auto fast = src_search(dag, q);
          auto ref = brute_force_src(dag, q);
          ++compared;
          if (fast.node != ref.node) ++mismatched;
          const std::uint64_t cap = static_cast<std::uint64_t>(c) * (dag.height() + 1);
          ++queries;
          if (fast.visited_nodes > cap) ++over_cap;
          max_visits = std::max(max_visits, fast.visited_nodes);
          max_cap = std::max(max_cap, cap);
        }
      }
    }
  }
  report(4, "src_search matches brute force", mismatched == 0,
         std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
             " queries (N in {256, 1024}, c in {3, 5}, uniform and clustered)");

  // Structure accounting on uniform power-of-two sizes.
  std::uint64_t payload_checks = 0, payload_bad = 0, level_checks = 0, level_bad = 0;
  for (int e = 1; e <= 13; ++e) {
    const std::uint64_t n = std::uint64_t{1} << e;
    auto data = unit_grid(n);
    auto tree = build_tree(data);
    ++payload_checks;
    if (payload_size(tree) != n * static_cast<std::uint64_t>(e + 1)) ++payload_bad;
    for (int c : kBranchings) {
      auto dag = build_cdag(data, DagConfig(c));
      for (int level = 0; level <= dag.height(); ++level) {
        const std::uint64_t points = n >> level;
        if (points < static_cast<std::uint64_t>(2 * (c - 1))) continue;
        auto [first, last] = dag.level_range(level);
        const std::uint64_t expected = static_cast<std::uint64_t>(c - 1) * (std::uint64_t{1} << level) - (c - 2);
        ++level_checks;
        if (last - first != expected) ++level_bad;
      }
      // Visit cap on the tree and c-DAG over a dense sample of lengths.
      SplitMix64 qrng(kDefaultSeed ^ (n * 31 + static_cast<std::uint64_t>(c)));
      for (const IndexStructure* s : {&tree, &dag}) {
        const std::uint64_t cap = static_cast<std::uint64_t>(s->config().branching()) * (s->height() + 1);
        for (int i = 0; i < 200; ++i) {
          const double len = 1 + qrng.uniform() * (double(n) - 1);
          auto r = src_search(*s, QueryRange{qrng.uniform() * (double(n) - len), len});
          ++queries;
          if (r.visited_nodes > cap) ++over_cap;
        }
      }
    }
  }
  const bool ok6 = payload_bad == 0 && level_bad == 0 && over_cap == 0;
  report(6, "payload N(log2 N + 1), level node counts (c-1)2^l-(c-2), visits <= c(H+1)", ok6,
         std::to_string(payload_checks - payload_bad) + "/" + std::to_string(payload_checks) + " payloads, " +
             std::to_string(level_checks - level_bad) + "/" + std::to_string(level_checks) + " level counts, " +
             std::to_string(queries - over_cap) + "/" + std::to_string(queries) + " queries within cap (max " +
             std::to_string(max_visits) + " visits vs cap " + std::to_string(max_cap) + " on the c-DAG workload)");
}

void figure_one() {
  auto data = unit_grid(16);
  auto tree = build_tree(data);
  auto dag = build_cdag(data, DagConfig(3));
  auto t1 = src_search(tree, QueryRange{2, 4});
  auto g1 = src_search(dag, QueryRange{2, 4});
  auto t2 = src_search(tree, QueryRange{11, 4});
  auto g2 = src_search(dag, QueryRange{11, 4});
  auto show = [](const SearchResult& r) {
    return "level " + std::to_string(r.level) + " [" + std::to_string(r.interval.lo) + "," +
           std::to_string(r.interval.hi) + ")";
  };
  const bool ok = t1.level == 1 && t1.interval == Interval{0, 8} && g1.level == 2 && g1.interval == Interval{2, 6} &&
                  t2.level == 1 && t2.interval == Interval{8, 16} && g2.level == 1 && g2.interval == Interval{8, 16};
  report(5, "worked example over 16 points", ok,
         "Q1 tree " + show(t1) + ", 3-DAG " + show(g1) + "; Q2 tree " + show(t2) + ", 3-DAG " + show(g2));
}

void skewed_convergence() {
  const std::uint64_t n = 1u << 14;
  const std::uint64_t seed = 20240601;
  auto data = std::make_shared<const Dataset>(synth_clustered(n, n * 16, 4, 0.01, seed));
  auto tree = build_tree(data);
  auto dag3 = build_cdag(data, DagConfig(3));
  auto dag5 = build_cdag(data, DagConfig(5));
  ExperimentConfig cfg;  // batch 500, threshold 0.001, cap 200,000, extra 120,000
  const double s = 1024;
  auto r = run_stabilized_experiment(tree, {&dag3, &dag5}, s, cfg);

  bool ok = r.stabilized && !r.forced_stop && r.queries_at_stabilization <= cfg.max_queries;
  double last_l2 = 0;
  for (const auto& t : r.trace)
    if (t.batch == r.trace.back().batch) last_l2 = std::max(last_l2, t.l2);
  ok = ok && last_l2 < cfg.threshold;

  std::ostringstream detail;
  detail.precision(4);
  detail << "stabilized at " << r.queries_at_stabilization << " queries (final batch L2 " << last_l2 << ")";
  for (const auto& cmp : r.comparisons) {
    const bool finite = cmp.fit && cmp.bounds && std::isfinite(cmp.fit->epsilon) && cmp.fit->s_star >= 1 &&
                        std::isfinite(cmp.bounds->level_diff_bound) && std::isfinite(cmp.bounds->fp_ratio_lower_bound);
    ok = ok && finite;
    if (cmp.fit)
      detail << "; " << cmp.name << " s*=" << cmp.fit->s_star << " eps=" << cmp.fit->epsilon << " level bound "
             << cmp.bounds->level_diff_bound << " fp bound " << cmp.bounds->fp_ratio_lower_bound
             << (cmp.bounds->vacuous_fp_bound ? " (vacuous)" : "");
  }
  report(8, "clustered N=2^14 stabilizes and fits", ok, detail.str());
}

void gowalla() {
  const char* title = "Gowalla root returns and c-DAG level ranges";
  const char* path = std::getenv("RCB_GOWALLA");
  if (!path || !*path) {
    skip(9, title, "set RCB_GOWALLA to a check-in export to run (environment-dependent, not gating)");
    return;
  }
  auto data = std::make_shared<const Dataset>(load_dataset(RawTimestampFile::checkin(path), std::uint64_t{1} << 22));
  auto tree = build_tree(data);
  auto dag3 = build_cdag(data, DagConfig(3));
  auto dag5 = build_cdag(data, DagConfig(5));
  struct Case {
    double s;
    int lo, hi;
    double paper_root_rate;
  };
  bool ok = true;
  std::ostringstream detail;
  for (Case cs : {Case{3600, 10, 21, 10.0 / 133'500}, Case{86400, 6, 21, 224.0 / 130'500}}) {
    auto r = run_stabilized_experiment(tree, {&dag3, &dag5}, cs.s, ExperimentConfig{});
    const double rate = double(r.structures[0].root_returns) / double(r.total_queries);
    detail << "s=" << cs.s << ": tree root returns " << r.structures[0].root_returns << "/" << r.total_queries
           << " (paper rate " << cs.paper_root_rate << ", observed " << rate << ")";
    for (std::size_t i = 1; i < r.structures.size(); ++i) {
      const auto& hist = r.structures[i].level_hist;
      const int lo = hist.begin()->first, hi = hist.rbegin()->first;
      detail << ", " << r.structures[i].name << " levels " << lo << ".." << hi;
      ok = ok && lo >= cs.lo && hi <= cs.hi;
    }
    detail << "; ";
  }
  report(9, title, ok, detail.str());
}

}  // namespace

int main() {
  try {
    figure_one();
    grid_criteria();
    search_criteria();
    skewed_convergence();
    gowalla();
  } catch (const std::exception& e) {
    for (const auto& [id, line] : lines) std::cout << line << "\n";
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << std::flush;
  return failures == 0 ? 0 : 1;
}
