#pragma once

// Query generation, the batch-stabilisation protocol, and report emission.
//
// Queries are issued in batches; after each batch the empirical
// level-difference distribution of every c-DAG (against the 1D-Tree) is
// compared in L2 with its value after the previous batch. Once every c-DAG
// moves by less than the threshold the run is stable and a fixed number of
// extra queries is added. The final distributions are fitted to the closed
// forms.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcb/analytics.hpp"
#include "rcb/core.hpp"
#include "rcb/ingest.hpp"
#include "rcb/oracle.hpp"
#include "rcb/random.hpp"
#include "rcb/structures.hpp"

namespace rcb {

enum class StartSpace {
  domain,  // x uniform in [0, M - s]
  index,   // x uniform in [0, N - s]
};

struct ExperimentConfig {
  std::vector<double> query_lengths;
  std::uint64_t batch_size = 500;
  double threshold = 0.001;
  std::uint64_t max_queries = 200'000;
  std::uint64_t extra_queries = 120'000;
  std::uint64_t seed = kDefaultSeed;
  StartSpace start_space = StartSpace::domain;
  /// Leading queries cross-checked against the brute-force search.
  std::uint64_t verify_queries = 0;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(threshold > 0)) throw ConfigError("stabilisation threshold must be > 0");
  }
};

/// Deterministic stream of queries of one length.
class QuerySampler {
 public:
  QuerySampler(const Dataset& d, double length, std::uint64_t seed, StartSpace space = StartSpace::domain)
      : length_(length), rng_(seed) {
    if (!(length > 0)) throw ParameterError("query length must be > 0");
    const double m = static_cast<double>(d.domain_size());
    if (length > m) throw ParameterError("query length exceeds the domain size " + std::to_string(d.domain_size()));
    const double upper = space == StartSpace::domain ? m : static_cast<double>(d.size());
    if (length > upper) throw ParameterError("query length exceeds N in index start space");
    span_ = upper - length;
  }

  QueryRange next() { return {rng_.uniform() * span_, length_}; }

 private:
  double length_;
  double span_ = 0;
  SplitMix64 rng_;
};

inline std::vector<QueryRange> sample_queries(const Dataset& d, double s, std::uint64_t count, std::uint64_t seed,
                                              StartSpace space = StartSpace::domain) {
  QuerySampler sampler(d, s, seed, space);
  std::vector<QueryRange> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(sampler.next());
  return out;
}

/// floor(s / step) with step = M / N, at least 1.
inline std::uint64_t effective_index_length(const Dataset& d, double s_domain) {
  if (d.empty()) throw ParameterError("empty dataset");
  long double v = static_cast<long double>(s_domain) * d.size() / d.domain_size();
  auto k = static_cast<std::uint64_t>(std::floor(v));
  return k < 1 ? 1 : k;
}

struct StructureStats {
  std::string name;
  int c = 2;
  std::map<int, std::uint64_t> level_hist;
  std::uint64_t root_returns = 0;
};

struct FpSample {
  std::uint64_t query = 0;
  std::uint64_t tree_count = 0;
  std::uint64_t dag_count = 0;

  double ratio() const { return static_cast<double>(tree_count) / static_cast<double>(dag_count); }
};

struct DagComparison {
  std::string name;
  int c = 3;
  std::map<int, std::uint64_t> ldd_counts;
  std::vector<FpSample> fp_samples;
  /// Samples with ratio < 1 (possible only through tie-breaks).
  std::uint64_t fp_below_one = 0;
  double mean_level_diff = 0;
  double mean_fp_ratio = 0;
  /// Mean of 2^k over the samples: equals mean_fp_ratio on the uniform grid.
  double mean_dyadic_ratio = 0;
  std::optional<FitResult> fit;
  std::optional<BoundReport> bounds;
  /// L2 distance to the closed form at the index-space query length.
  std::optional<double> epsilon_at_index_length;
  std::uint64_t verify_mismatches = 0;
};

struct TracePoint {
  std::uint64_t batch = 0;
  std::string structure;
  double l2 = 0;
};

struct ExperimentReport {
  double query_length = 0;
  std::uint64_t index_length = 1;
  /// N used for the closed-form fit (largest power of two <= N).
  std::uint64_t theory_n = 0;
  std::uint64_t total_queries = 0;
  std::uint64_t queries_at_stabilization = 0;
  bool stabilized = false;
  bool forced_stop = false;
  std::uint64_t verified_queries = 0;
  std::vector<StructureStats> structures;  // tree first
  std::vector<DagComparison> comparisons;
  std::vector<TracePoint> trace;
  std::vector<std::string> notes;
};

inline std::string structure_name(const IndexStructure& s) {
  return s.config().is_tree() ? "tree" : "dag" + std::to_string(s.config().branching());
}

inline std::map<int, double> level_cdf(const std::map<int, std::uint64_t>& hist) {
  std::uint64_t total = 0;
  for (const auto& [l, n] : hist) total += n;
  std::map<int, double> cdf;
  std::uint64_t run = 0;
  for (const auto& [l, n] : hist) {
    run += n;
    cdf[l] = total ? static_cast<double>(run) / static_cast<double>(total) : 0.0;
  }
  return cdf;
}

inline std::map<int, double> normalized(const std::map<int, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [k, n] : counts) total += n;
  std::map<int, double> out;
  for (const auto& [k, n] : counts) out[k] = static_cast<double>(n) / static_cast<double>(total);
  return out;
}

inline ExperimentReport run_stabilized_experiment(const IndexStructure& tree, const std::vector<const IndexStructure*>& dags,
                                                  double s, const ExperimentConfig& config) {
  config.validate();
  if (dags.empty()) throw ValidationError("at least one c-DAG is required");
  for (const IndexStructure* g : dags)
    if (g->dataset_ptr() != tree.dataset_ptr() && !(g->dataset() == tree.dataset()))
      throw ValidationError(structure_name(*g) + " is built over a different dataset than the tree");

  const Dataset& d = tree.dataset();
  ExperimentReport rep;
  rep.query_length = s;
  rep.index_length = effective_index_length(d, s);
  rep.structures.push_back({structure_name(tree), tree.config().branching(), {}, 0});
  for (const IndexStructure* g : dags) {
    rep.structures.push_back({structure_name(*g), g->config().branching(), {}, 0});
    DagComparison cmp;
    cmp.name = structure_name(*g);
    cmp.c = g->config().branching();
    rep.comparisons.push_back(std::move(cmp));
  }

  QuerySampler sampler(d, s, config.seed, config.start_space);
  std::uint64_t issued = 0;
  auto run_query = [&] {
    QueryRange q = sampler.next();
    const std::uint64_t index = issued++;
    SearchResult t = src_search(tree, q);
    rep.structures[0].level_hist[t.level]++;
    if (t.node == tree.root()) rep.structures[0].root_returns++;
    const bool verify = index < config.verify_queries;
    if (verify && brute_force_src(tree, q).node != t.node) rep.comparisons.front().verify_mismatches++;
    for (std::size_t i = 0; i < dags.size(); ++i) {
      SearchResult g = src_search(*dags[i], q);
      StructureStats& st = rep.structures[i + 1];
      st.level_hist[g.level]++;
      if (g.node == dags[i]->root()) st.root_returns++;
      DagComparison& cmp = rep.comparisons[i];
      cmp.ldd_counts[g.level - t.level]++;
      cmp.fp_samples.push_back({index, t.covered_count, g.covered_count});
      if (t.covered_count < g.covered_count) cmp.fp_below_one++;
      if (verify && brute_force_src(*dags[i], q).node != g.node) cmp.verify_mismatches++;
    }
  };

  std::vector<std::map<int, double>> previous(dags.size());
  std::uint64_t batch = 0;
  while (issued < config.max_queries) {
    const std::uint64_t n = std::min(config.batch_size, config.max_queries - issued);
    for (std::uint64_t i = 0; i < n; ++i) run_query();
    ++batch;
    bool all_below = batch > 1;
    for (std::size_t i = 0; i < dags.size(); ++i) {
      auto current = normalized(rep.comparisons[i].ldd_counts);
      if (batch > 1) {
        double l2 = l2_distance(current, previous[i]);
        rep.trace.push_back({batch, rep.comparisons[i].name, l2});
        if (!(l2 < config.threshold)) all_below = false;
      }
      previous[i] = std::move(current);
    }
    if (all_below) {
      rep.stabilized = true;
      break;
    }
  }
  rep.forced_stop = !rep.stabilized;
  rep.queries_at_stabilization = issued;
  for (std::uint64_t i = 0; i < config.extra_queries; ++i) run_query();
  rep.total_queries = issued;
  rep.verified_queries = std::min(issued, config.verify_queries);

  // Closed forms are stated for N = 2^(n+1); other sizes are rounded down.
  std::uint64_t theory_n = 1;
  while (theory_n * 2 <= d.size()) theory_n *= 2;
  rep.theory_n = theory_n;
  if (theory_n != d.size())
    rep.notes.push_back("N = " + std::to_string(d.size()) + " rounded down to " + std::to_string(theory_n) +
                        " for the closed-form fit");

  for (DagComparison& cmp : rep.comparisons) {
    double sum_k = 0, sum_ratio = 0, sum_dyadic = 0;
    for (const auto& [k, n] : cmp.ldd_counts) {
      sum_k += static_cast<double>(k) * static_cast<double>(n);
      sum_dyadic += std::exp2(k) * static_cast<double>(n);
    }
    for (const FpSample& f : cmp.fp_samples) sum_ratio += f.ratio();
    const double total = static_cast<double>(rep.total_queries);
    cmp.mean_level_diff = sum_k / total;
    cmp.mean_fp_ratio = sum_ratio / total;
    cmp.mean_dyadic_ratio = sum_dyadic / total;

    if (theory_n < 2 || !DagConfig(cmp.c).theory_alpha()) {
      rep.notes.push_back(cmp.name + ": no closed form for N = " + std::to_string(theory_n) + ", c = " +
                          std::to_string(cmp.c) + "; fit skipped");
      continue;
    }
    auto empirical = LevelDifferenceDistribution::from_counts(cmp.ldd_counts);
    FitResult fit = fit_closest_theoretical(empirical, theory_n, cmp.c);
    cmp.fit = fit;
    cmp.bounds = corollary_bounds(fit, cmp.c, theory_n);
    const std::uint64_t s_index = std::min(rep.index_length, theory_n);
    cmp.epsilon_at_index_length = l2_distance(empirical, theoretical_ldd(theory_n, cmp.c, s_index));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report output. CSV bodies depend only on the inputs and the seed.

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

inline void write_levels_csv(const ExperimentReport& r, std::ostream& out) {
  out << "structure,level,count\n";
  for (const auto& st : r.structures)
    for (const auto& [l, n] : st.level_hist) out << st.name << ',' << l << ',' << n << '\n';
}

inline void write_ldd_csv(const ExperimentReport& r, std::ostream& out) {
  out << "structure,k,count\n";
  for (const auto& cmp : r.comparisons)
    for (const auto& [k, n] : cmp.ldd_counts) out << cmp.name << ',' << k << ',' << n << '\n';
}

inline void write_fp_csv(const ExperimentReport& r, std::ostream& out) {
  out << "structure,query,tree_count,dag_count,ratio\n";
  for (const auto& cmp : r.comparisons)
    for (const FpSample& f : cmp.fp_samples)
      out << cmp.name << ',' << f.query << ',' << f.tree_count << ',' << f.dag_count << ','
          << detail::fmt_double(f.ratio()) << '\n';
}

inline void write_trace_csv(const ExperimentReport& r, std::ostream& out) {
  out << "batch,structure,l2\n";
  for (const TracePoint& t : r.trace) out << t.batch << ',' << t.structure << ',' << detail::fmt_double(t.l2) << '\n';
}

/// structure -> key -> count, from a levels.csv or ldd.csv body. Lines
/// starting with '#' and the header row are skipped.
inline std::map<std::string, std::map<int, std::uint64_t>> read_count_csv(std::istream& in) {
  std::map<std::string, std::map<int, std::uint64_t>> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("structure,", 0) == 0) continue;
    }
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 comma-separated fields");
    std::int64_t key = 0, count = 0;
    std::string_view sv(line);
    if (!detail::parse_int(sv.substr(c1 + 1, c2 - c1 - 1), key) || !detail::parse_int(sv.substr(c2 + 1), count) ||
        count < 0)
      throw ParseError("line " + std::to_string(line_no) + ": malformed integer field");
    out[line.substr(0, c1)][static_cast<int>(key)] += static_cast<std::uint64_t>(count);
  }
  if (!header_seen) throw ParseError("empty CSV");
  return out;
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json structures = nlohmann::json::array();
  for (const auto& st : r.structures) {
    nlohmann::json hist = nlohmann::json::object(), cdf = nlohmann::json::object();
    for (const auto& [l, n] : st.level_hist) hist[std::to_string(l)] = n;
    for (const auto& [l, p] : level_cdf(st.level_hist)) cdf[std::to_string(l)] = p;
    auto ent = entropy_from_counts(st.level_hist);
    structures.push_back({{"name", st.name},
                          {"c", st.c},
                          {"level_histogram", hist},
                          {"level_cdf", cdf},
                          {"root_returns", st.root_returns},
                          {"entropy_bits", ent.entropy_bits},
                          {"distinct_levels", st.level_hist.size()}});
  }
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& cmp : r.comparisons) {
    nlohmann::json ldd = nlohmann::json::object();
    for (const auto& [k, n] : cmp.ldd_counts) ldd[std::to_string(k)] = n;
    nlohmann::json j = {{"name", cmp.name},
                        {"c", cmp.c},
                        {"ldd_counts", ldd},
                        {"mean_level_diff", cmp.mean_level_diff},
                        {"mean_fp_ratio", cmp.mean_fp_ratio},
                        {"mean_dyadic_ratio", cmp.mean_dyadic_ratio},
                        {"fp_below_one", cmp.fp_below_one},
                        {"verify_mismatches", cmp.verify_mismatches}};
    if (cmp.fit) j["fit"] = to_json(*cmp.fit);
    if (cmp.bounds) j["bounds"] = to_json(*cmp.bounds);
    if (cmp.epsilon_at_index_length) j["epsilon_at_index_length"] = *cmp.epsilon_at_index_length;
    comparisons.push_back(std::move(j));
  }
  return {{"query_length", r.query_length},
          {"index_length", r.index_length},
          {"theory_n", r.theory_n},
          {"total_queries", r.total_queries},
          {"queries_at_stabilization", r.queries_at_stabilization},
          {"stabilized", r.stabilized},
          {"forced_stop", r.forced_stop},
          {"verified_queries", r.verified_queries},
          {"structures", structures},
          {"comparisons", comparisons},
          {"notes", r.notes}};
}

}  // namespace rcb
