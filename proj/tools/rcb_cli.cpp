// rcb: build, verify, bench, entropy and fit subcommands.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "rcb/rcb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

// Reads a JSON object as CLI11 config: top-level keys are options of the main
// command, a nested object named after a subcommand holds that subcommand's
// options. Arrays become repeated values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConversionError("writing JSON config is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError("config: nested arrays and objects are not supported");
  }

  static void flatten(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      out.push_back(std::move(item));
    }
  }
};

// ---------------------------------------------------------------------------
// Dataset source shared by build and bench.

struct DataSource {
  std::string input;
  std::string format = "plain";
  int column = 0;
  std::string delimiter = ",";
  bool header = false;
  std::uint64_t count = 0;
  std::uint64_t domain = 0;
  std::uint64_t uniform = 0;
  std::uint64_t clustered = 0;
  int clusters = 4;
  double spread = 0.01;
  std::uint64_t data_seed = rcb::kDefaultSeed;

  void add_options(CLI::App* app) {
    auto* group = app->add_option_group("dataset");
    group->add_option("--input,-i", input, "timestamp file to load");
    group->add_option("--uniform", uniform, "synthetic equally spaced dataset with this many points");
    group->add_option("--clustered", clustered, "synthetic clustered dataset with this many points");
    group->require_option(1);
    app->add_option("--format", format, "input format: plain, csv or checkin")->capture_default_str();
    app->add_option("--column", column, "timestamp column for csv/checkin input");
    app->add_option("--delimiter", delimiter, "csv field delimiter")->capture_default_str();
    app->add_flag("--header", header, "skip the first line of the input");
    app->add_option("--count,-n", count, "keep the first N distinct timestamps (0 keeps all)");
    app->add_option("--domain", domain, "domain size M (default: max point + 1, or N for synthetic data)");
    app->add_option("--clusters", clusters, "cluster count for --clustered")->capture_default_str();
    app->add_option("--spread", spread, "cluster std-dev as a fraction of M")->capture_default_str();
    app->add_option("--data-seed", data_seed, "seed for --clustered")->capture_default_str();
  }

  struct Loaded {
    std::shared_ptr<const rcb::Dataset> dataset;
    rcb::IngestInfo info;
    std::string description;
  };

  Loaded load() const {
    if (uniform) {
      const rcb::Coord m = domain ? domain : uniform;
      return {std::make_shared<const rcb::Dataset>(rcb::synth_uniform(uniform, m)), {},
              "uniform:N=" + std::to_string(uniform) + ",M=" + std::to_string(m)};
    }
    if (clustered) {
      const rcb::Coord m = domain ? domain : clustered * 16;
      return {std::make_shared<const rcb::Dataset>(rcb::synth_clustered(clustered, m, clusters, spread, data_seed)),
              {},
              "clustered:N=" + std::to_string(clustered) + ",M=" + std::to_string(m) + ",clusters=" +
                  std::to_string(clusters) + ",spread=" + rcb::detail::fmt_double(spread) + ",seed=" +
                  std::to_string(data_seed)};
    }
    if (!fs::exists(input)) throw rcb::ParseError("input file not found: " + input);
    rcb::RawTimestampFile file;
    file.path = input;
    file.format = rcb::parse_timestamp_format(format);
    if (file.format == rcb::TimestampFormat::checkin) file = rcb::RawTimestampFile::checkin(input);
    if (column) file.column = column;
    if (delimiter.size() != 1) throw rcb::ParameterError("delimiter must be a single character");
    if (file.format == rcb::TimestampFormat::csv) file.delimiter = delimiter[0];
    file.has_header = header;
    auto result = rcb::ingest_file(file, count ? std::optional(count) : std::nullopt,
                                   domain ? std::optional<rcb::Coord>(domain) : std::nullopt);
    return {std::make_shared<const rcb::Dataset>(std::move(result.dataset)), result.info, "file:" + input};
  }

  json snapshot() const {
    return {{"input", input},   {"format", format},     {"column", column},   {"delimiter", delimiter},
            {"header", header}, {"count", count},       {"domain", domain},   {"uniform", uniform},
            {"clustered", clustered}, {"clusters", clusters}, {"spread", spread}, {"data_seed", data_seed}};
  }
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json versions() {
  return {{"rcb", kVersion}, {"cli11", CLI11_VERSION}, {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcb::ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw rcb::ParseError("write failed: " + path.string());
}

// Creates `target` by filling a sibling temporary directory and renaming it
// into place, so readers never see a partial cell.
template <class Fill>
void write_directory_atomically(const fs::path& target, Fill fill) {
  fs::path tmp = target;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    fill(tmp);
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  fs::remove_all(target);
  fs::rename(tmp, target);
}

std::vector<int> parse_c_list(const std::vector<int>& cs) {
  if (cs.empty()) throw rcb::ParameterError("empty c list");
  for (int c : cs) rcb::DagConfig{c};
  return cs;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
  DataSource source;
  std::vector<int> c_list{2, 3};
  std::string out_dir;
};

int cmd_build(const BuildArgs& a) {
  auto loaded = a.source.load();
  const auto& d = *loaded.dataset;
  std::cout << "dataset " << loaded.description << "  N=" << d.size() << " M=" << d.domain_size() << "\n";
  std::ostringstream stats;
  stats << "structure,level,nodes\n";
  std::vector<std::pair<std::string, rcb::IndexStructure>> built;
  for (int c : parse_c_list(a.c_list)) {
    auto s = rcb::build_structure(loaded.dataset, rcb::DagConfig(c));
    const std::string name = rcb::structure_name(s);
    std::cout << name << ": height " << s.height() << ", nodes " << s.node_count() << ", payload "
              << rcb::payload_size(s) << "\n";
    for (const auto& [level, nodes] : rcb::level_histogram(s)) {
      std::cout << "  level " << level << ": " << nodes << " nodes\n";
      stats << name << ',' << level << ',' << nodes << '\n';
    }
    built.emplace_back(name, std::move(s));
  }
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    for (const auto& [name, s] : built) write_text(fs::path(a.out_dir) / (name + ".json"), rcb::to_json(s).dump() + "\n");
    json summary = json::array();
    for (const auto& [name, s] : built)
      summary.push_back({{"structure", name},
                         {"c", s.config().branching()},
                         {"height", s.height()},
                         {"nodes", s.node_count()},
                         {"payload", rcb::payload_size(s)}});
    write_text(fs::path(a.out_dir) / "stats.csv", stats.str());
    write_text(fs::path(a.out_dir) / "summary.json", summary.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  int n_min = 2;
  int n_max = 9;
  std::vector<int> c_list{3, 5, 9};
  std::string s_policy = "all";
  bool quiet = false;
};

std::vector<std::uint64_t> s_values(std::uint64_t big_n, const std::string& policy) {
  std::vector<std::uint64_t> out;
  if (policy == "all") {
    for (std::uint64_t s = 1; s <= big_n; ++s) out.push_back(s);
  } else if (policy == "pow2") {
    for (std::uint64_t s = 1; s <= big_n; s *= 2) out.push_back(s);
  } else {
    std::stringstream in(policy);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      std::int64_t v = 0;
      if (!rcb::detail::parse_int(rcb::detail::trim(tok), v) || v < 1)
        throw rcb::ParameterError("bad s value '" + tok + "' (policy is all, pow2 or a comma list)");
      if (static_cast<std::uint64_t>(v) <= big_n) out.push_back(static_cast<std::uint64_t>(v));
    }
  }
  return out;
}

int cmd_verify(const VerifyArgs& a) {
  if (a.n_min < 1 || a.n_max < a.n_min) throw rcb::ParameterError("need 1 <= n-min <= n-max");
  if (a.n_max + 1 > 13)
    throw rcb::CapacityError("grid exceeds oracle capacity: N = 2^" + std::to_string(a.n_max + 1) + " > 2^13");
  for (int c : a.c_list)
    if (!rcb::DagConfig(c).theory_alpha())
      throw rcb::TheoryDomainError("c = " + std::to_string(c) + " is not of the form 2^a + 1");

  std::uint64_t rows = 0, failures = 0;
  if (!a.quiet) std::cout << "N\tc\ts\tregime\tE[k]\tbound\tE[2^k]\tlower\tstatus\n";
  for (int n = a.n_min; n <= a.n_max; ++n) {
    const std::uint64_t big_n = std::uint64_t{1} << (n + 1);
    auto d = std::make_shared<const rcb::Dataset>(rcb::synth_uniform(big_n, big_n));
    auto tree = rcb::build_tree(d);
    for (int c : a.c_list) {
      auto dag = rcb::build_cdag(d, rcb::DagConfig(c));
      for (std::uint64_t s : s_values(big_n, a.s_policy)) {
        const rcb::Rational rs(s);
        auto theory = rcb::theoretical_ldd(big_n, c, rs);
        auto exact = rcb::exact_level_measure(tree, dag, rs);
        const rcb::Rational ek = rcb::expected_level_difference(theory);
        const rcb::Rational e2k = rcb::expected_fp_ratio(theory);
        const rcb::Rational bound = rcb::level_difference_bound_exact(c);
        const rcb::Rational lower = rcb::fp_ratio_lower_bound_exact(big_n, rs);
        std::vector<std::string> why;
        if (!(theory == exact.distribution)) why.push_back("ldd " + rcb::to_string(exact.distribution));
        if (!(ek < bound)) why.push_back("E[k] bound");
        if (ek != rcb::expected_level_difference_closed_form(big_n, c, rs)) why.push_back("E[k] closed form");
        if (s > 1 && e2k < lower) why.push_back("E[2^k] bound");
        if (e2k != rcb::expected_fp_ratio_closed_form(big_n, c, rs)) why.push_back("E[2^k] closed form");
        if (s == 1 && e2k != 1) why.push_back("E[2^k] != 1 at s=1");
        ++rows;
        if (!why.empty()) ++failures;
        if (!a.quiet || !why.empty()) {
          std::cout << big_n << '\t' << c << '\t' << s << '\t' << rcb::to_string(rcb::regime_of(big_n, c, rs)) << '\t'
                    << rcb::to_string(ek) << '\t' << rcb::to_string(bound) << '\t' << rcb::to_string(e2k) << '\t'
                    << rcb::to_string(lower) << '\t' << (why.empty() ? "PASS" : "FAIL");
          for (const auto& w : why) std::cout << " [" << w << "]";
          std::cout << '\n';
        }
      }
    }
  }
  std::cout << rows - failures << "/" << rows << " grid points pass\n";
  return failures ? kExitVerifyFailed : kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  DataSource source;
  std::vector<int> c_list{3, 5};
  std::vector<double> s_list;
  std::string out_dir = "bench_out";
  std::uint64_t batch = 500;
  double threshold = 0.001;
  std::uint64_t max_queries = 200'000;
  std::uint64_t extra = 120'000;
  std::string start_space = "domain";
  std::uint64_t verify = 0;
};

int cmd_bench(const BenchArgs& a, std::uint64_t seed, const std::string& seed_origin) {
  if (a.s_list.empty()) throw CLI::ValidationError("--s", "at least one query length is required");
  auto loaded = a.source.load();
  auto tree = rcb::build_tree(loaded.dataset);
  std::vector<rcb::IndexStructure> dags;
  for (int c : parse_c_list(a.c_list)) dags.push_back(rcb::build_cdag(loaded.dataset, rcb::DagConfig(c)));
  std::vector<const rcb::IndexStructure*> dag_ptrs;
  for (const auto& g : dags) dag_ptrs.push_back(&g);

  rcb::ExperimentConfig cfg;
  cfg.query_lengths = a.s_list;
  cfg.batch_size = a.batch;
  cfg.threshold = a.threshold;
  cfg.max_queries = a.max_queries;
  cfg.extra_queries = a.extra;
  cfg.seed = seed;
  cfg.verify_queries = a.verify;
  if (a.start_space == "domain")
    cfg.start_space = rcb::StartSpace::domain;
  else if (a.start_space == "index")
    cfg.start_space = rcb::StartSpace::index;
  else
    throw rcb::ParameterError("start space must be domain or index");
  cfg.validate();

  const json config_snapshot = {{"dataset", a.source.snapshot()},      {"c", a.c_list},
                                {"s", a.s_list},                       {"batch", a.batch},
                                {"threshold", a.threshold},            {"max_queries", a.max_queries},
                                {"extra", a.extra},                    {"start_space", a.start_space},
                                {"verify", a.verify}};
  const std::string input_hash =
      a.source.input.empty() ? loaded.description : "fnv1a64:" + hex64(loaded.info.source_hash);
  const std::string run_id = hex64(rcb::fnv1a64(config_snapshot.dump() + "|" + std::to_string(seed) + "|" + input_hash));

  fs::create_directories(a.out_dir);
  std::uint64_t mismatches = 0;
  for (double s : a.s_list) {
    auto report = rcb::run_stabilized_experiment(tree, dag_ptrs, s, cfg);
    const std::string cell = "s_" + rcb::detail::fmt_double(s);
    const fs::path target = fs::path(a.out_dir) / cell;
    const std::vector<std::string> files{"levels.csv", "ldd.csv", "fp.csv", "trace.csv", "report.json"};
    write_directory_atomically(target, [&](const fs::path& dir) {
      const std::string stamp = "# manifest=manifest.json run=" + run_id + "\n";
      auto csv = [&](const std::string& name, auto writer) {
        std::ostringstream body;
        body << stamp;
        writer(report, body);
        write_text(dir / name, body.str());
      };
      csv("levels.csv", rcb::write_levels_csv);
      csv("ldd.csv", rcb::write_ldd_csv);
      csv("fp.csv", rcb::write_fp_csv);
      csv("trace.csv", rcb::write_trace_csv);
      json rep = rcb::to_json(report);
      rep["manifest"] = "manifest.json";
      rep["run"] = run_id;
      write_text(dir / "report.json", rep.dump(2) + "\n");
      json outputs = json::array();
      for (const auto& f : files) outputs.push_back((target / f).string());
      json manifest = {{"command", "bench"},
                       {"run", run_id},
                       {"config", config_snapshot},
                       {"query_length", s},
                       {"seed", seed},
                       {"seed_origin", seed_origin},
                       {"inputs", {{{"description", loaded.description}, {"hash", input_hash}}}},
                       {"versions", versions()},
                       {"outputs", outputs},
                       {"created_utc", utc_now()}};
      write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    });

    std::cout << "s=" << rcb::detail::fmt_double(s) << " (index length " << report.index_length << "): "
              << report.total_queries << " queries, " << (report.stabilized ? "stabilized" : "forced stop") << " at "
              << report.queries_at_stabilization << "\n";
    for (const auto& st : report.structures) {
      auto ent = rcb::entropy_from_counts(st.level_hist);
      std::cout << "  " << st.name << ": levels " << st.level_hist.begin()->first << ".." << st.level_hist.rbegin()->first
                << ", root returns " << st.root_returns << ", H=" << rcb::detail::fmt_double(ent.entropy_bits) << "\n";
    }
    for (const auto& cmp : report.comparisons) {
      std::cout << "  " << cmp.name << " vs tree: E[k]=" << rcb::detail::fmt_double(cmp.mean_level_diff)
                << " E[ratio]=" << rcb::detail::fmt_double(cmp.mean_fp_ratio);
      if (cmp.fit)
        std::cout << " s*=" << cmp.fit->s_star << " eps=" << rcb::detail::fmt_double(cmp.fit->epsilon)
                  << " level bound " << rcb::detail::fmt_double(cmp.bounds->level_diff_bound) << " fp bound "
                  << rcb::detail::fmt_double(cmp.bounds->fp_ratio_lower_bound)
                  << (cmp.bounds->vacuous_fp_bound ? " (vacuous)" : "");
      if (cmp.fp_below_one) std::cout << " [" << cmp.fp_below_one << " ratios below 1]";
      std::cout << "\n";
      mismatches += cmp.verify_mismatches;
    }
    for (const auto& note : report.notes) std::cout << "  note: " << note << "\n";
    if (cfg.verify_queries)
      std::cout << "  verify: " << report.verified_queries << " queries checked against brute force\n";
  }
  if (mismatches) {
    std::cerr << "rcb: " << mismatches << " search results differ from brute force\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// entropy and fit

int cmd_entropy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rcb::ParseError("cannot open " + path);
  auto table = rcb::read_count_csv(in);
  std::cout << "structure\tentropy_bits\tlevels\n";
  std::map<std::string, double> h;
  for (const auto& [name, hist] : table) {
    auto ent = rcb::entropy_from_counts(hist);
    h[name] = ent.entropy_bits;
    std::cout << name << '\t' << rcb::detail::fmt_double(ent.entropy_bits) << '\t' << hist.size() << '\n';
  }
  if (h.contains("tree"))
    for (const auto& [name, value] : h)
      if (name != "tree" && !(h["tree"] > value))
        std::cout << "observed: H(tree) <= H(" << name << ")\n";
  return kExitOk;
}

int structure_branching(const std::string& name, std::optional<int> override_c) {
  if (override_c) return *override_c;
  if (name.rfind("dag", 0) == 0) {
    std::int64_t c = 0;
    if (rcb::detail::parse_int(std::string_view(name).substr(3), c)) return static_cast<int>(c);
  }
  throw rcb::ParameterError("cannot infer c from structure '" + name + "'; pass --c");
}

int cmd_fit(const std::string& path, std::uint64_t n_points, std::optional<int> c_override) {
  std::ifstream in(path);
  if (!in) throw rcb::ParseError("cannot open " + path);
  auto table = rcb::read_count_csv(in);
  std::cout << "structure\tc\ts_star\tkappa_star\tepsilon\tlevel_bound\tfp_bound\n";
  for (const auto& [name, counts] : table) {
    const int c = structure_branching(name, c_override);
    auto empirical = rcb::LevelDifferenceDistribution::from_counts(counts);
    auto fit = rcb::fit_closest_theoretical(empirical, n_points, c);
    auto bounds = rcb::corollary_bounds(fit, c, n_points);
    std::cout << name << '\t' << c << '\t' << fit.s_star << '\t' << fit.kappa_star << '\t'
              << rcb::detail::fmt_double(fit.epsilon) << '\t' << rcb::detail::fmt_double(bounds.level_diff_bound)
              << '\t' << rcb::detail::fmt_double(bounds.fp_ratio_lower_bound)
              << (bounds.vacuous_fp_bound ? " (vacuous)" : "") << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-cover benchmark: 1D-Tree and c-DAG structures, exact analysis and experiments", "rcb"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");

  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "random seed (default: $RCB_SEED, then built-in)");

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "build structures and print per-level statistics");
  build_args.source.add_options(build);
  build->add_option("--c", build_args.c_list, "branching factors; 2 builds the 1D-Tree")->delimiter(',')->capture_default_str();
  build->add_option("--out,-o", build_args.out_dir, "directory for JSON dumps and stats.csv");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "compare closed forms with the exact oracle on the uniform grid");
  verify->add_option("--n-min", verify_args.n_min, "smallest n (N = 2^(n+1))")->capture_default_str();
  verify->add_option("--n-max", verify_args.n_max, "largest n (N = 2^(n+1) <= 2^13)")->capture_default_str();
  verify->add_option("--c", verify_args.c_list, "branching factors (2^a + 1)")->delimiter(',')->capture_default_str();
  verify->add_option("--s", verify_args.s_policy, "query lengths: all, pow2 or a comma list")->capture_default_str();
  verify->add_flag("--quiet,-q", verify_args.quiet, "print failing rows only");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run the stabilized query experiment");
  bench_args.source.add_options(bench);
  bench->add_option("--c", bench_args.c_list, "c-DAG branching factors")->delimiter(',')->capture_default_str();
  bench->add_option("--s", bench_args.s_list, "query lengths in domain units")->delimiter(',');
  bench->add_option("--out,-o", bench_args.out_dir, "output directory")->capture_default_str();
  bench->add_option("--batch", bench_args.batch, "queries per batch")->capture_default_str();
  bench->add_option("--threshold", bench_args.threshold, "stabilization L2 threshold")->capture_default_str();
  bench->add_option("--max-queries", bench_args.max_queries, "forced stop after this many queries")->capture_default_str();
  bench->add_option("--extra", bench_args.extra, "queries added after stabilization")->capture_default_str();
  bench->add_option("--start-space", bench_args.start_space, "query starts over the domain [0, M-s] or [0, N-s]")
      ->check(CLI::IsMember({"domain", "index"}))
      ->capture_default_str();
  bench->add_option("--verify", bench_args.verify, "cross-check the first K queries against brute force");

  std::string entropy_path;
  auto* entropy = app.add_subcommand("entropy", "Shannon entropy of returned levels from a levels.csv");
  entropy->add_option("levels", entropy_path, "levels.csv from bench")->required();

  std::string fit_path;
  std::uint64_t fit_n = 0;
  std::optional<int> fit_c;
  auto* fit = app.add_subcommand("fit", "fit an ldd.csv to the closest closed-form distribution");
  fit->add_option("ldd", fit_path, "ldd.csv from bench")->required();
  fit->add_option("--n,-n", fit_n, "dataset size N (power of two) for the closed forms")->required();
  fit->add_option("--c", fit_c, "branching factor (default: from the structure name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::uint64_t seed = rcb::kDefaultSeed;
  std::string seed_origin = "default";
  try {
    if (seed_flag) {
      seed = *seed_flag;
      seed_origin = "flag";
    } else if (const char* env = std::getenv("RCB_SEED")) {
      std::int64_t v = 0;
      if (!rcb::detail::parse_int(env, v) || v < 0) throw rcb::ParameterError("RCB_SEED is not a non-negative integer");
      seed = static_cast<std::uint64_t>(v);
      seed_origin = "env";
    }

    if (*build) return cmd_build(build_args);
    if (*verify) return cmd_verify(verify_args);
    if (*bench) return cmd_bench(bench_args, seed, seed_origin);
    if (*entropy) return cmd_entropy(entropy_path);
    if (*fit) return cmd_fit(fit_path, fit_n, fit_c);
  } catch (const CLI::Error& e) {
    std::cerr << "rcb: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rcb::Error& e) {
    std::cerr << "rcb: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "rcb: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
