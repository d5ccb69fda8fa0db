#pragma once

// Dataset loading (plain / CSV / check-in exports), normalisation, and
// synthetic generators.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rcb/core.hpp"
#include "rcb/random.hpp"

namespace rcb {

enum class TimestampFormat {
  plain,    // one timestamp per line
  csv,      // delimited, timestamp in `column`
  checkin,  // tab-separated check-in export, ISO-8601 time in `column`
};

inline TimestampFormat parse_timestamp_format(std::string_view name) {
  if (name == "plain") return TimestampFormat::plain;
  if (name == "csv") return TimestampFormat::csv;
  if (name == "checkin") return TimestampFormat::checkin;
  throw ParameterError("unknown input format '" + std::string(name) + "' (expected plain, csv or checkin)");
}

struct RawTimestampFile {
  std::filesystem::path path;
  TimestampFormat format = TimestampFormat::plain;
  int column = 0;
  char delimiter = ',';
  bool has_header = false;

  static RawTimestampFile checkin(std::filesystem::path p) {
    return {std::move(p), TimestampFormat::checkin, 1, '\t', false};
  }
};

struct IngestInfo {
  /// Raw timestamp subtracted from every record.
  std::int64_t anchor = 0;
  std::uint64_t records = 0;
  std::uint64_t duplicates_removed = 0;
  std::uint64_t truncated = 0;
  /// FNV-1a 64 of the file bytes.
  std::uint64_t source_hash = 0;
};

struct IngestResult {
  Dataset dataset;
  IngestInfo info;
};

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// YYYY-MM-DD[T ]HH:MM:SS[.fraction][Z|+HH:MM|-HH:MM] to epoch seconds.
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    std::int64_t v = 0;
    if (!parse_int(s.substr(pos, len), v)) return std::nullopt;
    return static_cast<int>(v);
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    return std::nullopt;
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), se = num(17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;
  std::int64_t t = sys_days{ymd}.time_since_epoch().count() * 86400LL + *h * 3600LL + *mi * 60LL + *se;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
    auto oh = num(pos + 1, 2), om = num(pos + 4, 2);
    if (!oh || !om) return std::nullopt;
    std::int64_t offset = *oh * 3600LL + *om * 60LL;
    return s[pos] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

inline std::string_view field(std::string_view line, char delimiter, int column) {
  int col = 0;
  std::size_t start = 0;
  for (;;) {
    std::size_t end = line.find(delimiter, start);
    if (col == column) return line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (end == std::string_view::npos) return {};
    start = end + 1;
    ++col;
  }
}

}  // namespace detail

/// Parses timestamps (epoch integers or ISO-8601, not mixed), subtracts the
/// minimum, sorts, removes duplicates and keeps the first `target_count`
/// points. M is max + 1 unless `domain_size` is given.
inline IngestResult ingest_file(const RawTimestampFile& file, std::optional<std::uint64_t> target_count = {},
                                std::optional<Coord> domain_size = {}) {
  std::ifstream in(file.path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + file.path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  IngestInfo info;
  info.source_hash = fnv1a64(text);

  const char delimiter = file.format == TimestampFormat::checkin ? '\t' : file.delimiter;
  enum class Kind { unknown, integer, iso } kind = Kind::unknown;
  std::vector<std::int64_t> raw;
  std::size_t line_no = 0;
  std::string_view rest(text);
  while (!rest.empty()) {
    std::size_t eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (file.has_header && line_no == 1) continue;

    std::string_view token =
        file.format == TimestampFormat::plain ? detail::trim(line) : detail::trim(detail::field(line, delimiter, file.column));
    auto fail = [&](const std::string& why) {
      return ParseError(file.path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (token.empty()) throw fail("missing timestamp in column " + std::to_string(file.column));

    std::int64_t value = 0;
    Kind this_kind;
    if (detail::parse_int(token, value)) {
      this_kind = Kind::integer;
    } else if (auto t = detail::parse_iso8601(token)) {
      value = *t;
      this_kind = Kind::iso;
    } else {
      throw fail("cannot parse timestamp '" + std::string(token) + "'");
    }
    if (kind == Kind::unknown) kind = this_kind;
    if (kind != this_kind) throw fail("mixed epoch-integer and ISO-8601 timestamps");
    raw.push_back(value);
  }
  info.records = raw.size();

  const std::uint64_t needed = target_count.value_or(1);
  if (raw.empty() || (target_count && raw.size() < needed))
    throw ShortfallError(file.path.string() + ": " + std::to_string(raw.size()) + " records, need " +
                         std::to_string(needed));

  std::sort(raw.begin(), raw.end());
  info.anchor = raw.front();
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  info.duplicates_removed = info.records - raw.size();
  if (target_count) {
    if (raw.size() < *target_count)
      throw ShortfallError(file.path.string() + ": " + std::to_string(raw.size()) + " distinct timestamps, need " +
                           std::to_string(*target_count));
    info.truncated = raw.size() - *target_count;
    raw.resize(*target_count);
  }

  std::vector<Coord> points;
  points.reserve(raw.size());
  for (std::int64_t v : raw) points.push_back(static_cast<Coord>(v - info.anchor));
  Coord m = points.back() + 1;
  if (domain_size) {
    if (*domain_size < m) throw ValidationError("domain size " + std::to_string(*domain_size) + " below max point + 1");
    m = *domain_size;
  }
  return {Dataset(std::move(points), m), info};
}

inline Dataset load_dataset(const RawTimestampFile& file, std::optional<std::uint64_t> target_count = {}) {
  return ingest_file(file, target_count).dataset;
}

/// Points floor(i * M / N), i = 0..N-1.
inline Dataset synth_uniform(std::uint64_t n, Coord m) {
  if (n == 0) throw ParameterError("N must be >= 1");
  if (n > m) throw CapacityError("cannot place " + std::to_string(n) + " distinct points in [0, " + std::to_string(m) + ")");
  std::vector<Coord> points(n);
  for (std::uint64_t i = 0; i < n; ++i)
    points[i] = static_cast<Coord>(static_cast<unsigned __int128>(i) * m / n);
  return Dataset(std::move(points), m);
}

/// N points from a mixture of `clusters` Gaussian bumps (std-dev spread * M,
/// truncated to [0, M)). Collisions are nudged to the nearest free integer
/// to the right, or to the left when the run reaches the domain end.
inline Dataset synth_clustered(std::uint64_t n, Coord m, int clusters, double spread, std::uint64_t seed) {
  if (clusters < 1) throw ParameterError("clusters must be >= 1");
  if (!(spread >= 0)) throw ParameterError("spread must be >= 0");
  if (n == 0) throw ParameterError("N must be >= 1");
  if (n > m) throw CapacityError("cannot place " + std::to_string(n) + " distinct points in [0, " + std::to_string(m) + ")");

  SplitMix64 rng(seed);
  const double dm = static_cast<double>(m);
  std::vector<double> centers(static_cast<std::size_t>(clusters));
  for (double& c : centers) c = rng.uniform() * dm;
  const double sigma = spread * dm;

  std::vector<Coord> points(n);
  for (auto& p : points) {
    double center = centers[rng.below(static_cast<std::uint64_t>(clusters))];
    double v = center;
    for (int attempt = 0; attempt < 64; ++attempt) {
      v = center + sigma * rng.normal();
      if (v >= 0 && v < dm) break;
    }
    v = std::clamp(v, 0.0, dm - 1);
    p = static_cast<Coord>(v);
  }
  std::sort(points.begin(), points.end());
  for (std::size_t i = 1; i < points.size(); ++i) points[i] = std::max(points[i], points[i - 1] + 1);
  if (points.back() >= m) {
    points.back() = m - 1;
    for (std::size_t i = points.size() - 1; i-- > 0;) points[i] = std::min(points[i], points[i + 1] - 1);
  }
  return Dataset(std::move(points), m);
}

/// Writes one point per line plus a JSON sidecar next to it.
inline void write_dataset(const Dataset& d, const std::filesystem::path& points_path, const IngestInfo& info = {},
                          const std::string& source = "") {
  std::ofstream out(points_path);
  if (!out) throw ParseError("cannot write " + points_path.string());
  for (Coord p : d.points()) out << p << '\n';
  nlohmann::json sidecar = {{"N", d.size()},
                            {"M", d.domain_size()},
                            {"scale", d.scale()},
                            {"anchor", info.anchor},
                            {"source", source},
                            {"source_hash", info.source_hash},
                            {"duplicates_removed", info.duplicates_removed},
                            {"truncated", info.truncated}};
  std::ofstream side(std::filesystem::path(points_path).concat(".json"));
  side << sidecar.dump(2) << '\n';
}

}  // namespace rcb
