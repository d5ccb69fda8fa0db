#pragma once

// Shared domain types: datasets, query ranges, intervals, exact probabilities
// and level-difference distributions.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rcb {

using Coord = std::uint64_t;
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Errors. Every failure surfaces as one of these; the CLI maps them to exit
// codes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ConstructionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
/// Inputs outside the setting the closed forms are stated for
/// (N a power of two >= 2, c = 2^a + 1).
struct TheoryDomainError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ShortfallError : Error {
  using Error::Error;
};
struct CapacityError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------

/// Sorted, deduplicated integer points over the domain [0, M).
class Dataset {
 public:
  Dataset(std::vector<Coord> points, Coord domain_size, double scale = 1.0)
      : points_(std::move(points)), domain_size_(domain_size), scale_(scale) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i] >= domain_size_)
        throw ValidationError("dataset point " + std::to_string(points_[i]) +
                              " outside domain [0, " + std::to_string(domain_size_) + ")");
      if (i > 0 && points_[i] <= points_[i - 1])
        throw ValidationError("dataset points must be strictly increasing (index " +
                              std::to_string(i) + ")");
    }
  }

  /// Domain defaults to max + 1.
  static Dataset from_points(std::vector<Coord> points) {
    Coord m = points.empty() ? 1 : points.back() + 1;
    return Dataset(std::move(points), m);
  }

  std::span<const Coord> points() const { return points_; }
  Coord operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  Coord domain_size() const { return domain_size_; }
  /// Multiplier applied to raw inputs before they were rounded to integers.
  double scale() const { return scale_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Coord> points_;
  Coord domain_size_;
  double scale_;
};

/// Half-open [lo, hi).
struct Interval {
  Coord lo = 0;
  Coord hi = 0;

  Coord length() const { return hi - lo; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Floating query [x, x + s). Used on the sampling path.
struct QueryRange {
  double start = 0;
  double length = 1;

  double end() const { return start + length; }
  bool within(const Interval& iv) const {
    return static_cast<double>(iv.lo) <= start && end() <= static_cast<double>(iv.hi);
  }
  bool within_domain(Coord m) const {
    return start >= 0 && length > 0 && end() <= static_cast<double>(m);
  }
  bool contains_point(Coord p) const {
    const double x = static_cast<double>(p);
    return start <= x && x < end();
  }
};

/// Exact query [x, x + s) with x = start_num / den and s = length_num / den.
/// The sweep oracle uses it so that segment midpoints are classified without
/// rounding.
struct ExactQuery {
  std::int64_t start_num = 0;
  std::int64_t length_num = 1;
  std::int64_t den = 1;

  bool within(const Interval& iv) const {
    using W = __int128;
    W lo = static_cast<W>(iv.lo) * den;
    W hi = static_cast<W>(iv.hi) * den;
    return lo <= start_num && static_cast<W>(start_num) + length_num <= hi;
  }
  bool contains_point(Coord p) const {
    using W = __int128;
    W x = static_cast<W>(p) * den;
    return start_num <= x && x < static_cast<W>(start_num) + length_num;
  }
  bool within_domain(Coord m) const {
    using W = __int128;
    return start_num >= 0 && length_num > 0 && den > 0 &&
           static_cast<W>(start_num) + length_num <= static_cast<W>(m) * den;
  }
};

template <class Q>
concept RangeQuery = requires(const Q& q, const Interval& iv, Coord m) {
  { q.within(iv) } -> std::convertible_to<bool>;
  { q.within_domain(m) } -> std::convertible_to<bool>;
  { q.contains_point(m) } -> std::convertible_to<bool>;
};

/// Branching configuration. c == 2 is the plain 1D-Tree.
class DagConfig {
 public:
  explicit DagConfig(int branching) : branching_(branching) {
    if (branching_ < 2) throw ConfigError("branching factor must be >= 2, got " + std::to_string(branching));
    for (int a = 1; a < 31; ++a)
      if ((1 << a) + 1 == branching_) theory_alpha_ = a;
  }

  int branching() const { return branching_; }
  bool is_tree() const { return branching_ == 2; }
  /// alpha with c = 2^alpha + 1, when it exists.
  std::optional<int> theory_alpha() const { return theory_alpha_; }

  friend bool operator==(const DagConfig&, const DagConfig&) = default;

 private:
  int branching_;
  std::optional<int> theory_alpha_;
};

// ---------------------------------------------------------------------------
// Exact helpers.

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  std::string out = numerator(r).str();
  if (denominator(r) != 1) out += "/" + denominator(r).str();
  return out;
}

/// 2^e as an exact rational; e may be negative.
inline Rational pow2(int e) {
  BigInt one = 1;
  if (e >= 0) return Rational(one << e);
  return Rational(BigInt(1), one << (-e));
}

/// Exact rational from a decimal or fraction literal ("3", "2.5", "7/3").
inline Rational parse_rational(const std::string& text) {
  auto bad = [&] { return ParameterError("not a number: '" + text + "'"); };
  if (text.empty()) throw bad();
  if (auto slash = text.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw bad();
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  BigInt num = 0;
  BigInt den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    char ch = text[pos];
    if (ch == '.' && !seen_dot) {
      seen_dot = true;
    } else if (ch >= '0' && ch <= '9') {
      num = num * 10 + (ch - '0');
      if (seen_dot) den *= 10;
      seen_digit = true;
    } else {
      throw bad();
    }
  }
  if (!seen_digit) throw bad();
  Rational r(num, den);
  return negative ? Rational(-r) : r;
}

/// Largest kappa with 2^kappa * s <= N, computed by integer comparison.
inline int kappa_of(std::uint64_t n_points, const Rational& s) {
  if (n_points < 1) throw ParameterError("N must be >= 1");
  if (s < 1 || s > Rational(n_points))
    throw ParameterError("query length " + to_string(s) + " outside [1, " + std::to_string(n_points) + "]");
  int kappa = 0;
  Rational scaled = s * 2;
  while (scaled <= Rational(n_points)) {
    ++kappa;
    scaled *= 2;
  }
  return kappa;
}

inline int kappa_of(std::uint64_t n_points, std::uint64_t s) { return kappa_of(n_points, Rational(s)); }

/// Exponent n+1 when N = 2^(n+1) with n >= 0.
inline std::optional<int> power_of_two_exponent(std::uint64_t n_points) {
  if (n_points < 2 || (n_points & (n_points - 1)) != 0) return std::nullopt;
  int e = 0;
  while ((std::uint64_t{1} << e) != n_points) ++e;
  return e;
}

// ---------------------------------------------------------------------------

/// Exact probability mass over level differences k = level_dag - level_tree.
class LevelDifferenceDistribution {
 public:
  LevelDifferenceDistribution() = default;

  LevelDifferenceDistribution(int kappa, std::map<int, Rational> mass) : kappa_(kappa), mass_(std::move(mass)) {
    Rational total = 0;
    for (const auto& [k, p] : mass_) {
      if (p < 0) throw ValidationError("negative mass at k=" + std::to_string(k) + ": " + to_string(p));
      total += p;
    }
    if (total != 1) throw ValidationError("masses sum to " + to_string(total) + ", not 1");
  }

  static LevelDifferenceDistribution point_mass(int k, int kappa = 0) {
    return LevelDifferenceDistribution(kappa, {{k, Rational(1)}});
  }

  /// Normalised counts.
  static LevelDifferenceDistribution from_counts(const std::map<int, std::uint64_t>& counts, int kappa = 0) {
    std::uint64_t total = 0;
    for (const auto& [k, n] : counts) total += n;
    if (total == 0) throw ValidationError("cannot normalise an empty histogram");
    std::map<int, Rational> mass;
    for (const auto& [k, n] : counts) mass[k] = Rational(BigInt(n), BigInt(total));
    return LevelDifferenceDistribution(kappa, std::move(mass));
  }

  int kappa() const { return kappa_; }
  const std::map<int, Rational>& masses() const { return mass_; }

  Rational operator()(int k) const {
    auto it = mass_.find(k);
    return it == mass_.end() ? Rational(0) : it->second;
  }

  std::map<int, double> to_double() const {
    std::map<int, double> out;
    for (const auto& [k, p] : mass_) out[k] = rcb::to_double(p);
    return out;
  }

  /// Mass-by-mass equality; absent keys count as zero mass.
  friend bool operator==(const LevelDifferenceDistribution& a, const LevelDifferenceDistribution& b) {
    for (const auto& [k, p] : a.mass_)
      if (b(k) != p) return false;
    for (const auto& [k, p] : b.mass_)
      if (a(k) != p) return false;
    return true;
  }

 private:
  int kappa_ = 0;
  std::map<int, Rational> mass_{{0, Rational(1)}};
};

inline std::string to_string(const LevelDifferenceDistribution& d) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, p] : d.masses()) {
    if (!first) out += ", ";
    first = false;
    out += std::to_string(k) + ": " + to_string(p);
  }
  return out + "}";
}

}  // namespace rcb
