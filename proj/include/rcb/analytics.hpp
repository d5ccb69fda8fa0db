#pragma once

// Closed-form level-difference distributions between the 1D-Tree and the
// c-DAG on the uniform unit grid (N = 2^(n+1) points, c = 2^a + 1), their
// expectations and bounds, fitting of empirical distributions to the closed
// forms, and Shannon entropy of returned levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcb/core.hpp"

namespace rcb {

enum class Regime {
  unit,        // s == 1: both structures return the same leaf
  degenerate,  // kappa == 0 (including s == N): both return the root
  small,       // 2^(n-kappa) < s <= (c-2)/(c-1) 2^(n-kappa+1)
  large,       // (c-2)/(c-1) 2^(n-kappa+1) < s <= 2^(n-kappa+1)
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::unit: return "s=1";
    case Regime::degenerate: return "kappa=0";
    case Regime::small: return "small-s";
    case Regime::large: return "large-s";
  }
  return "?";
}

namespace detail {

struct TheoryParams {
  std::uint64_t n_points;  // N
  int n;                   // N = 2^(n+1)
  int c;
  int kappa;
  Regime regime;
};

inline TheoryParams theory_params(std::uint64_t n_points, int c, const Rational& s) {
  auto e = power_of_two_exponent(n_points);
  if (!e) throw TheoryDomainError("N = " + std::to_string(n_points) + " is not of the form 2^(n+1)");
  if (c < 3 || !DagConfig(c).theory_alpha())
    throw TheoryDomainError("c = " + std::to_string(c) + " is not of the form 2^a + 1");
  const int kappa = kappa_of(n_points, s);
  const int n = *e - 1;
  Regime regime;
  if (s == 1) {
    regime = Regime::unit;
  } else if (kappa == 0) {
    regime = Regime::degenerate;
  } else {
    Rational threshold = Rational(c - 2, c - 1) * pow2(n - kappa + 1);
    regime = s <= threshold ? Regime::small : Regime::large;
  }
  return {n_points, n, c, kappa, regime};
}

}  // namespace detail

inline Regime regime_of(std::uint64_t n_points, int c, const Rational& s) {
  return detail::theory_params(n_points, c, s).regime;
}

/// Exact closed-form level-difference distribution.
inline LevelDifferenceDistribution theoretical_ldd(std::uint64_t n_points, int c, const Rational& s) {
  const auto tp = detail::theory_params(n_points, c, s);
  const int kappa = tp.kappa;
  const int n = tp.n;
  if (tp.regime == Regime::unit || tp.regime == Regime::degenerate)
    return LevelDifferenceDistribution::point_mass(0, kappa);

  const Rational big_n(n_points);
  const Rational span = big_n - s;
  std::map<int, Rational> mass;
  if (tp.regime == Regime::small) {
    mass[0] = (big_n - pow2(kappa) * s) / span;
    for (int k = 1; k <= kappa; ++k) mass[k] = pow2(kappa - k) * s / span;
  } else {
    const Rational cc(c);
    mass[0] = (-(cc - 4) * pow2(n) + (cc - 3) * pow2(kappa - 1) * s) / span;
    for (int k = 1; k <= kappa - 1; ++k)
      mass[k] = ((cc - 2) * pow2(n - k) - (cc - 3) * pow2(kappa - k - 1) * s) / span;
    mass[kappa] = ((cc - 2) * pow2(n - kappa + 1) - (cc - 2) * s) / span;
  }
  return LevelDifferenceDistribution(kappa, std::move(mass));
}

inline LevelDifferenceDistribution theoretical_ldd(std::uint64_t n_points, int c, std::uint64_t s) {
  return theoretical_ldd(n_points, c, Rational(s));
}

/// sum_k k * P(k)
inline Rational expected_level_difference(const LevelDifferenceDistribution& dist) {
  Rational e = 0;
  for (const auto& [k, p] : dist.masses()) e += Rational(k) * p;
  return e;
}

/// sum_k 2^k * P(k)
inline Rational expected_fp_ratio(const LevelDifferenceDistribution& dist) {
  Rational e = 0;
  for (const auto& [k, p] : dist.masses()) e += pow2(k) * p;
  return e;
}

/// Expected level difference evaluated directly from the summed closed forms.
inline Rational expected_level_difference_closed_form(std::uint64_t n_points, int c, const Rational& s) {
  const auto tp = detail::theory_params(n_points, c, s);
  if (tp.regime == Regime::unit || tp.regime == Regime::degenerate) return 0;
  const Rational span = Rational(n_points) - s;
  const int kappa = tp.kappa;
  if (tp.regime == Regime::small) return s * (pow2(kappa + 1) - kappa - 2) / span;
  const Rational cc(c);
  const Rational geometric = pow2(kappa) - 1;
  return ((cc - 2) * pow2(tp.n - kappa + 1) * geometric + s * ((3 - cc) * geometric - kappa)) / span;
}

/// Expected FP-competitive ratio evaluated directly from the summed closed forms.
inline Rational expected_fp_ratio_closed_form(std::uint64_t n_points, int c, const Rational& s) {
  const auto tp = detail::theory_params(n_points, c, s);
  if (tp.regime == Regime::unit || tp.regime == Regime::degenerate) return 1;
  const Rational big_n(n_points);
  const Rational span = big_n - s;
  const int kappa = tp.kappa;
  if (tp.regime == Regime::small) return (big_n + Rational(kappa - 1) * pow2(kappa) * s) / span;
  const Rational cc(c);
  return (((cc - 2) * kappa + 2) * pow2(tp.n) - ((cc - 3) * kappa + 2) * pow2(kappa - 1) * s) / span;
}

/// 2(c-2)/(c-1), exact.
inline Rational level_difference_bound_exact(int c) {
  if (c < 3) throw ParameterError("level-difference bound needs c >= 3, got " + std::to_string(c));
  return Rational(2 * (c - 2), c - 1);
}

inline double level_difference_bound(int c) { return to_double(level_difference_bound_exact(c)); }

/// Limit of 2(c-2)/(c-1) as c grows.
inline constexpr double kLevelDifferenceBoundLimit = 2.0;

/// max{1, kappa/2}, exact. Stated for s > 1; at s = 1 the ratio is exactly 1.
inline Rational fp_ratio_lower_bound_exact(std::uint64_t n_points, const Rational& s) {
  Rational half_kappa(kappa_of(n_points, s), 2);
  return half_kappa > 1 ? half_kappa : Rational(1);
}

inline double fp_ratio_lower_bound(std::uint64_t n_points, const Rational& s) {
  return to_double(fp_ratio_lower_bound_exact(n_points, s));
}
inline double fp_ratio_lower_bound(std::uint64_t n_points, std::uint64_t s) {
  return fp_ratio_lower_bound(n_points, Rational(s));
}

/// Euclidean distance between two mass functions over the union of supports.
inline double l2_distance(const LevelDifferenceDistribution& a, const LevelDifferenceDistribution& b) {
  Rational sq = 0;
  for (const auto& [k, p] : a.masses()) {
    Rational d = p - b(k);
    sq += d * d;
  }
  for (const auto& [k, p] : b.masses())
    if (!a.masses().contains(k)) sq += p * p;
  return std::sqrt(to_double(sq));
}

inline double l2_distance(const std::map<int, double>& a, const std::map<int, double>& b) {
  double sq = 0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    double d = p - (it == b.end() ? 0.0 : it->second);
    sq += d * d;
  }
  for (const auto& [k, p] : b)
    if (!a.contains(k)) sq += p * p;
  return std::sqrt(sq);
}

struct FitResult {
  std::uint64_t s_star = 1;
  double epsilon = 0;
  int kappa_star = 0;
};

namespace detail {

// Floating evaluation of the closed forms for integer s; used only to rank
// candidates during the fit scan.
inline void theoretical_masses(std::uint64_t n_points, int n, int c, std::uint64_t s, std::vector<double>& out) {
  out.clear();
  int kappa = 0;
  while ((s << (kappa + 1)) <= n_points) ++kappa;
  if (s == 1 || kappa == 0) {
    out.push_back(1.0);
    return;
  }
  out.assign(static_cast<std::size_t>(kappa) + 1, 0.0);
  const long double big_n = static_cast<long double>(n_points);
  const long double ls = static_cast<long double>(s);
  const long double span = big_n - ls;
  const long double cc = c;
  auto p2 = [](int e) { return std::ldexp(1.0L, e); };
  if (ls * (cc - 1) <= (cc - 2) * p2(n - kappa + 1)) {
    out[0] = static_cast<double>((big_n - p2(kappa) * ls) / span);
    for (int k = 1; k <= kappa; ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(p2(kappa - k) * ls / span);
  } else {
    out[0] = static_cast<double>((-(cc - 4) * p2(n) + (cc - 3) * p2(kappa - 1) * ls) / span);
    for (int k = 1; k <= kappa - 1; ++k)
      out[static_cast<std::size_t>(k)] =
          static_cast<double>(((cc - 2) * p2(n - k) - (cc - 3) * p2(kappa - k - 1) * ls) / span);
    out[static_cast<std::size_t>(kappa)] = static_cast<double>(((cc - 2) * p2(n - kappa + 1) - (cc - 2) * ls) / span);
  }
}

}  // namespace detail

/// Finds the integer length s* whose closed-form distribution is nearest (L2)
/// to `empirical`. Ties go to the smaller s*.
inline FitResult fit_closest_theoretical(const LevelDifferenceDistribution& empirical, std::uint64_t n_points, int c) {
  const auto tp = detail::theory_params(n_points, c, Rational(1));
  const auto emp = empirical.to_double();
  int max_key = 0;
  double outside = 0;  // squared mass at keys the closed forms never use
  for (const auto& [k, p] : emp) {
    if (k < 0) outside += p * p;
    max_key = std::max(max_key, k);
  }
  std::vector<double> emp_dense(static_cast<std::size_t>(max_key) + 1, 0.0);
  for (const auto& [k, p] : emp)
    if (k >= 0) emp_dense[static_cast<std::size_t>(k)] = p;

  std::vector<double> theory;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_s = 1;
  for (std::uint64_t s = 1; s <= n_points; ++s) {
    detail::theoretical_masses(n_points, tp.n, c, s, theory);
    double sq = outside;
    std::size_t top = std::max(theory.size(), emp_dense.size());
    for (std::size_t k = 0; k < top; ++k) {
      double a = k < emp_dense.size() ? emp_dense[k] : 0.0;
      double b = k < theory.size() ? theory[k] : 0.0;
      sq += (a - b) * (a - b);
    }
    if (sq < best - 1e-15) {
      best = sq;
      best_s = s;
    }
  }
  FitResult fit;
  fit.s_star = best_s;
  fit.kappa_star = kappa_of(n_points, best_s);
  fit.epsilon = l2_distance(empirical, theoretical_ldd(n_points, c, best_s));
  return fit;
}

struct BoundReport {
  Regime regime = Regime::unit;
  int kappa = 0;
  double epsilon = 0;
  bool fitted = false;
  Rational expected_level_diff;
  double level_diff_bound = 0;
  Rational expected_fp_ratio;
  double fp_ratio_lower_bound = 0;
  /// Set when the fitted FP lower bound is <= 0 and therefore says nothing.
  bool vacuous_fp_bound = false;
};

/// Bounds for the uniform setting at length s.
inline BoundReport theorem_bounds(std::uint64_t n_points, int c, const Rational& s) {
  auto dist = theoretical_ldd(n_points, c, s);
  BoundReport r;
  r.regime = regime_of(n_points, c, s);
  r.kappa = kappa_of(n_points, s);
  r.expected_level_diff = expected_level_difference(dist);
  r.level_diff_bound = level_difference_bound(c);
  r.expected_fp_ratio = expected_fp_ratio(dist);
  r.fp_ratio_lower_bound = fp_ratio_lower_bound(n_points, s);
  return r;
}

/// Bounds transferred to an empirical distribution that is epsilon-close to
/// the closed form at s*: level bound + eps*kappa, FP bound - 2^(eps*kappa).
inline BoundReport corollary_bounds(const FitResult& fit, int c, std::uint64_t n_points) {
  BoundReport r = theorem_bounds(n_points, c, Rational(fit.s_star));
  const double ek = fit.epsilon * r.kappa;
  r.fitted = true;
  r.epsilon = fit.epsilon;
  r.level_diff_bound += ek;
  r.fp_ratio_lower_bound -= std::exp2(ek);
  r.vacuous_fp_bound = r.fp_ratio_lower_bound <= 0;
  return r;
}

struct EntropyReport {
  std::map<int, double> level_probs;
  double entropy_bits = 0;
};

/// -sum p log2 p over nonzero masses.
inline double shannon_entropy(const std::map<int, double>& level_probs) {
  double total = 0;
  for (const auto& [l, p] : level_probs) {
    if (p < 0 || !std::isfinite(p)) throw ValidationError("invalid probability at level " + std::to_string(l));
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("level probabilities sum to " + std::to_string(total));
  double h = 0;
  for (const auto& [l, p] : level_probs)
    if (p > 0) h -= p * std::log2(p);
  return std::max(h, 0.0);
}

inline EntropyReport entropy_from_counts(const std::map<int, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [l, n] : counts) total += n;
  if (total == 0) throw ValidationError("empty level histogram");
  EntropyReport r;
  for (const auto& [l, n] : counts) r.level_probs[l] = static_cast<double>(n) / static_cast<double>(total);
  r.entropy_bits = shannon_entropy(r.level_probs);
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const LevelDifferenceDistribution& d) {
  nlohmann::json masses = nlohmann::json::array();
  for (const auto& [k, p] : d.masses())
    masses.push_back({{"k", k},
                      {"numerator", numerator(p).str()},
                      {"denominator", denominator(p).str()},
                      {"float", to_double(p)}});
  return {{"kappa", d.kappa()}, {"mass", std::move(masses)}};
}

inline nlohmann::json to_json(const FitResult& f) {
  return {{"s_star", f.s_star}, {"epsilon", f.epsilon}, {"kappa_star", f.kappa_star}};
}

inline nlohmann::json to_json(const BoundReport& r) {
  return {{"regime", to_string(r.regime)},
          {"kappa", r.kappa},
          {"fitted", r.fitted},
          {"epsilon", r.epsilon},
          {"expected_level_diff", to_string(r.expected_level_diff)},
          {"expected_level_diff_float", to_double(r.expected_level_diff)},
          {"level_diff_bound", r.level_diff_bound},
          {"expected_fp_ratio", to_string(r.expected_fp_ratio)},
          {"expected_fp_ratio_float", to_double(r.expected_fp_ratio)},
          {"fp_ratio_lower_bound", r.fp_ratio_lower_bound},
          {"vacuous_fp_bound", r.vacuous_fp_bound}};
}

}  // namespace rcb
