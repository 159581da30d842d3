#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regula {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EffectMagnitude { Negligible, Small, Medium, Large };

inline const char* effect_magnitude_name(EffectMagnitude m) {
  switch (m) {
    case EffectMagnitude::Negligible: return "negligible";
    case EffectMagnitude::Small: return "small";
    case EffectMagnitude::Medium: return "medium";
    case EffectMagnitude::Large: return "large";
  }
  return "?";
}

struct EffectSize {
  double a12 = 0.5;
  double scaled = 0.0;  // (a12 - 0.5) * 2
  EffectMagnitude magnitude = EffectMagnitude::Negligible;
};

// |scaled| < 0.147 negligible, < 0.33 small, < 0.474 medium, else large.
inline EffectMagnitude classify_effect(double scaled) {
  double m = std::fabs(scaled);
  if (m < 0.147) return EffectMagnitude::Negligible;
  if (m < 0.33) return EffectMagnitude::Small;
  if (m < 0.474) return EffectMagnitude::Medium;
  return EffectMagnitude::Large;
}

inline EffectSize effect_size_from_a12(double a12) {
  EffectSize e;
  e.a12 = a12;
  e.scaled = (a12 - 0.5) * 2.0;
  e.magnitude = classify_effect(e.scaled);
  return e;
}

// Vargha-Delaney A12: probability that a draw from x exceeds a draw from y,
// ties counted half.
inline EffectSize a12(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw StatsError("A12 requires non-empty samples");
  double wins = 0.0;
  for (double xi : x) {
    for (double yj : y) {
      if (xi > yj)
        wins += 1.0;
      else if (xi == yj)
        wins += 0.5;
    }
  }
  return effect_size_from_a12(wins / (static_cast<double>(x.size()) * static_cast<double>(y.size())));
}

namespace detail {

// Regularized incomplete gamma Q(a, x) by series / continued fraction
// (Numerical Recipes style). Used for the chi-square survival function.
inline double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw StatsError("gamma_q domain error");
  if (x == 0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // lower series
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  // continued fraction for Q
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

// P(X >= x) for a chi-square variable with k degrees of freedom.
inline double chi_square_sf(double x, int dof) {
  if (dof < 1) throw StatsError("chi-square needs dof >= 1");
  if (x <= 0) return 1.0;
  return detail::gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

// Within-row midranks.
inline std::vector<double> midranks(std::span<const double> row) {
  size_t k = row.size();
  std::vector<size_t> order(k);
  for (size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return row[a] < row[b]; });
  std::vector<double> ranks(k, 0.0);
  size_t i = 0;
  while (i < k) {
    size_t j = i;
    while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
    double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;  // per treatment
  bool exact = false;
};

struct StatConfig {
  double alpha = 0.01;
  // Exact permutation p-value when subjects * treatments <= this cap;
  // chi-square approximation otherwise.
  int exact_cells_cap = 12;
};

namespace detail {

// Tie-corrected Friedman statistic over a complete block (rows = subjects,
// columns = treatments). Matches the standard rank-sum form; an all-tied
// matrix reports statistic 0 rather than 0/0.
inline double friedman_statistic(const std::vector<std::vector<double>>& ranks, size_t n,
                                 size_t k) {
  std::vector<double> col_sums(k, 0.0);
  double tie_term = 0.0;
  for (const auto& row : ranks) {
    for (size_t j = 0; j < k; ++j) col_sums[j] += row[j];
    // per-row tie sizes
    std::vector<double> sorted(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    size_t i = 0;
    while (i < sorted.size()) {
      size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  double numerator = 0.0;
  double center = static_cast<double>(n) * (static_cast<double>(k) + 1.0) / 2.0;
  for (size_t j = 0; j < k; ++j) {
    double d = col_sums[j] - center;
    numerator += d * d;
  }
  numerator *= 12.0;
  double denominator = static_cast<double>(n) * static_cast<double>(k) *
                           (static_cast<double>(k) + 1.0) -
                       tie_term / (static_cast<double>(k) - 1.0);
  if (numerator == 0.0) return 0.0;
  return numerator / denominator;
}

inline void exact_friedman_count(const std::vector<std::vector<double>>& rows, size_t row,
                                 std::vector<std::vector<double>>& current, double observed,
                                 size_t& at_least, size_t& total, size_t n, size_t k) {
  if (row == rows.size()) {
    ++total;
    if (friedman_statistic(current, n, k) >= observed - 1e-12) ++at_least;
    return;
  }
  std::vector<double> perm = rows[row];
  std::sort(perm.begin(), perm.end());
  do {
    current.push_back(perm);
    exact_friedman_count(rows, row + 1, current, observed, at_least, total, n, k);
    current.pop_back();
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace detail

// Friedman test over a complete block design: matrix[subject][treatment].
inline FriedmanResult friedman_test(const std::vector<std::vector<double>>& matrix,
                                    const StatConfig& config = {}) {
  size_t n = matrix.size();
  if (n < 2) throw StatsError("Friedman test needs at least 2 subjects");
  size_t k = matrix.front().size();
  if (k < 2) throw StatsError("Friedman test needs at least 2 treatments");
  for (const auto& row : matrix)
    if (row.size() != k) throw StatsError("Friedman test needs a complete block (no missing cells)");

  std::vector<std::vector<double>> ranks;
  ranks.reserve(n);
  for (const auto& row : matrix) ranks.push_back(midranks(row));

  FriedmanResult result;
  result.statistic = detail::friedman_statistic(ranks, n, k);
  result.mean_ranks.assign(k, 0.0);
  for (const auto& row : ranks)
    for (size_t j = 0; j < k; ++j) result.mean_ranks[j] += row[j];
  for (size_t j = 0; j < k; ++j) result.mean_ranks[j] /= static_cast<double>(n);

  if (result.statistic == 0.0) {
    result.p_value = 1.0;
    return result;
  }
  if (n * k <= static_cast<size_t>(config.exact_cells_cap)) {
    // exact permutation distribution, conditioning on each subject's values
    size_t at_least = 0, total = 0;
    std::vector<std::vector<double>> current;
    detail::exact_friedman_count(ranks, 0, current, result.statistic, at_least, total, n, k);
    result.p_value = static_cast<double>(at_least) / static_cast<double>(total);
    result.exact = true;
  } else {
    result.p_value = chi_square_sf(result.statistic, static_cast<int>(k) - 1);
  }
  return result;
}

namespace detail {

// Critical values q_alpha for the Nemenyi test: studentized range upper
// quantiles at infinite degrees of freedom divided by sqrt(2), for
// k = 2..20 treatments (Demsar 2006 convention). Only alpha 0.05 and 0.01
// are embedded; other levels are rejected.
inline double nemenyi_q(double alpha, size_t k) {
  static const double q05[] = {1.960, 2.344, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
                               3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517,
                               3.544};
  static const double q01[] = {2.576, 2.913, 3.113, 3.255, 3.364, 3.452, 3.526, 3.591, 3.646,
                               3.696, 3.741, 3.781, 3.818, 3.852, 3.884, 3.914, 3.941, 3.968,
                               3.992};
  if (k < 2 || k > 20) throw StatsError("Nemenyi table covers 2..20 treatments");
  if (alpha == 0.05) return q05[k - 2];
  if (alpha == 0.01) return q01[k - 2];
  throw StatsError("Nemenyi quantiles embedded only for alpha 0.05 and 0.01");
}

}  // namespace detail

struct NemenyiResult {
  double critical_difference = 0.0;
  std::vector<double> mean_ranks;
  std::vector<std::vector<bool>> separated;  // symmetric decision matrix
};

// Nemenyi post-hoc: pair (i, j) is separated iff the mean-rank difference
// reaches CD = q_alpha * sqrt(k (k + 1) / (6 N)).
inline NemenyiResult nemenyi_posthoc(const std::vector<std::vector<double>>& matrix,
                                     const StatConfig& config = {}) {
  size_t n = matrix.size();
  if (n < 1) throw StatsError("Nemenyi needs at least one subject");
  size_t k = matrix.front().size();
  NemenyiResult result;
  result.mean_ranks.assign(k, 0.0);
  for (const auto& row : matrix) {
    if (row.size() != k) throw StatsError("Nemenyi needs a complete block");
    std::vector<double> r = midranks(row);
    for (size_t j = 0; j < k; ++j) result.mean_ranks[j] += r[j];
  }
  for (size_t j = 0; j < k; ++j) result.mean_ranks[j] /= static_cast<double>(n);
  result.critical_difference =
      detail::nemenyi_q(config.alpha, k) *
      std::sqrt(static_cast<double>(k) * (static_cast<double>(k) + 1.0) /
                (6.0 * static_cast<double>(n)));
  result.separated.assign(k, std::vector<bool>(k, false));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j)
      result.separated[i][j] =
          i != j && std::fabs(result.mean_ranks[i] - result.mean_ranks[j]) >=
                        result.critical_difference;
  return result;
}

// Benjamini-Yekutieli step-up adjustment with the harmonic factor
// c(m) = sum_{i=1..m} 1/i. Valid under arbitrary dependence.
inline std::vector<double> by_adjust(std::span<const double> p_values) {
  size_t m = p_values.size();
  std::vector<double> adjusted(m, 0.0);
  if (m == 0) return adjusted;
  for (double p : p_values)
    if (p < 0.0 || p > 1.0) throw StatsError("p-values must lie in [0, 1]");
  double cm = 0.0;
  for (size_t i = 1; i <= m; ++i) cm += 1.0 / static_cast<double>(i);

  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return p_values[a] < p_values[b]; });

  double running = 1.0;
  for (size_t pos = m; pos-- > 0;) {
    size_t idx = order[pos];
    double value = p_values[idx] * cm * static_cast<double>(m) / static_cast<double>(pos + 1);
    running = std::min(running, std::min(1.0, value));
    adjusted[idx] = running;
  }
  return adjusted;
}

// Benjamini-Hochberg, kept as the reference point for BY's conservatism.
inline std::vector<double> bh_adjust(std::span<const double> p_values) {
  size_t m = p_values.size();
  std::vector<double> adjusted(m, 0.0);
  if (m == 0) return adjusted;
  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return p_values[a] < p_values[b]; });
  double running = 1.0;
  for (size_t pos = m; pos-- > 0;) {
    size_t idx = order[pos];
    double value = p_values[idx] * static_cast<double>(m) / static_cast<double>(pos + 1);
    running = std::min(running, std::min(1.0, value));
    adjusted[idx] = running;
  }
  return adjusted;
}

enum class Decision { Better, Worse, Same };

inline const char* decision_name(Decision d) {
  switch (d) {
    case Decision::Better: return "better";
    case Decision::Worse: return "worse";
    case Decision::Same: return "same";
  }
  return "?";
}

// Better/worse only when the corrected test separates the pair AND the
// effect size is non-negligible; direction by A12 against 0.5.
inline Decision decide(std::span<const double> x, std::span<const double> y, bool separated) {
  if (!separated) return Decision::Same;
  EffectSize e = a12(x, y);
  if (e.magnitude == EffectMagnitude::Negligible) return Decision::Same;
  return e.a12 > 0.5 ? Decision::Better : Decision::Worse;
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sd_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / (static_cast<double>(xs.size()) - 1.0));
}

}  // namespace regula
