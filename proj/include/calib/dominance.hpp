#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace calib {

/// Exact non-negative rational used for alpha in the enumeration oracle. Comparisons of
/// unified scores at a threshold are equalities, so they are decided in integer arithmetic.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Exact value of a double in [0, 1] (denominator capped at 2^62; values below 2^-62 round).
  static Fraction from_double(double value);
  /// Exact value of a plain decimal literal ("0.3", "1"); exponent notation is rejected.
  static Fraction from_decimal(std::string_view text);

  [[nodiscard]] double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  [[nodiscard]] std::string str() const;
};

enum class DominanceMode { kStep, kPath };

/// Which pairs count as admissible. Step mode requires n_j + n_k <= N by default; path mode
/// omits that sum bound by default.
struct ConstraintSet {
  bool sum_bound = true;

  static ConstraintSet defaults_for(DominanceMode mode) {
    return {mode == DominanceMode::kStep};
  }
};

struct DominanceTuple {
  std::size_t n_j = 0;
  std::size_t n_k = 0;
  std::size_t m_j = 0;
  std::size_t m_k = 0;

  friend bool operator==(const DominanceTuple&, const DominanceTuple&) = default;
};

struct DominanceVerdict {
  bool holds = true;
  std::size_t pairs_checked = 0;
  std::optional<DominanceTuple> counterexample;  // first violating tuple in enumeration order
};

/// Enumerates every admissible (n_j, n_k, m_j, m_k) and checks D_j > D_k strictly.
///   step: 1 <= n_j < n_k,  0 <= m_k < m_j <= M   (plus n_j + n_k <= N when sum_bound)
///   path: 1 <= n_k < n_j <= N,  0 <= m_j < m_k <= M   (plus n_j + n_k <= N when sum_bound)
/// Enumeration order is n_j, n_k, m_j, m_k, each ascending.
DominanceVerdict check_dominance(std::size_t n_paths, std::size_t max_steps, Fraction alpha,
                                 DominanceMode mode,
                                 std::optional<ConstraintSet> constraints = std::nullopt);

/// Sign of D_j - D_k under exact arithmetic: -1, 0 or 1.
int compare_unified(std::size_t n_paths, std::size_t max_steps, Fraction alpha,
                    const DominanceTuple& t);

}  // namespace calib
