#include "calib/dominance.hpp"

#include <cmath>
#include <numeric>

#include "calib/error.hpp"
#include "text_util.hpp"

namespace calib {
namespace {

Fraction reduced(std::int64_t num, std::int64_t den) {
  auto g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

void require_unit_interval(const Fraction& f) {
  if (f.den <= 0 || f.num < 0 || f.num > f.den) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be a fraction in [0, 1], got " + f.str());
  }
}

}  // namespace

Fraction Fraction::from_double(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (value == 0.0) return {0, 1};
  int exp = 0;
  double mantissa = std::frexp(value, &exp);  // value = mantissa * 2^exp, mantissa in [0.5, 1)
  auto digits = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  int shift = 53 - exp;  // value = digits / 2^shift
  constexpr int kMaxShift = 62;
  if (shift > kMaxShift) {
    int excess = shift - kMaxShift;
    digits = excess >= 63 ? 0 : (digits + (std::int64_t{1} << (excess - 1))) >> excess;
    shift = kMaxShift;
  }
  return reduced(digits, std::int64_t{1} << shift);
}

Fraction Fraction::from_decimal(std::string_view text) {
  auto t = text::trim(text);
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool after_dot = false;
  int digits = 0;
  if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "empty decimal");
  for (char c : t) {
    if (c == '.' && !after_dot) {
      after_dot = true;
      continue;
    }
    if (c < '0' || c > '9' || ++digits > 18) {
      throw Error(ErrorCode::kInvalidArgument, "not a plain decimal: '" + std::string(t) + "'");
    }
    num = num * 10 + (c - '0');
    if (after_dot) den *= 10;
  }
  if (digits == 0) throw Error(ErrorCode::kInvalidArgument, "not a plain decimal: '" + std::string(t) + "'");
  return reduced(num, den);
}

std::string Fraction::str() const { return std::to_string(num) + "/" + std::to_string(den); }

int compare_unified(std::size_t n_paths, std::size_t max_steps, Fraction alpha,
                    const DominanceTuple& t) {
  // (D_j - D_k) * den * N * M = num*M*(n_j - n_k) + (den - num)*N*(m_j - m_k)
  using wide = __int128;
  const wide dn = static_cast<wide>(t.n_j) - static_cast<wide>(t.n_k);
  const wide dm = static_cast<wide>(t.m_j) - static_cast<wide>(t.m_k);
  const wide lhs = static_cast<wide>(alpha.num) * static_cast<wide>(max_steps) * dn +
                   static_cast<wide>(alpha.den - alpha.num) * static_cast<wide>(n_paths) * dm;
  return lhs > 0 ? 1 : (lhs < 0 ? -1 : 0);
}

DominanceVerdict check_dominance(std::size_t n_paths, std::size_t max_steps, Fraction alpha,
                                 DominanceMode mode, std::optional<ConstraintSet> constraints) {
  if (n_paths < 1 || max_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "N and M must be >= 1");
  }
  require_unit_interval(alpha);
  const auto rules = constraints.value_or(ConstraintSet::defaults_for(mode));

  DominanceVerdict verdict;
  for (std::size_t n_j = 1; n_j <= n_paths; ++n_j) {
    for (std::size_t n_k = 1; n_k <= n_paths; ++n_k) {
      bool n_ok = mode == DominanceMode::kStep ? n_j < n_k : n_k < n_j;
      if (!n_ok || (rules.sum_bound && n_j + n_k > n_paths)) continue;
      for (std::size_t m_j = 0; m_j <= max_steps; ++m_j) {
        for (std::size_t m_k = 0; m_k <= max_steps; ++m_k) {
          bool m_ok = mode == DominanceMode::kStep ? m_k < m_j : m_j < m_k;
          if (!m_ok) continue;
          ++verdict.pairs_checked;
          DominanceTuple t{n_j, n_k, m_j, m_k};
          if (compare_unified(n_paths, max_steps, alpha, t) <= 0 && verdict.holds) {
            verdict.holds = false;
            verdict.counterexample = t;
          }
        }
      }
    }
  }
  return verdict;
}

}  // namespace calib
