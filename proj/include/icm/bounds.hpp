#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "icm/model.hpp"

namespace icm {

/// Values with at most this many bits are held exactly.
inline constexpr std::size_t kExactBitCap = std::size_t{1} << 20;

/// A non-negative magnitude: either an exact integer, or a tower
/// 2^(2^(...^top)) with `height` twos. Towers are kept canonical: their
/// value exceeds 2^kExactBitCap, and top is 1 or not a power of two.
class BoundValue {
 public:
  /// Throws Error if v has more than kExactBitCap bits.
  static BoundValue exact(mpz_class v);
  /// Canonicalizes; may return an exact value.
  static BoundValue tower(std::size_t height, mpz_class top);

  bool is_exact() const { return height_ == 0; }
  const mpz_class& value() const;  // exact only
  std::size_t height() const { return height_; }
  const mpz_class& top() const { return top_; }

  friend std::strong_ordering operator<=>(const BoundValue& a, const BoundValue& b);
  friend bool operator==(const BoundValue& a, const BoundValue& b) {
    return a.height_ == b.height_ && a.top_ == b.top_;
  }

  std::string to_string() const;

 private:
  std::size_t height_ = 0;
  mpz_class top_;
};

/// 2 up-arrow m: a tower of m twos. m >= 1.
BoundValue tetration(std::size_t m);

/// |Q| * prod over D of (|Sigma|+1)^f(d).
mpz_class gamma_bound(std::uint64_t q_count, std::uint64_t sigma_count,
                      const BoundingFunction& f);

/// Exact number of classes: |Q| * prod over D of sum_{j<=f(d)} |Sigma|^j.
mpz_class exact_class_count(std::uint64_t q_count, std::uint64_t sigma_count,
                            const BoundingFunction& f);

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;
};

struct FrequentPairWitness {
  /// 1-based, strictly interleaved index pairs (i, i').
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t n = 0;
  Rational alpha;
  std::size_t set_size = 0;

  /// ceil(alpha n / (2(|S|+1))).
  std::size_t required_pairs() const;
  /// Largest admissible i' - i is floor(2(|S|+1)/alpha).
  std::size_t max_difference() const;
};

namespace detail {
std::size_t ceil_div(std::uint64_t a, std::uint64_t b);
void check_alpha(const Rational& alpha);
}  // namespace detail

/// Pigeonhole extraction of equal pairs from the S-positions of seq: scanning
/// the S-positions left to right, each pair closes at the first repeated
/// value since the previous pair, so each group spans at most |S|+1
/// S-positions. Pairs longer than 2(|S|+1)/alpha are dropped, which keeps
/// at least the shorter half. Throws Error when S is not alpha-frequent.
template <class T>
FrequentPairWitness extract_frequent_pairs(std::span<const T> seq, const std::set<T>& s,
                                           Rational alpha) {
  detail::check_alpha(alpha);
  if (s.empty()) throw Error("the frequent set must be non-empty");
  const std::size_t n = seq.size();
  const auto hits = static_cast<std::uint64_t>(
      std::ranges::count_if(seq, [&](const T& w) { return s.contains(w); }));
  if (n == 0 || static_cast<__int128>(hits) * alpha.den < static_cast<__int128>(alpha.num) * n)
    throw Error("set is not alpha-frequent in the sequence");

  FrequentPairWitness w;
  w.n = n;
  w.alpha = alpha;
  w.set_size = s.size();
  const std::size_t limit = w.max_difference();

  std::vector<std::pair<const T*, std::size_t>> open;  // value, 1-based position
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.contains(seq[i])) continue;
    auto it = std::ranges::find_if(open, [&](const auto& e) { return *e.first == seq[i]; });
    if (it == open.end()) {
      open.emplace_back(&seq[i], i + 1);
      continue;
    }
    if (i + 1 - it->second <= limit) w.pairs.emplace_back(it->second, i + 1);
    open.clear();
  }
  return w;
}

/// Run-length bound from the explicit recurrence: M0 = 1, 1/alpha0 = 1,
/// gamma_i = |Q| (|Sigma|+1)^(i M_i), K = 2^(|Sigma| |C|),
/// M_{i+1} = (gamma_i+1)(4+8K)/alpha_i, 1/alpha_{i+1} = 8(gamma_i+1)K/alpha_i,
/// result gamma_|C| / alpha_|C|. Towers are upper bounds.
BoundValue run_length_bound(std::uint64_t q_count, std::uint64_t sigma_count,
                            std::uint64_t channel_count);

/// The same bound for a machine, after emptiness tests are normalized away.
BoundValue run_length_bound(const Machine& m);

/// Intermediate values of the recurrence, for reporting.
struct RecurrenceLevel {
  BoundValue level_bound;  // M_i
  BoundValue inverse_alpha;
  BoundValue gamma;
};
std::vector<RecurrenceLevel> run_length_recurrence(std::uint64_t q_count,
                                                   std::uint64_t sigma_count,
                                                   std::uint64_t channel_count);

}  // namespace icm
