#include "icm/bounds.hpp"

#include <cmath>

namespace icm {

namespace {

std::size_t bit_length(const mpz_class& v) { return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2); }

bool is_power_of_two(const mpz_class& v) { return v > 0 && mpz_popcount(v.get_mpz_t()) == 1; }

/// Smallest e with 2^e >= v, for v >= 1.
mpz_class ceil_log2(const mpz_class& v) {
  if (v <= 1) return 0;
  const std::size_t bits = bit_length(v);
  return is_power_of_two(v) ? bits - 1 : bits;
}

mpz_class pow2_exact(const mpz_class& e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e.get_ui());
  return r;
}

// exp2 applied `height` times to top. Every operation below returns an upper
// bound of the true result; exact inputs stay exact while they fit the cap.
struct Magnitude {
  std::size_t height = 0;
  mpz_class top;
};

Magnitude normalize(Magnitude x) {
  if (x.height == 0 && bit_length(x.top) > kExactBitCap) x = {1, ceil_log2(x.top)};
  while (x.height > 0 && x.top < kExactBitCap) {
    x.top = pow2_exact(x.top);
    --x.height;
  }
  return x;
}

Magnitude exact(mpz_class v) { return normalize({0, std::move(v)}); }

int compare(const Magnitude& a, const Magnitude& b) {
  if (a.height == b.height) return cmp(a.top, b.top) < 0 ? -1 : cmp(a.top, b.top) > 0 ? 1 : 0;
  const bool a_higher = a.height > b.height;
  const Magnitude& hi = a_higher ? a : b;
  const Magnitude& lo = a_higher ? b : a;
  // Lower hi to lo's height; exp2 is increasing and exp2(x) > x.
  mpz_class x = hi.top;
  const std::size_t lo_bits = bit_length(lo.top);
  for (std::size_t k = 0; k < hi.height - lo.height; ++k) {
    if (x >= lo_bits) return a_higher ? 1 : -1;
    x = pow2_exact(x);
  }
  const int c = cmp(x, lo.top);
  const int sign = c < 0 ? -1 : c > 0 ? 1 : 0;
  return a_higher ? sign : -sign;
}

Magnitude lg(const Magnitude& x) {
  if (x.height > 0) return {x.height - 1, x.top};
  return {0, ceil_log2(x.top)};
}

Magnitude pow2(const Magnitude& e) { return normalize({e.height + 1, e.top}); }

Magnitude add(const Magnitude& a, const Magnitude& b) {
  if (a.height == 0 && b.height == 0) return exact(a.top + b.top);
  // a + b <= 2 max(a, b) <= exp2^h(top + 1) for a tower max.
  Magnitude mx = compare(a, b) >= 0 ? a : b;
  mx.top += 1;
  return normalize(mx);
}

Magnitude mul(const Magnitude& a, const Magnitude& b) {
  if (a.height == 0 && b.height == 0) return exact(a.top * b.top);
  if ((a.height == 0 && a.top == 0) || (b.height == 0 && b.top == 0)) return exact(0);
  return pow2(add(lg(a), lg(b)));
}

/// base^e for a small base.
Magnitude power(std::uint64_t base, const Magnitude& e) {
  if (e.height == 0 && e.top == 0) return exact(1);
  if (base <= 1) return exact(base);
  const mpz_class b(static_cast<unsigned long>(base));
  if (e.height == 0 && e.top.fits_ulong_p() &&
      e.top.get_ui() * bit_length(b) <= kExactBitCap + 64) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e.top.get_ui());
    return exact(std::move(r));
  }
  if (is_power_of_two(b)) return pow2(mul(e, exact(ceil_log2(b))));
  if (e.height == 0) {
    // log2(base) rounded up at 32 fractional bits.
    const auto scaled = static_cast<unsigned long>(std::floor(std::log2(static_cast<long double>(base)) *
                                                              4294967296.0L)) + 2;
    mpz_class num = e.top * scaled;
    mpz_class q;
    mpz_cdiv_q_2exp(q.get_mpz_t(), num.get_mpz_t(), 32);
    return pow2(exact(std::move(q)));
  }
  return pow2(mul(e, exact(ceil_log2(b))));
}

BoundValue to_bound(const Magnitude& x) {
  if (x.height == 0) return BoundValue::exact(x.top);
  return BoundValue::tower(x.height, x.top);
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundValue

BoundValue BoundValue::exact(mpz_class v) {
  if (v < 0) throw Error("bound values are non-negative");
  if (bit_length(v) > kExactBitCap) throw Error("value exceeds the exact representation cap");
  BoundValue b;
  b.top_ = std::move(v);
  return b;
}

BoundValue BoundValue::tower(std::size_t height, mpz_class top) {
  if (top < 0) throw Error("tower tops are non-negative");
  Magnitude x{height, std::move(top)};
  if (x.height == 0 && bit_length(x.top) > kExactBitCap)
    throw Error("value exceeds the exact representation cap");
  x = normalize(x);
  while (x.height > 0 && x.top > 1 && is_power_of_two(x.top)) {
    x.top = ceil_log2(x.top);
    ++x.height;
  }
  BoundValue b;
  b.height_ = x.height;
  b.top_ = std::move(x.top);
  return b;
}

const mpz_class& BoundValue::value() const {
  if (!is_exact()) throw Error("tower bound has no exact value");
  return top_;
}

std::strong_ordering operator<=>(const BoundValue& a, const BoundValue& b) {
  const int c = compare({a.height_, a.top_}, {b.height_, b.top_});
  return c < 0 ? std::strong_ordering::less
               : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

std::string BoundValue::to_string() const {
  if (is_exact()) return top_.get_str();
  return "tower(height " + std::to_string(height_) + ", top " + top_.get_str() + ")";
}

BoundValue tetration(std::size_t m) {
  if (m == 0) throw Error("tetration height must be at least 1");
  Magnitude x = exact(1);
  for (std::size_t i = 0; i < m; ++i) x = pow2(x);
  return to_bound(x);
}

// ---------------------------------------------------------------------------
// Class counts

mpz_class gamma_bound(std::uint64_t q_count, std::uint64_t sigma_count,
                      const BoundingFunction& f) {
  mpz_class r(static_cast<unsigned long>(q_count));
  mpz_class p;
  for (auto v : f.values()) {
    mpz_ui_pow_ui(p.get_mpz_t(), sigma_count + 1, v);
    r *= p;
  }
  return r;
}

mpz_class exact_class_count(std::uint64_t q_count, std::uint64_t sigma_count,
                            const BoundingFunction& f) {
  mpz_class r(static_cast<unsigned long>(q_count));
  for (auto v : f.values()) {
    mpz_class words = 0;
    mpz_class term = 1;
    for (std::uint64_t j = 0; j <= v; ++j) {
      words += term;
      term *= static_cast<unsigned long>(sigma_count);
    }
    r *= words;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Density lemma helpers

namespace detail {

std::size_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::size_t>((a + b - 1) / b);
}

void check_alpha(const Rational& alpha) {
  if (alpha.num <= 0 || alpha.den <= 0 || alpha.num > alpha.den)
    throw Error("alpha must be a rational in (0, 1]");
}

}  // namespace detail

std::size_t FrequentPairWitness::required_pairs() const {
  return detail::ceil_div(static_cast<std::uint64_t>(alpha.num) * n,
                          2 * (set_size + 1) * static_cast<std::uint64_t>(alpha.den));
}

std::size_t FrequentPairWitness::max_difference() const {
  return static_cast<std::size_t>(2 * (set_size + 1) * static_cast<std::uint64_t>(alpha.den) /
                                  static_cast<std::uint64_t>(alpha.num));
}

// ---------------------------------------------------------------------------
// Run-length recurrence

std::vector<RecurrenceLevel> run_length_recurrence(std::uint64_t q_count,
                                                   std::uint64_t sigma_count,
                                                   std::uint64_t channel_count) {
  if (q_count == 0) throw Error("a machine has at least one state");
  const Magnitude q = exact(static_cast<unsigned long>(q_count));
  const Magnitude k = pow2(exact(static_cast<unsigned long>(sigma_count * channel_count)));
  const Magnitude four_plus_8k = add(exact(4), mul(exact(8), k));
  const Magnitude eight_k = mul(exact(8), k);

  Magnitude level = exact(1);
  Magnitude inv_alpha = exact(1);
  std::vector<RecurrenceLevel> out;
  for (std::uint64_t i = 0;; ++i) {
    const Magnitude exponent = mul(exact(static_cast<unsigned long>(i)), level);
    const Magnitude gamma = mul(q, power(sigma_count + 1, exponent));
    out.push_back({to_bound(level), to_bound(inv_alpha), to_bound(gamma)});
    if (i == channel_count) break;
    const Magnitude gamma1 = add(gamma, exact(1));
    Magnitude next_level = mul(mul(gamma1, four_plus_8k), inv_alpha);
    inv_alpha = mul(mul(eight_k, gamma1), inv_alpha);
    level = std::move(next_level);
  }
  return out;
}

BoundValue run_length_bound(std::uint64_t q_count, std::uint64_t sigma_count,
                            std::uint64_t channel_count) {
  const auto levels = run_length_recurrence(q_count, sigma_count, channel_count);
  const auto& last = levels.back();
  auto as_magnitude = [](const BoundValue& v) { return Magnitude{v.height(), v.top()}; };
  return to_bound(mul(as_magnitude(last.gamma), as_magnitude(last.inverse_alpha)));
}

BoundValue run_length_bound(const Machine& m) {
  const Machine n = normalize_empty_tests(m);
  return run_length_bound(n.state_count(), n.letter_count(), n.channel_count());
}

}  // namespace icm
