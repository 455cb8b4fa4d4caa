#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace paraverse {

// Exact rational arithmetic. mpq_class keeps values canonical (lowest terms,
// positive denominator), which is exactly the invariant we need; nothing in
// any decision path ever touches floating point.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Renders "num/den", or just "num" for integral values.
std::string rat_to_string(const Rational& q);

// Accepts "3", "-3", "3/10", "0.3", "-1.25". Decimals are read exactly
// (0.3 becomes 3/10). Returns nullopt on malformed input.
std::optional<Rational> rat_parse(const std::string& text);

// Largest integer <= q / smallest integer >= q.
Integer rat_floor(const Rational& q);
Integer rat_ceil(const Rational& q);

}  // namespace paraverse
