#ifndef TRACTDYN_RATIONAL_HPP
#define TRACTDYN_RATIONAL_HPP

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace tractdyn {

using Rational = mpq_class;

/// Parses "p/q", "p" or a finite decimal such as "0.25" into a canonical rational.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; the denominator is always written, e.g. "1/1".
std::string format_rational(const Rational &value);

/// num/den in lowest terms (the two-argument mpq_class constructor does not
/// canonicalize).
inline Rational fraction(long num, long den) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational abs(const Rational &value) { return value < 0 ? Rational(-value) : value; }

} // namespace tractdyn

#endif
