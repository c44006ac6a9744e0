#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace krf {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "p", "p/q", "-p/q" or a finite decimal such as "1.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// "p/q" in lowest terms, or "p" when q = 1.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

}  // namespace krf
