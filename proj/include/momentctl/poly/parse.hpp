#pragma once

#include <string_view>

#include "momentctl/poly/polynomial.hpp"

namespace momentctl::poly {

/// Parses the text form used in problem files and on the command line.
///
/// Variables are x1..xn and u1..um (plain `x`/`u` are accepted when n or m
/// is 1). Grammar: sums of products of numbers, variables, parenthesised
/// subexpressions and nonnegative integer powers; `*` may be omitted.
/// Examples: "x2 + 0.1*x1^3", "-0.3 u1", "(1 - u1)*(1 + u1)".
Polynomial parse_polynomial(std::string_view text, int n, int m);

}  // namespace momentctl::poly
