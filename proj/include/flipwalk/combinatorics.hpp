#pragma once

#include <gmpxx.h>

namespace flipwalk {

using BigCount = mpz_class;
using Rational = mpq_class;

BigCount binomial(unsigned long n, unsigned long k);

// C_n = binom(2n, n) / (n + 1)
BigCount catalan(unsigned long n);

// C_{k,n} = binom((k-1)n, n) / ((k-2)n + 1); k = 3 gives catalan(n)
BigCount fuss_catalan(int k, unsigned long n);

struct RealInterval {
    double lower;
    double upper;
};

// Stirling-type sandwich lower <= C_{k,n} <= upper. Throws RangeExceeded when
// the doubles overflow; use the log variant then.
RealInterval fuss_catalan_bounds(int k, unsigned long n);
RealInterval log_fuss_catalan_bounds(int k, unsigned long n);

// natural log of an arbitrary-precision count, accurate far beyond double range
double log_count(const BigCount& x);

double to_double(const Rational& q);

}  // namespace flipwalk
