#include "flipwalk/combinatorics.hpp"
#include "flipwalk/error.hpp"

#include <cmath>
#include <numbers>

namespace flipwalk {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::EnumerationTooLarge: return "enumeration-too-large";
    case ErrorKind::TooLarge: return "too-large";
    case ErrorKind::LemmaViolation: return "lemma-violation";
    case ErrorKind::StructureMismatch: return "structure-mismatch";
    case ErrorKind::NoFlow: return "no-flow";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidDistribution: return "invalid-distribution";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::RangeExceeded: return "range-exceeded";
    case ErrorKind::SchemaMismatch: return "schema-mismatch";
    case ErrorKind::Usage: return "usage";
    }
    return "error";
}

BigCount binomial(unsigned long n, unsigned long k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigCount r = 1;
    // r stays integral after each division: r = binom(n-k+i, i)
    for (unsigned long i = 1; i <= k; ++i) {
        r *= n - k + i;
        mpz_divexact_ui(r.get_mpz_t(), r.get_mpz_t(), i);
    }
    return r;
}

BigCount catalan(unsigned long n) {
    BigCount b = binomial(2 * n, n);
    mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), n + 1);
    return b;
}

BigCount fuss_catalan(int k, unsigned long n) {
    if (k < 3) throw Error(ErrorKind::InvalidParameter, "fuss_catalan needs k >= 3");
    unsigned long km = static_cast<unsigned long>(k);
    BigCount b = binomial((km - 1) * n, n);
    mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), (km - 2) * n + 1);
    return b;
}

RealInterval log_fuss_catalan_bounds(int k, unsigned long n) {
    if (k < 3) throw Error(ErrorKind::InvalidParameter, "bounds need k >= 3");
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "bounds need n >= 1");
    const double kk = k, nn = static_cast<double>(n);
    const double logf = 0.5 * std::log(kk - 1) - 0.5 * std::log(2 * std::numbers::pi) -
                        1.5 * std::log((kk - 2) * nn) + (kk - 1) * nn * std::log(kk - 1) -
                        (kk - 2) * nn * std::log(kk - 2);
    return {logf - 1.0 / 6 + std::log((kk - 2) / (kk - 1)), logf + 1.0 / 12};
}

RealInterval fuss_catalan_bounds(int k, unsigned long n) {
    RealInterval l = log_fuss_catalan_bounds(k, n);
    RealInterval r{std::exp(l.lower), std::exp(l.upper)};
    if (!std::isfinite(r.upper) || !std::isfinite(r.lower))
        throw Error(ErrorKind::RangeExceeded, "bounds overflow double; use log_fuss_catalan_bounds");
    return r;
}

double log_count(const BigCount& x) {
    if (x <= 0) return -INFINITY;
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, x.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp) * std::numbers::ln2;
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace flipwalk
