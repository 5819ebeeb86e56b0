#pragma once

#include "rankforge/arith.hpp"
#include "rankforge/errors.hpp"

#include <cstdint>
#include <vector>

namespace rankforge {

struct PrimePower {
    Int p;
    unsigned e = 0;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Sorted prime powers times an optional cofactor that could not be split
/// within the budget. The product of all parts (with the sign of the input)
/// always equals the factored number.
struct Factorization {
    int sign = 1;
    std::vector<PrimePower> factors;
    Int cofactor = 1;

    bool complete() const { return cofactor == 1; }
    Int product() const;
    std::vector<Int> primes() const;
};

struct FactorBudget {
    std::uint64_t rho_iterations = 100'000'000;
    unsigned long trial_bound = 1'000'000;
};

struct IncompleteFactorization : Error {
    Factorization partial;
    explicit IncompleteFactorization(Factorization f);
};

/// Miller-Rabin. Deterministic (first 13 prime bases) below 3.3e24,
/// otherwise 64 pseudo-random bases from a fixed seed.
bool is_probable_prime(const Int& n);

/// Trial division to budget.trial_bound, then Pollard-Brent rho.
/// Throws IncompleteFactorization with the partial result if a composite
/// survives the rho budget. n must be nonzero.
Factorization factor(const Int& n, FactorBudget budget = {});

/// Same as factor() but returns the partial result instead of throwing.
Factorization factor_partial(const Int& n, FactorBudget budget = {});

} // namespace rankforge
