#include "rankforge/factor.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace rankforge {

namespace {

const std::vector<unsigned long>& small_primes(unsigned long bound)
{
    static std::mutex mu;
    static std::vector<unsigned long> primes;
    static unsigned long sieved = 0;
    std::lock_guard<std::mutex> lock(mu);
    if (bound > sieved) {
        std::vector<bool> composite(bound + 1, false);
        primes.clear();
        for (unsigned long i = 2; i <= bound; ++i) {
            if (composite[i]) continue;
            primes.push_back(i);
            for (unsigned long j = i * i; j <= bound; j += i) composite[j] = true;
        }
        sieved = bound;
    }
    return primes;
}

bool miller_rabin_round(const Int& n, const Int& nm1, const Int& d, unsigned s, const Int& a)
{
    Int x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == nm1) return true;
    for (unsigned i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == nm1) return true;
        if (x == 1) return false;
    }
    return false;
}

// Brent's variant with batched gcds. Returns a nontrivial factor or 0.
Int pollard_brent(const Int& n, std::uint64_t& budget, unsigned long seed)
{
    if (mpz_even_p(n.get_mpz_t())) return 2;
    Int c = seed, y = 2 + seed, x, ys, q = 1, g = 1;
    const std::uint64_t m = 128;
    std::uint64_t r = 1;
    auto f = [&](const Int& v) { return Int((v * v + c) % n); };
    while (g == 1) {
        x = y;
        for (std::uint64_t i = 0; i < r; ++i) y = f(y);
        std::uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            std::uint64_t lim = std::min(m, r - k);
            for (std::uint64_t i = 0; i < lim; ++i) {
                y = f(y);
                Int diff = x - y;
                q = q * abs(diff) % n;
            }
            mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            k += lim;
            if (lim > budget) return 0;
            budget -= lim;
        }
        r *= 2;
    }
    if (g == n) {
        // Backtrack one step at a time from the saved position.
        do {
            ys = f(ys);
            Int diff = x - ys;
            mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
            g = abs(g);
        } while (g == 1);
    }
    if (g == n || g == 1) return 0;
    return g;
}

void split(const Int& n, std::map<Int, unsigned>& out, std::vector<Int>& stuck, std::uint64_t& budget)
{
    if (n == 1) return;
    if (is_probable_prime(n)) {
        out[n] += 1;
        return;
    }
    if (mpz_perfect_power_p(n.get_mpz_t())) {
        for (unsigned long k = 2;; ++k) {
            Int root;
            if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
                std::map<Int, unsigned> inner;
                split(root, inner, stuck, budget);
                for (auto& [p, e] : inner) out[p] += e * static_cast<unsigned>(k);
                return;
            }
            if (Int(1) << k > n) break;
        }
    }
    for (unsigned long seed = 1; seed < 32 && budget > 0; ++seed) {
        Int d = pollard_brent(n, budget, seed);
        if (d != 0) {
            split(d, out, stuck, budget);
            split(n / d, out, stuck, budget);
            return;
        }
    }
    stuck.push_back(n);
}

} // namespace

IncompleteFactorization::IncompleteFactorization(Factorization f)
    : Error("incomplete factorization: unsplit cofactor " + to_string(f.cofactor)), partial(std::move(f))
{
}

Int Factorization::product() const
{
    Int r = cofactor;
    for (const auto& pp : factors) r *= ipow(pp.p, pp.e);
    return sign < 0 ? Int(-r) : r;
}

std::vector<Int> Factorization::primes() const
{
    std::vector<Int> r;
    r.reserve(factors.size());
    for (const auto& pp : factors) r.push_back(pp.p);
    return r;
}

bool is_probable_prime(const Int& n)
{
    if (n < 2) return false;
    static const unsigned long bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
    for (unsigned long p : bases) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }
    Int nm1 = n - 1, d = nm1;
    unsigned s = static_cast<unsigned>(mpz_scan1(d.get_mpz_t(), 0));
    d >>= s;
    static const Int deterministic_limit("3317044064679887385961981");
    if (n < deterministic_limit) {
        for (unsigned long b : bases)
            if (!miller_rabin_round(n, nm1, d, s, Int(b))) return false;
        return true;
    }
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(0x5eed);
    for (int i = 0; i < 64; ++i) {
        Int a = rng.get_z_range(n - 3) + 2;
        if (!miller_rabin_round(n, nm1, d, s, a)) return false;
    }
    return true;
}

Factorization factor_partial(const Int& n, FactorBudget budget)
{
    if (n == 0) throw DomainError("cannot factor zero");
    Factorization result;
    result.sign = n < 0 ? -1 : 1;
    Int m = abs(n);
    std::map<Int, unsigned> found;
    for (unsigned long p : small_primes(budget.trial_bound)) {
        if (Int(p) * p > m) break;
        if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
                mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
                ++e;
            }
            found[Int(p)] = e;
        }
    }
    std::vector<Int> stuck;
    std::uint64_t iterations = budget.rho_iterations;
    split(m, found, stuck, iterations);
    for (auto& [p, e] : found) result.factors.push_back({p, e});
    for (const auto& c : stuck) result.cofactor *= c;
    return result;
}

Factorization factor(const Int& n, FactorBudget budget)
{
    Factorization f = factor_partial(n, budget);
    if (!f.complete()) throw IncompleteFactorization(std::move(f));
    return f;
}

} // namespace rankforge
