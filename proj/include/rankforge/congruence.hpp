#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rankforge {

/// Constraint on (x, y) parities implied by the parities of (b2, b4, b6),
/// from the four (a1, a3) cases.
enum class ParityRule { YEven, YOdd, YSameAsX, YDiffersFromX, Reject };

ParityRule table1_allowed(int b2_parity, int b4_parity, int b6_parity);

/// True if (x, y) parities satisfy the rule (Reject accepts nothing).
bool parity_rule_accepts(ParityRule rule, std::int64_t x, std::int64_t y);

/// Set of (b2, b4, b6) mod 8 triples, or every triple.
struct ClassSet {
    bool all = true;
    std::vector<std::array<int, 3>> triples;

    /// "all", "favorable", or triples "b2,b4,b6" separated by ';'.
    static ClassSet parse(std::string_view text);
    static ClassSet favorable();
    static ClassSet single(int b2, int b4, int b6);

    bool contains(std::int64_t b2, std::int64_t b4, std::int64_t b6) const;
    std::string to_string() const;
};

bool mod8_favorable(std::int64_t b2, std::int64_t b4, std::int64_t b6, const ClassSet& classes = ClassSet::favorable());

/// Bitmask over b6 mod 8 of residues a (b2, b4) slice may produce: b6 a
/// square mod 4, parities consistent with the table, triple in the class set.
unsigned allowed_b6_residues(std::int64_t b2, std::int64_t b4, const ClassSet& classes);

/// The full filter applied to a 2-torsion triple before it can be emitted.
bool passes_congruence_filters(std::int64_t b2, std::int64_t b4, std::int64_t b6, const ClassSet& classes);

} // namespace rankforge
