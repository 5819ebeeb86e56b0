#include "rankforge/congruence.hpp"

#include "rankforge/arith.hpp"
#include "rankforge/errors.hpp"

#include <sstream>

namespace rankforge {

ParityRule table1_allowed(int b2_parity, int b4_parity, int b6_parity)
{
    b2_parity &= 1;
    b4_parity &= 1;
    b6_parity &= 1;
    if (b2_parity == 0) {
        // a1 = 0: b4 is even, y has the parity of b6 (a3).
        if (b4_parity) return ParityRule::Reject;
        return b6_parity ? ParityRule::YOdd : ParityRule::YEven;
    }
    // a1 = 1: a3 = 0 gives (even, even), a3 = 1 gives (odd, odd).
    if (b4_parity != b6_parity) return ParityRule::Reject;
    return b4_parity ? ParityRule::YDiffersFromX : ParityRule::YSameAsX;
}

bool parity_rule_accepts(ParityRule rule, std::int64_t x, std::int64_t y)
{
    bool xo = (x & 1) != 0, yo = (y & 1) != 0;
    switch (rule) {
    case ParityRule::YEven: return !yo;
    case ParityRule::YOdd: return yo;
    case ParityRule::YSameAsX: return xo == yo;
    case ParityRule::YDiffersFromX: return xo != yo;
    case ParityRule::Reject: return false;
    }
    return false;
}

ClassSet ClassSet::favorable()
{
    ClassSet c;
    c.all = false;
    c.triples = {{1, 1, 1}, {1, 3, 1}, {5, 2, 4}, {5, 0, 0}, {0, 2, 1}, {0, 0, 0}, {4, 0, 1}};
    return c;
}

ClassSet ClassSet::single(int b2, int b4, int b6)
{
    ClassSet c;
    c.all = false;
    c.triples = {{b2 & 7, b4 & 7, b6 & 7}};
    return c;
}

ClassSet ClassSet::parse(std::string_view text)
{
    std::string s(text);
    if (s.empty() || s == "all") return {};
    if (s == "favorable") return favorable();
    ClassSet c;
    c.all = false;
    std::stringstream outer(s);
    std::string item;
    while (std::getline(outer, item, ';')) {
        std::array<int, 3> t{};
        std::stringstream inner(item);
        std::string num;
        int k = 0;
        while (std::getline(inner, num, ',')) {
            if (k >= 3) throw ParseError("class triple has more than three entries: " + item);
            t[k++] = static_cast<int>(pos_mod(std::stol(num), 8));
        }
        if (k != 3) throw ParseError("class triple needs three entries: " + item);
        c.triples.push_back(t);
    }
    return c;
}

bool ClassSet::contains(std::int64_t b2, std::int64_t b4, std::int64_t b6) const
{
    if (all) return true;
    std::array<int, 3> key{static_cast<int>(pos_mod(b2, 8)), static_cast<int>(pos_mod(b4, 8)),
                           static_cast<int>(pos_mod(b6, 8))};
    for (const auto& t : triples)
        if (t == key) return true;
    return false;
}

std::string ClassSet::to_string() const
{
    if (all) return "all";
    std::string out;
    for (const auto& t : triples) {
        if (!out.empty()) out += ';';
        out += std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]);
    }
    return out;
}

bool mod8_favorable(std::int64_t b2, std::int64_t b4, std::int64_t b6, const ClassSet& classes)
{
    return classes.contains(b2, b4, b6);
}

unsigned allowed_b6_residues(std::int64_t b2, std::int64_t b4, const ClassSet& classes)
{
    unsigned mask = 0;
    for (int r = 0; r < 8; ++r)
        if (passes_congruence_filters(b2, b4, r, classes)) mask |= 1u << r;
    return mask;
}

bool passes_congruence_filters(std::int64_t b2, std::int64_t b4, std::int64_t b6, const ClassSet& classes)
{
    std::int64_t r4 = pos_mod(b6, 4);
    if (r4 != 0 && r4 != 1) return false;
    if (table1_allowed(static_cast<int>(b2 & 1), static_cast<int>(b4 & 1), static_cast<int>(b6 & 1)) ==
        ParityRule::Reject)
        return false;
    return classes.contains(b2, b4, b6);
}

} // namespace rankforge
