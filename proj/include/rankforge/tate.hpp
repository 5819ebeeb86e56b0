#pragma once

#include "rankforge/curve.hpp"
#include "rankforge/factor.hpp"

#include <string>
#include <vector>

namespace rankforge {

enum class Kodaira { I0, In, II, III, IV, I0Star, InStar, IVStar, IIIStar, IIStar };

struct KodairaSymbol {
    Kodaira type = Kodaira::I0;
    unsigned n = 0; // subscript for In and In*
    std::string to_string() const;
    friend bool operator==(const KodairaSymbol&, const KodairaSymbol&) = default;
};

struct LocalData {
    Int p;
    unsigned conductor_exponent = 0;
    unsigned discriminant_valuation = 0; // at p, on the locally minimal model
    KodairaSymbol kodaira;
    bool input_was_minimal = true;
};

/// Tate's algorithm at a single prime. Works on any integral model; when the
/// model is not minimal at p it is rescaled and the flag is cleared.
LocalData tate_local(const WeierstrassCurve& curve, const Int& p);

struct ConductorData {
    Int conductor;
    Int delta_over_n;          // |Delta_min| / N
    Int minimal_discriminant;  // signed
    std::vector<LocalData> locals;
};

/// Conductor from the global minimal model of `curve`. Propagates
/// IncompleteFactorization when the discriminant cannot be factored.
ConductorData conductor(const WeierstrassCurve& curve, FactorBudget budget = {});

} // namespace rankforge
