#pragma once

#include <span>

namespace rankforge {

/// Low-conductor records, five per rank for ranks 5 to 11.
struct PublishedConductorRow {
    const char* curve;
    const char* conductor;
    const char* delta_over_n;
    unsigned integral_x;
    int rank;
};

/// Low-|discriminant| records, five per rank for ranks 5 to 10.
struct PublishedDiscriminantRow {
    const char* curve;
    const char* abs_discriminant;
    unsigned integral_x;
    int rank;
};

/// log N of the previous and the new rank records, ranks 6 to 11.
struct PublishedLogN {
    int rank;
    double old_value;
    double new_value;
};

/// Smallest known conductors for ranks 0 to 4.
struct SmallRankConductor {
    int rank;
    const char* conductor;
};

std::span<const PublishedConductorRow> published_conductor_records();
std::span<const PublishedDiscriminantRow> published_discriminant_records();
std::span<const PublishedLogN> published_log_n();
std::span<const SmallRankConductor> small_rank_conductors();

} // namespace rankforge
