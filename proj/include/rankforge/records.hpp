#pragma once

#include "rankforge/curve.hpp"
#include "rankforge/factor.hpp"

#include <map>
#include <string>
#include <vector>

namespace rankforge {

struct CurveDossier {
    explicit CurveDossier(WeierstrassCurve c) : curve(std::move(c)) {}

    WeierstrassCurve curve; // minimal model
    Int conductor;
    Int abs_discriminant;
    Int delta_over_n;
    std::size_t integral_x = 0; // I
    int rank = 0;
    std::string provenance = "external";
};

/// Recomputes N and |Delta| for a curve and fills a dossier (I and r left to the caller).
CurveDossier make_dossier(const WeierstrassCurve& curve, FactorBudget budget = {});

struct DossierCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

/// Recomputes N, |Delta| and |Delta|/N; with points, also that they span rank >= r.
DossierCheck verify_dossier(const CurveDossier& dossier, const std::vector<RationalPoint>* points = nullptr,
                            FactorBudget budget = {});

class RecordTable {
public:
    static constexpr std::size_t kKeep = 5;

    /// Inserts into both orderings when within the best five; duplicates are ignored.
    /// Returns true when either ordering changed.
    bool insert(const CurveDossier& dossier);

    const std::vector<CurveDossier>& by_conductor(int rank) const;
    const std::vector<CurveDossier>& by_discriminant(int rank) const;
    std::vector<int> ranks() const;
    bool empty() const { return conductor_.empty(); }

private:
    std::map<int, std::vector<CurveDossier>> conductor_, discriminant_;
};

/// Dossiers built from the published low-conductor rows as printed (no recomputation).
std::vector<CurveDossier> published_conductor_dossiers();

RecordTable update_records(RecordTable table, const CurveDossier& dossier);

/// Natural log of the smallest conductor per rank.
std::map<int, double> lognew_row(const RecordTable& table);

/// (rank, N) pairs: the fixed small-rank conductors for ranks >= min_rank
/// below the table's ranks, followed by the table's per-rank minima.
std::vector<std::pair<int, Int>> growth_dataset(const RecordTable& table, int min_rank = 1);

enum class FitModel { Linear, Power };

struct FitResult {
    FitModel model = FitModel::Linear;
    double slope = 0.0;     // linear: r per unit of log N / log log N; power: exponent
    double intercept = 0.0; // linear: r at 0; power: log of the coefficient
    std::vector<int> ranks; // dataset used
};

/// Least squares of r against x = log N / log log N (linear), or of log r
/// against log x (power). Throws InsufficientData below three points or
/// when all x coincide.
FitResult growth_fit(const std::vector<std::pair<int, Int>>& data, FitModel model);

double log_n_over_log_log_n(const Int& N);

/// (1/2) (log N / log log N) (1 + log(8e) / log log N); DomainError for N <= e^e.
double grh_bsd_bound(const Int& N);

/// CSV of (rank, log N / log log N) with the linear fit and C sqrt(x) columns.
std::string plot_data(const std::vector<std::pair<int, Int>>& data, double murty_c = 1.0);

/// Markdown rendering of the conductor table, the discriminant table and the log N comparison.
std::string render_tables(const RecordTable& table);

} // namespace rankforge
