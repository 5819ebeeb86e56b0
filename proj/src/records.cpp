#include "rankforge/records.hpp"

#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"
#include "rankforge/published_tables.hpp"
#include "rankforge/tate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace rankforge {

namespace {

double log_int(const Int& n)
{
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

bool same_curve(const CurveDossier& a, const CurveDossier& b) { return a.curve == b.curve; }

template <class Less>
bool insert_sorted(std::vector<CurveDossier>& list, const CurveDossier& d, Less less)
{
    for (const auto& e : list)
        if (same_curve(e, d)) return false;
    auto it = std::upper_bound(list.begin(), list.end(), d, less);
    if (static_cast<std::size_t>(it - list.begin()) >= RecordTable::kKeep) return false;
    list.insert(it, d);
    if (list.size() > RecordTable::kKeep) list.pop_back();
    return true;
}

const std::vector<CurveDossier> kNoRecords;

} // namespace

CurveDossier make_dossier(const WeierstrassCurve& curve, FactorBudget budget)
{
    ConductorData cd = conductor(curve, budget);
    Invariants inv = full_invariants(curve);
    CurveDossier d(minimal_model(inv.c4, inv.c6));
    d.conductor = cd.conductor;
    d.abs_discriminant = abs(cd.minimal_discriminant);
    d.delta_over_n = cd.delta_over_n;
    return d;
}

DossierCheck verify_dossier(const CurveDossier& d, const std::vector<RationalPoint>* points, FactorBudget budget)
{
    DossierCheck out;
    auto fail = [&](std::string msg) {
        out.ok = false;
        out.problems.push_back(std::move(msg));
    };
    Invariants inv = full_invariants(d.curve);
    if (!(minimal_model(inv.c4, inv.c6) == d.curve)) fail("stored model is not the reduced minimal model");
    ConductorData cd = conductor(d.curve, budget);
    if (cd.conductor != d.conductor)
        fail("conductor " + to_string(d.conductor) + " recomputes as " + to_string(cd.conductor));
    if (abs(cd.minimal_discriminant) != d.abs_discriminant)
        fail("|Delta| " + to_string(d.abs_discriminant) + " recomputes as " + to_string(Int(abs(cd.minimal_discriminant))));
    if (cd.delta_over_n != d.delta_over_n)
        fail("|Delta|/N " + to_string(d.delta_over_n) + " recomputes as " + to_string(cd.delta_over_n));
    if (points) {
        RankAssessment ra = rank_lower_bound(d.curve, *points);
        if (ra.rank < d.rank)
            fail("points span rank " + std::to_string(ra.rank) + ", dossier claims " + std::to_string(d.rank));
    }
    return out;
}

bool RecordTable::insert(const CurveDossier& d)
{
    auto by_n = [](const CurveDossier& a, const CurveDossier& b) {
        if (a.conductor != b.conductor) return a.conductor < b.conductor;
        return a.curve < b.curve;
    };
    auto by_delta = [](const CurveDossier& a, const CurveDossier& b) {
        if (a.abs_discriminant != b.abs_discriminant) return a.abs_discriminant < b.abs_discriminant;
        return a.curve < b.curve;
    };
    bool a = insert_sorted(conductor_[d.rank], d, by_n);
    bool b = insert_sorted(discriminant_[d.rank], d, by_delta);
    return a || b;
}

const std::vector<CurveDossier>& RecordTable::by_conductor(int rank) const
{
    auto it = conductor_.find(rank);
    return it == conductor_.end() ? kNoRecords : it->second;
}

const std::vector<CurveDossier>& RecordTable::by_discriminant(int rank) const
{
    auto it = discriminant_.find(rank);
    return it == discriminant_.end() ? kNoRecords : it->second;
}

std::vector<int> RecordTable::ranks() const
{
    std::vector<int> out;
    for (const auto& [r, list] : conductor_)
        if (!list.empty()) out.push_back(r);
    return out;
}

std::vector<CurveDossier> published_conductor_dossiers()
{
    std::vector<CurveDossier> out;
    for (const auto& row : published_conductor_records()) {
        CurveDossier d(WeierstrassCurve::parse(row.curve));
        d.conductor = parse_int(row.conductor);
        d.delta_over_n = parse_int(row.delta_over_n);
        d.abs_discriminant = d.conductor * d.delta_over_n;
        d.integral_x = row.integral_x;
        d.rank = row.rank;
        d.provenance = "published";
        out.push_back(std::move(d));
    }
    return out;
}

RecordTable update_records(RecordTable table, const CurveDossier& dossier)
{
    table.insert(dossier);
    return table;
}

std::map<int, double> lognew_row(const RecordTable& table)
{
    std::map<int, double> out;
    for (int r : table.ranks()) out[r] = log_int(table.by_conductor(r).front().conductor);
    return out;
}

std::vector<std::pair<int, Int>> growth_dataset(const RecordTable& table, int min_rank)
{
    std::vector<std::pair<int, Int>> out;
    std::set<int> have;
    for (int r : table.ranks()) have.insert(r);
    for (const auto& s : small_rank_conductors())
        if (s.rank >= min_rank && !have.count(s.rank)) out.emplace_back(s.rank, parse_int(s.conductor));
    for (int r : table.ranks())
        if (r >= min_rank) out.emplace_back(r, table.by_conductor(r).front().conductor);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

double log_n_over_log_log_n(const Int& N)
{
    if (N <= 15) throw DomainError("log N / log log N needs N > e^e");
    const double l = log_int(N);
    return l / std::log(l);
}

FitResult growth_fit(const std::vector<std::pair<int, Int>>& data, FitModel model)
{
    FitResult out;
    out.model = model;
    std::vector<double> xs, ys;
    for (const auto& [r, N] : data) {
        double x = log_n_over_log_log_n(N);
        if (model == FitModel::Power) {
            if (r <= 0) throw DomainError("power fit needs positive ranks");
            xs.push_back(std::log(x));
            ys.push_back(std::log(static_cast<double>(r)));
        } else {
            xs.push_back(x);
            ys.push_back(r);
        }
        out.ranks.push_back(r);
    }
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 3) throw InsufficientData("growth fit needs at least three points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 1e-12 * n)) throw InsufficientData("growth fit is degenerate: all x values coincide");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    return out;
}

double grh_bsd_bound(const Int& N)
{
    if (N <= 15) throw DomainError("bound needs N > e^e");
    const double l = log_int(N), ll = std::log(l);
    return 0.5 * (l / ll) * (1.0 + std::log(8.0 * std::exp(1.0)) / ll);
}

std::string plot_data(const std::vector<std::pair<int, Int>>& data, double murty_c)
{
    std::ostringstream os;
    os << "rank,log_n,x,linear_fit,sqrt_reference\n";
    if (data.empty()) return os.str();
    FitResult fit;
    bool have_fit = true;
    try {
        fit = growth_fit(data, FitModel::Linear);
    } catch (const InsufficientData&) {
        have_fit = false;
    }
    char buf[160];
    for (const auto& [r, N] : data) {
        const double x = log_n_over_log_log_n(N);
        const double lin = have_fit ? fit.slope * x + fit.intercept : std::nan("");
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f\n", r, log_int(N), x, lin, murty_c * std::sqrt(x));
        os << buf;
    }
    return os.str();
}

std::string render_tables(const RecordTable& table)
{
    std::ostringstream os;
    os << "## Low conductor records\n\n| [a1,a2,a3,a4,a6] | N | abs(Delta)/N | I | r |\n|---|---:|---:|---:|---:|\n";
    for (int r : table.ranks())
        for (const auto& d : table.by_conductor(r))
            os << "| " << d.curve.to_string() << " | " << to_string(d.conductor) << " | " << to_string(d.delta_over_n)
               << " | " << d.integral_x << " | " << d.rank << " |\n";
    os << "\n## Low absolute discriminant records\n\n| [a1,a2,a3,a4,a6] | abs(Delta) | I | r |\n|---|---:|---:|---:|\n";
    for (int r : table.ranks())
        for (const auto& d : table.by_discriminant(r))
            os << "| " << d.curve.to_string() << " | " << to_string(d.abs_discriminant) << " | " << d.integral_x
               << " | " << d.rank << " |\n";
    os << "\n## log N for old and new rank records\n\n| r | old | new |\n|---:|---:|---:|\n";
    const auto logs = lognew_row(table);
    char buf[96];
    for (const auto& row : published_log_n()) {
        auto it = logs.find(row.rank);
        if (it == logs.end())
            std::snprintf(buf, sizeof buf, "| %d | %.3f | - |\n", row.rank, row.old_value);
        else
            std::snprintf(buf, sizeof buf, "| %d | %.3f | %.3f |\n", row.rank, row.old_value, it->second);
        os << buf;
    }
    return os.str();
}

} // namespace rankforge
