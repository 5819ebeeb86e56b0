// rankforge: command-line front end for searches, point inventories,
// rank bounds and record tables.

#include "rankforge/catch_rate.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"
#include "rankforge/pipeline.hpp"
#include "rankforge/points.hpp"
#include "rankforge/published_tables.hpp"
#include "rankforge/records.hpp"
#include "rankforge/serialize.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace rankforge;

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

// Accepts "1000000" or "1e6"; the value must be a positive integer.
std::int64_t parse_count(const std::string& text, const char* what)
{
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (pos == text.size() && v > 0) return v;
        double d = std::stod(text, &pos);
        if (pos == text.size() && d >= 1 && d < 9.2e18 && std::floor(d) == d) return static_cast<std::int64_t>(d);
    } catch (const std::exception&) {
    }
    throw ParseError(std::string(what) + " must be a positive integer, got '" + text + "'");
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

std::vector<RationalPoint> load_points(const WeierstrassCurve& curve, const fs::path& path)
{
    std::vector<RationalPoint> out;
    read_jsonl(path, [&](const Json& j) {
        IntegralPoint p = point_from_json(j);
        RationalPoint q(Rat(p.x), Rat(p.y));
        if (!is_on_curve(curve, q)) throw PointNotOnCurve("(" + to_string(p.x) + ", " + to_string(p.y) + ") is not on " + curve.to_string());
        out.push_back(q);
    });
    return out;
}

std::vector<CurveDossier> load_dossiers(const std::vector<std::string>& files)
{
    std::vector<CurveDossier> out;
    for (const auto& f : files) read_jsonl(f, [&](const Json& j) { out.push_back(dossier_from_json(j)); });
    return out;
}

struct SearchArgs {
    std::string h, b2, classes, threshold, b4_min, b4_max, U, L, phase1, partition, x_bound, m, min_count;
    bool positive_b4 = false, negative_b6 = false;
    std::string config_file, out = "candidates.jsonl", checkpoint;
    bool verify = false;
    std::uint64_t stop_after = 0;
};

void add_search_options(CLI::App* cmd, SearchArgs& a, bool pair)
{
    cmd->add_option("--config", a.config_file, "key=value config file; explicit flags override it");
    cmd->add_option("--h", a.h, "box height h");
    cmd->add_option("--b2", a.b2, "b2 in {-4,-3,0,1,4,5}");
    cmd->add_option("--classes", a.classes, "'all', 'favorable' or b2,b4,b6 mod 8 triples separated by ';'");
    cmd->add_option("--threshold", a.threshold, "minimum number of box points");
    cmd->add_option("--b4-min", a.b4_min);
    cmd->add_option("--b4-max", a.b4_max);
    cmd->add_flag("--allow-positive-b4", a.positive_b4);
    cmd->add_flag("--allow-negative-b6", a.negative_b6);
    if (pair) {
        cmd->add_option("--U", a.U, "W bound divisor: |W| <= 2h^4/U");
        cmd->add_option("--L", a.L, "phase-1 counter bits (0 = default)");
        cmd->add_option("--phase1-threshold", a.phase1);
    }
    cmd->add_option("--partition-size", a.partition, "b4 slices per checkpoint partition");
    cmd->add_option("--out", a.out, "merged candidates (JSON lines)");
    cmd->add_option("--checkpoint", a.checkpoint, "run directory holding the manifest, parts and logs");
    cmd->add_flag("--verify", a.verify, "continue to dossiers for every candidate");
    cmd->add_option("--xbound", a.x_bound, "sieve bound used by --verify");
    cmd->add_option("--m", a.m, "combination bound used by --verify");
    cmd->add_option("--verify-min-count", a.min_count, "verify only candidates with at least this many points");
    cmd->add_option("--stop-after", a.stop_after, "stop after this many b4 slices (resume later)")->group("");
}

RunConfig build_config(const SearchArgs& a, SearchMethod method)
{
    RunConfig c;
    if (!a.config_file.empty()) c = RunConfig::parse_key_values(slurp(a.config_file));
    c.method = method;
    // Flags go through the same key=value parser so both paths validate alike.
    std::ostringstream kv;
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) kv << key << " = " << v << '\n';
    };
    put("h", a.h);
    put("b2", a.b2);
    put("classes", a.classes);
    put("threshold", a.threshold);
    put("b4_min", a.b4_min);
    put("b4_max", a.b4_max);
    put("U", a.U);
    put("L", a.L);
    put("phase1_threshold", a.phase1);
    put("partition_size", a.partition);
    if (!a.x_bound.empty()) put("x_bound", std::to_string(parse_count(a.x_bound, "--xbound")));
    put("m", a.m);
    put("verify_min_count", a.min_count);
    if (a.positive_b4) put("allow_positive_b4", "true");
    if (a.negative_b6) put("allow_negative_b6", "true");
    RunConfig flags = RunConfig::parse_key_values(c.to_key_values() + kv.str());
    flags.method = method;
    flags.validate();
    return flags;
}

Json catch_rate_estimates(const std::vector<CandidateCurve>& cands, const PairSearchConfig& cfg)
{
    // Measured on the highest-count candidates only; each costs O(points^2).
    std::vector<const CandidateCurve*> best;
    for (const auto& c : cands) best.push_back(&c);
    std::sort(best.begin(), best.end(), [](auto* l, auto* r) { return l->count > r->count || (l->count == r->count && *l < *r); });
    if (best.size() > 5) best.resize(5);
    Json out = Json::array();
    for (const auto* c : best) {
        CatchRateRow row = measure_catch_rate(c->model, cfg.base.h, {cfg.U});
        out.push_back(Json{{"model", c->model.to_string()},
                           {"points", row.points},
                           {"quadruples", row.quadruples},
                           {"in_range_fraction", row.in_range_fraction()},
                           {"w_catch", row.w_catch(0)},
                           {"quadruple_catch", row.quadruple_catch(0)}});
    }
    return out;
}

int run_search(const SearchArgs& a, SearchMethod method)
{
    RunConfig cfg = build_config(a, method);
    const fs::path dir = a.checkpoint.empty() ? fs::path(a.out + ".run") : fs::path(a.checkpoint);
    RunControl ctl;
    ctl.verify = a.verify;
    ctl.stop_after_slices = a.stop_after;
    RunSummary s = run_pipeline(cfg, dir, ctl);
    Json summary{{"run_dir", dir.string()},
                 {"config_hash", cfg.hash()},
                 {"partitions", s.partitions},
                 {"partitions_done", s.partitions_done},
                 {"candidates", s.candidates},
                 {"search_complete", s.search_complete}};
    if (!s.search_complete) {
        summary["status"] = "interrupted";
        std::cout << summary.dump() << '\n';
        return kPartial;
    }
    fs::copy_file(dir / "candidates.jsonl", a.out, fs::copy_options::overwrite_existing);
    if (method == SearchMethod::Pair) {
        Json stats = Json::parse(slurp(dir / "stats.json"));
        stats["catch_rate_estimates"] = catch_rate_estimates(read_candidates(dir), cfg.search);
        emit_text(a.out + ".stats.json", stats.dump(1) + "\n");
    }
    if (a.verify) {
        summary["dossiers"] = s.dossiers;
        summary["failures"] = s.failures;
        summary["dossier_file"] = (dir / "dossiers.jsonl").string();
    }
    summary["status"] = s.failures ? "partial" : "ok";
    std::cout << summary.dump() << '\n';
    return s.failures ? kPartial : kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rank records for elliptic curves with two-torsion models"};
    app.require_subcommand(1);
    // "-h" would collide with "--h"; subcommands inherit this setting.
    app.set_help_flag("--help", "print help and exit");
    std::string run_dir;
    bool echo = false;
    app.add_option("--run-dir", run_dir, "directory for log.jsonl (points, rank, verify, records, fit)");
    app.add_flag("--log-stderr", echo, "mirror structured log records to stderr");

    SearchArgs direct_args, pair_args;
    auto* direct = app.add_subcommand("search-direct", "count box points per (b4, b6)");
    add_search_options(direct, direct_args, false);
    auto* pair = app.add_subcommand("search-pair", "two-phase search over pairs of box points");
    add_search_options(pair, pair_args, true);

    std::string curve_text, xbound = "1e9", points_out = "points.jsonl";
    unsigned m = 3;
    auto* points = app.add_subcommand("points", "integral point inventory of one curve");
    points->add_option("--curve", curve_text, "[a1,a2,a3,a4,a6]")->required();
    points->add_option("--xbound", xbound, "sieve bound on |x|");
    points->add_option("--m", m, "coefficient bound for combinations");
    points->add_option("--out", points_out, "points as JSON lines ('-' for stdout)");

    std::string rank_curve, rank_points, rank_out, rank_xbound = "1e6";
    auto* rank = app.add_subcommand("rank", "rank lower bound from a point set");
    rank->add_option("--curve", rank_curve, "[a1,a2,a3,a4,a6]")->required();
    rank->add_option("--points", rank_points, "points as JSON lines; without it an inventory is computed");
    rank->add_option("--xbound", rank_xbound, "sieve bound when no point file is given");
    rank->add_option("--m", m, "combination bound when no point file is given");
    rank->add_option("--out", rank_out, "JSON report path (stdout by default)");

    std::vector<std::string> load;
    std::string emit;
    bool published = false, check = false;
    auto* records = app.add_subcommand("records", "record tables from dossier logs");
    records->add_option("--load", load, "dossier JSON-lines files")->check(CLI::ExistingFile);
    records->add_flag("--published", published, "include the published low-conductor rows");
    records->add_flag("--check", check, "recompute N and |Delta| for every loaded dossier");
    records->add_option("--emit", emit, "markdown output (stdout by default)");

    std::vector<std::string> fit_load;
    std::string fit_emit;
    int min_rank = 1;
    double murty_c = 1.0;
    auto* fit = app.add_subcommand("fit", "growth fit of rank against log N / log log N");
    fit->add_option("--load", fit_load, "dossier JSON-lines files; the published rows when omitted")
        ->check(CLI::ExistingFile);
    fit->add_option("--min-rank", min_rank, "smallest rank in the dataset");
    fit->add_option("--sqrt-c", murty_c, "constant of the C sqrt(x) reference column");
    fit->add_option("--emit", fit_emit, "CSV output (stdout by default)");

    std::vector<std::string> verify_curves;
    std::string verify_xbound = "1e6", verify_out;
    auto* verify = app.add_subcommand("verify", "re-derive a dossier from a bare curve");
    verify->add_option("--curve", verify_curves, "[a1,a2,a3,a4,a6], repeatable")->required()->allow_extra_args(false);
    verify->add_option("--xbound", verify_xbound, "sieve bound on |x|");
    verify->add_option("--m", m, "coefficient bound for combinations");
    verify->add_option("--out", verify_out, "append dossiers to this JSON-lines file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kFatal;
    }

    RunLog log;
    std::optional<RunLog> file_log;
    if (!run_dir.empty()) {
        fs::create_directories(run_dir);
        file_log.emplace(fs::path(run_dir) / "log.jsonl", echo);
    }
    RunLog& L = file_log ? *file_log : log;

    try {
        if (*direct) return run_search(direct_args, SearchMethod::Direct);
        if (*pair) return run_search(pair_args, SearchMethod::Pair);

        if (*points) {
            const auto curve = WeierstrassCurve::parse(curve_text);
            const auto X = parse_count(xbound, "--xbound");
            PointInventory inv = inventory(curve, X, m);
            std::vector<Json> lines;
            for (const auto& p : inv.points) lines.push_back(to_json(p));
            if (points_out == "-")
                for (const auto& j : lines) std::cout << j.dump() << '\n';
            else
                write_jsonl(points_out, lines);
            Json summary{{"curve", inv.curve.to_string()}, {"I", inv.I()},      {"x_bound", X},
                         {"m", m},                         {"from_sieve", inv.from_sieve},
                         {"from_combinations", inv.from_combinations}};
            Json gens = Json::array();
            for (const auto& g : inv.generators) gens.push_back(g.to_string());
            summary["generators"] = gens;
            L.write("info", "points", "inventory", summary);
            if (points_out != "-") std::cout << summary.dump() << '\n';
            return kOk;
        }

        if (*rank) {
            const auto curve = WeierstrassCurve::parse(rank_curve);
            std::vector<RationalPoint> pts;
            if (!rank_points.empty())
                pts = load_points(curve, rank_points);
            else
                pts = inventory(curve, parse_count(rank_xbound, "--xbound"), m).rational_points();
            RankAssessment ra = rank_lower_bound(curve, pts);
            Json report = to_json(ra);
            L.write("info", "rank", "assessment", {{"curve", curve.to_string()}, {"rank_lb", ra.rank}});
            emit_text(rank_out, report.dump(1) + "\n");
            return kOk;
        }

        if (*records) {
            std::vector<CurveDossier> ds = load_dossiers(load);
            if (published) {
                auto pub = published_conductor_dossiers();
                ds.insert(ds.end(), pub.begin(), pub.end());
            }
            std::size_t bad = 0;
            RecordTable table;
            for (const auto& d : ds) {
                if (check && d.provenance != "published") {
                    DossierCheck c = verify_dossier(d);
                    if (!c.ok) {
                        ++bad;
                        Json probs = c.problems;
                        L.write("warn", "records", "dossier failed recomputation",
                                {{"curve", d.curve.to_string()}, {"problems", probs}});
                        continue;
                    }
                }
                table.insert(d);
            }
            emit_text(emit, render_tables(table));
            L.write("info", "records", "tables", {{"dossiers", ds.size()}, {"rejected", bad}});
            return bad ? kPartial : kOk;
        }

        if (*fit) {
            RecordTable table;
            for (const auto& d : fit_load.empty() ? published_conductor_dossiers() : load_dossiers(fit_load))
                table.insert(d);
            auto data = growth_dataset(table, min_rank);
            emit_text(fit_emit, plot_data(data, murty_c));
            FitResult lin = growth_fit(data, FitModel::Linear);
            FitResult pow = growth_fit(data, FitModel::Power);
            Json bound = Json::array();
            bool bound_ok = true;
            for (const auto& [r, N] : data) {
                const double b = grh_bsd_bound(N);
                bound_ok = bound_ok && b >= r;
                bound.push_back(Json{{"rank", r}, {"conductor", to_string(N)}, {"bound", b}});
            }
            Json summary{{"points", data.size()},
                         {"linear", {{"slope", lin.slope}, {"intercept", lin.intercept}}},
                         {"power", {{"exponent", pow.slope}, {"log_coefficient", pow.intercept}}},
                         {"grh_bsd_bound", bound},
                         {"bound_holds", bound_ok}};
            L.write("info", "fit", "growth fit", summary);
            (fit_emit.empty() || fit_emit == "-" ? std::cerr : std::cout) << summary.dump() << '\n';
            return kOk;
        }

        if (*verify) {
            const auto X = parse_count(verify_xbound, "--xbound");
            std::size_t bad = 0;
            for (const auto& text : verify_curves) {
                try {
                    VerifiedCurve v = verify_curve(WeierstrassCurve::parse(text), X, m, "verify");
                    Json j = to_json(v.dossier);
                    std::cout << j.dump() << '\n';
                    if (!verify_out.empty()) append_jsonl(verify_out, j);
                    L.write("info", "verify", "dossier", {{"curve", v.dossier.curve.to_string()}, {"rank", v.dossier.rank}});
                } catch (const Error& e) {
                    ++bad;
                    L.write("warn", "verify", e.what(), {{"curve", text}});
                    std::cerr << "verify " << text << ": " << e.what() << '\n';
                }
            }
            return bad ? kPartial : kOk;
        }
    } catch (const Error& e) {
        std::cerr << "rankforge: " << e.what() << '\n';
        L.write("error", "main", e.what());
        return kFatal;
    } catch (const std::exception& e) {
        std::cerr << "rankforge: " << e.what() << '\n';
        return kFatal;
    }
    return kOk;
}
