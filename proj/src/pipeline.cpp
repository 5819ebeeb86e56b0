#include "rankforge/pipeline.hpp"

#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace rankforge {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_i64(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("config key '" + key + "' expects an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string now_iso()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save_json_atomic(const fs::path& path, const Json& j)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << j.dump(1) << '\n';
    }
    fs::rename(tmp, path);
}

Json load_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

Json stats_json(const PairStats& s)
{
    return Json{{"b4_slices", s.b4_slices},
                {"quadruples", s.quadruples},
                {"classes_verified", s.classes_verified},
                {"candidates", s.candidates}};
}

PairStats stats_from_json(const Json& j)
{
    PairStats s;
    s.b4_slices = j.value("b4_slices", std::uint64_t{0});
    s.quadruples = j.value("quadruples", std::uint64_t{0});
    s.classes_verified = j.value("classes_verified", std::uint64_t{0});
    s.candidates = j.value("candidates", std::uint64_t{0});
    return s;
}

fs::path part_path(const fs::path& dir, std::size_t i)
{
    char name[32];
    std::snprintf(name, sizeof name, "part-%06zu.jsonl", i);
    return dir / "parts" / name;
}

struct Partition {
    std::vector<std::int64_t> b4;
    std::optional<std::int64_t> cursor; // last completed b4
    bool done = false;
    std::uint64_t bytes = 0;
    std::uint64_t candidates = 0;
    PairStats stats;
};

struct Manifest {
    std::string hash;
    std::string config_text;
    std::vector<Partition> parts;
    bool search_complete = false;
    bool verified = false;
    double wall_seconds = 0;
    std::size_t dossiers = 0;
    std::size_t failures = 0;

    Json to_json() const
    {
        Json ps = Json::array();
        for (const auto& p : parts) {
            Json e{{"b4_lo", p.b4.front()},
                   {"b4_hi", p.b4.back()},
                   {"slices", p.b4.size()},
                   {"cursor", p.cursor ? Json(*p.cursor) : Json(nullptr)},
                   {"done", p.done},
                   {"bytes", p.bytes},
                   {"candidates", p.candidates},
                   {"stats", stats_json(p.stats)}};
            ps.push_back(e);
        }
        return Json{{"version", 1},
                    {"config_hash", hash},
                    {"config", config_text},
                    {"partitions", ps},
                    {"search_complete", search_complete},
                    {"verified", verified},
                    {"dossiers", dossiers},
                    {"failures", failures},
                    {"wall_seconds", wall_seconds}};
    }
};

std::vector<std::int64_t> slice_values(const RunConfig& cfg)
{
    return direct_b4_values(cfg.search.base);
}

Manifest fresh_manifest(const RunConfig& cfg)
{
    Manifest m;
    m.hash = cfg.hash();
    m.config_text = cfg.to_key_values();
    const auto values = slice_values(cfg);
    for (std::size_t i = 0; i < values.size(); i += static_cast<std::size_t>(cfg.partition_size)) {
        Partition p;
        const std::size_t end = std::min(values.size(), i + static_cast<std::size_t>(cfg.partition_size));
        p.b4.assign(values.begin() + static_cast<long>(i), values.begin() + static_cast<long>(end));
        m.parts.push_back(std::move(p));
    }
    return m;
}

Manifest load_manifest(const fs::path& path, const RunConfig& cfg)
{
    Json j = load_json(path);
    Manifest m = fresh_manifest(cfg);
    if (j.at("config_hash").get<std::string>() != m.hash)
        throw ConfigMismatch("run directory was created with config hash " + j.at("config_hash").get<std::string>() +
                             ", current config hashes to " + m.hash);
    const Json& ps = j.at("partitions");
    if (ps.size() != m.parts.size()) throw ConfigMismatch("partition map differs from the stored manifest");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Partition& p = m.parts[i];
        if (!ps[i].at("cursor").is_null()) p.cursor = ps[i].at("cursor").get<std::int64_t>();
        p.done = ps[i].at("done").get<bool>();
        p.bytes = ps[i].at("bytes").get<std::uint64_t>();
        p.candidates = ps[i].at("candidates").get<std::uint64_t>();
        p.stats = stats_from_json(ps[i].at("stats"));
    }
    m.search_complete = j.value("search_complete", false);
    m.verified = j.value("verified", false);
    m.wall_seconds = j.value("wall_seconds", 0.0);
    m.dossiers = j.value("dossiers", std::size_t{0});
    m.failures = j.value("failures", std::size_t{0});
    return m;
}

std::string provenance_of(const RunConfig& cfg)
{
    std::string p = cfg.method == SearchMethod::Direct ? "direct" : "pair";
    p += " h=" + std::to_string(cfg.search.base.h) + " b2=" + std::to_string(cfg.search.base.b2);
    if (cfg.method == SearchMethod::Pair) p += " U=" + std::to_string(cfg.search.U);
    return p;
}

RunSummary summarize(const Manifest& m)
{
    RunSummary s;
    s.partitions = m.parts.size();
    for (const auto& p : m.parts) {
        s.partitions_done += p.done ? 1 : 0;
        s.candidates += p.candidates;
        s.pair_stats += p.stats;
    }
    s.search_complete = m.search_complete;
    s.dossiers = m.dossiers;
    s.failures = m.failures;
    s.complete = m.search_complete && m.verified;
    return s;
}

} // namespace

std::string RunConfig::to_key_values() const
{
    const SearchConfig& b = search.base;
    std::ostringstream os;
    os << "method = " << (method == SearchMethod::Direct ? "direct" : "pair") << '\n'
       << "h = " << b.h << '\n'
       << "b2 = " << b.b2 << '\n'
       << "classes = " << b.classes.to_string() << '\n'
       << "threshold = " << b.threshold << '\n'
       << "b4_min = " << (b.b4_min ? std::to_string(*b.b4_min) : "") << '\n'
       << "b4_max = " << (b.b4_max ? std::to_string(*b.b4_max) : "") << '\n'
       << "allow_positive_b4 = " << (b.allow_positive_b4 ? "true" : "false") << '\n'
       << "allow_negative_b6 = " << (b.allow_negative_b6 ? "true" : "false") << '\n'
       << "U = " << search.U << '\n'
       << "L = " << search.L << '\n'
       << "phase1_threshold = " << search.phase1_threshold << '\n'
       << "partition_size = " << partition_size << '\n'
       << "x_bound = " << x_bound << '\n'
       << "m = " << m << '\n'
       << "verify_min_count = " << verify_min_count << '\n';
    return os.str();
}

RunConfig RunConfig::parse_key_values(std::string_view text)
{
    RunConfig c;
    SearchConfig& b = c.search.base;
    std::istringstream in{std::string(text)};
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config line " + std::to_string(n) + " lacks '='");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string v = trim(std::string_view(line).substr(eq + 1));
        if (key == "method") {
            if (v == "direct")
                c.method = SearchMethod::Direct;
            else if (v == "pair")
                c.method = SearchMethod::Pair;
            else
                throw ParseError("method must be direct or pair");
        } else if (key == "h") {
            b.h = parse_i64(key, v);
        } else if (key == "b2") {
            b.b2 = parse_i64(key, v);
        } else if (key == "classes") {
            b.classes = ClassSet::parse(v);
        } else if (key == "threshold") {
            b.threshold = static_cast<unsigned>(parse_i64(key, v));
        } else if (key == "b4_min") {
            b.b4_min = v.empty() ? std::nullopt : std::optional<std::int64_t>(parse_i64(key, v));
        } else if (key == "b4_max") {
            b.b4_max = v.empty() ? std::nullopt : std::optional<std::int64_t>(parse_i64(key, v));
        } else if (key == "allow_positive_b4") {
            b.allow_positive_b4 = parse_bool(key, v);
        } else if (key == "allow_negative_b6") {
            b.allow_negative_b6 = parse_bool(key, v);
        } else if (key == "U") {
            c.search.U = parse_i64(key, v);
        } else if (key == "L") {
            c.search.L = static_cast<unsigned>(parse_i64(key, v));
        } else if (key == "phase1_threshold") {
            c.search.phase1_threshold = static_cast<unsigned>(parse_i64(key, v));
        } else if (key == "partition_size") {
            c.partition_size = parse_i64(key, v);
        } else if (key == "x_bound") {
            c.x_bound = parse_i64(key, v);
        } else if (key == "m") {
            c.m = static_cast<unsigned>(parse_i64(key, v));
        } else if (key == "verify_min_count") {
            c.verify_min_count = static_cast<unsigned>(parse_i64(key, v));
        } else {
            throw ParseError("unknown config key '" + key + "'");
        }
    }
    return c;
}

std::string RunConfig::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_key_values()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void RunConfig::validate() const
{
    if (method == SearchMethod::Pair)
        search.validate();
    else
        search.base.validate();
    if (partition_size < 1) throw DomainError("partition_size must be positive");
    if (x_bound < 1) throw DomainError("x_bound must be positive");
}

RunLog::RunLog(const fs::path& file, bool echo) : file_(file), echo_(echo) {}

void RunLog::write(const std::string& level, const std::string& stage, const std::string& message, Json extra)
{
    Json rec{{"ts", now_iso()}, {"level", level}, {"stage", stage}, {"msg", message}};
    if (extra.is_object())
        for (auto it = extra.begin(); it != extra.end(); ++it) rec[it.key()] = it.value();
    std::lock_guard<std::mutex> lock(mu_);
    if (!file_.empty()) append_jsonl(file_, rec);
    if (echo_) std::cerr << rec.dump() << '\n';
}

VerifiedCurve verify_curve(const WeierstrassCurve& curve, std::int64_t x_bound, unsigned m, const std::string& provenance)
{
    CurveDossier d = make_dossier(curve);
    d.provenance = provenance;
    PointInventory inv = inventory(d.curve, x_bound, m);
    RankAssessment ra = rank_lower_bound(d.curve, inv.rational_points());
    d.integral_x = inv.I();
    d.rank = ra.rank;
    return {d, inv, ra};
}

std::vector<CurveDossier> verify_candidates(const std::vector<CandidateCurve>& candidates, std::int64_t x_bound,
                                            unsigned m, const std::string& provenance, RunLog& log,
                                            std::size_t* failures, unsigned min_count)
{
    std::size_t failed = 0, skipped = 0;
    std::map<WeierstrassCurve, TwoTorsionModel> unique;
    for (const auto& c : candidates) {
        if (c.count < min_count) {
            ++skipped;
            continue;
        }
        try {
            unique.emplace(curve_from_b(c.model), c.model);
        } catch (const Error& e) {
            ++failed;
            log.write("warn", "minimal_model", e.what(), {{"model", c.model.to_string()}});
        }
    }
    if (skipped)
        log.write("info", "triage", "candidates below verify_min_count not verified",
                  {{"skipped", skipped}, {"verify_min_count", min_count}});
    log.write("info", "dedup", "unique minimal models",
              {{"candidates", candidates.size() - skipped}, {"curves", unique.size()}});
    std::vector<std::pair<WeierstrassCurve, TwoTorsionModel>> work(unique.begin(), unique.end());
    std::vector<std::optional<CurveDossier>> results(work.size());
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : failed)
    for (std::size_t i = 0; i < work.size(); ++i) {
        const auto& [curve, model] = work[i];
        try {
            VerifiedCurve v = verify_curve(curve, x_bound, m, provenance);
            log.write("info", "verify", "dossier",
                      {{"curve", curve.to_string()},
                       {"model", model.to_string()},
                       {"conductor", to_string(v.dossier.conductor)},
                       {"I", v.dossier.integral_x},
                       {"rank", v.dossier.rank}});
            results[i] = std::move(v.dossier);
        } catch (const Error& e) {
            ++failed;
            log.write("warn", "verify", e.what(), {{"curve", curve.to_string()}, {"model", model.to_string()}});
        }
    }
    std::vector<CurveDossier> out;
    for (auto& r : results)
        if (r) out.push_back(std::move(*r));
    if (failures) *failures += failed;
    return out;
}

std::vector<CandidateCurve> read_candidates(const fs::path& run_dir)
{
    std::vector<CandidateCurve> out;
    read_jsonl(run_dir / "candidates.jsonl", [&](const Json& j) { out.push_back(candidate_from_json(j)); });
    return out;
}

RunSummary run_pipeline(const RunConfig& cfg, const fs::path& dir, const RunControl& control)
{
    cfg.validate();
    fs::create_directories(dir / "parts");
    const fs::path manifest_path = dir / "manifest.json";
    RunLog log(dir / "log.jsonl", control.echo_logs);
    Manifest man = fs::exists(manifest_path) ? load_manifest(manifest_path, cfg) : fresh_manifest(cfg);
    if (!fs::exists(manifest_path)) {
        save_json_atomic(manifest_path, man.to_json());
        std::ofstream(dir / "config.txt") << cfg.to_key_values();
        log.write("info", "run", "started", {{"config_hash", man.hash}, {"partitions", man.parts.size()}});
    } else {
        log.write("info", "run", "resumed", {{"config_hash", man.hash}});
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::mutex man_mu;
    auto checkpoint = [&]() {
        Manifest snap;
        {
            std::lock_guard<std::mutex> lock(man_mu);
            man.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            snap = man;
            man.wall_seconds -= std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        static std::mutex io_mu;
        std::lock_guard<std::mutex> lock(io_mu);
        save_json_atomic(manifest_path, snap.to_json());
    };

    if (!man.search_complete) {
        std::optional<PairSearchContext> ctx;
        if (cfg.method == SearchMethod::Pair) ctx.emplace(cfg.search);
        std::vector<std::size_t> pending;
        for (std::size_t i = 0; i < man.parts.size(); ++i)
            if (!man.parts[i].done) pending.push_back(i);
        std::atomic<std::uint64_t> slices{0};
        std::atomic<bool> stop{false};

#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t k = 0; k < pending.size(); ++k) {
            if (stop.load()) continue;
            const std::size_t i = pending[k];
            Partition local;
            {
                std::lock_guard<std::mutex> lock(man_mu);
                local = man.parts[i];
            }
            const fs::path file = part_path(dir, i);
            // Drop anything written after the last checkpoint.
            if (!fs::exists(file)) std::ofstream(file).close();
            fs::resize_file(file, local.bytes);
            std::ofstream out(file, std::ios::app | std::ios::binary);
            auto last_save = std::chrono::steady_clock::now();
            bool interrupted = false;
            for (std::int64_t b4 : local.b4) {
                if (local.cursor && b4 <= *local.cursor) continue;
                if (stop.load()) {
                    interrupted = true;
                    break;
                }
                PairStats st;
                std::vector<CandidateCurve> found = cfg.method == SearchMethod::Direct
                                                        ? search_direct_slice(cfg.search.base, b4)
                                                        : search_pair_slice(*ctx, b4, &st);
                for (const auto& c : found) out << to_json(c).dump() << '\n';
                out.flush();
                local.cursor = b4;
                local.bytes = static_cast<std::uint64_t>(out.tellp());
                local.candidates += found.size();
                local.stats += st;
                const std::uint64_t n = ++slices;
                if (control.stop_after_slices && n >= control.stop_after_slices) stop = true;
                if (std::chrono::steady_clock::now() - last_save > std::chrono::seconds(2)) {
                    {
                        std::lock_guard<std::mutex> lock(man_mu);
                        man.parts[i] = local;
                    }
                    checkpoint();
                    last_save = std::chrono::steady_clock::now();
                }
            }
            if (!interrupted && !(local.cursor && *local.cursor < local.b4.back())) local.done = true;
            {
                std::lock_guard<std::mutex> lock(man_mu);
                man.parts[i] = local;
            }
            checkpoint();
        }

        bool all_done = std::all_of(man.parts.begin(), man.parts.end(), [](const Partition& p) { return p.done; });
        if (!all_done) {
            RunSummary s = summarize(man);
            log.write("info", "search", "interrupted",
                      {{"partitions_done", s.partitions_done}, {"partitions", s.partitions}});
            return s;
        }
        std::vector<CandidateCurve> merged;
        for (std::size_t i = 0; i < man.parts.size(); ++i) {
            const fs::path file = part_path(dir, i);
            if (fs::exists(file))
                read_jsonl(file, [&](const Json& j) { merged.push_back(candidate_from_json(j)); });
        }
        std::sort(merged.begin(), merged.end());
        std::vector<Json> lines;
        for (const auto& c : merged) lines.push_back(to_json(c));
        write_jsonl(dir / "candidates.jsonl", lines);
        man.search_complete = true;
        RunSummary s = summarize(man);
        save_json_atomic(dir / "stats.json",
                         Json{{"pair", stats_json(s.pair_stats)},
                              {"classes_per_b4", s.pair_stats.classes_per_b4()},
                              {"candidates", merged.size()}});
        checkpoint();
        log.write("info", "search", "complete", {{"candidates", merged.size()}});
    }

    if (control.verify && !man.verified) {
        std::size_t failures = 0;
        auto dossiers = verify_candidates(read_candidates(dir), cfg.x_bound, cfg.m, provenance_of(cfg), log,
                                          &failures, cfg.verify_min_count);
        std::vector<Json> lines;
        RecordTable table;
        for (const auto& d : dossiers) {
            lines.push_back(to_json(d));
            table.insert(d);
        }
        write_jsonl(dir / "dossiers.jsonl", lines);
        std::ofstream(dir / "tables.md") << render_tables(table);
        man.verified = true;
        man.dossiers = dossiers.size();
        man.failures = failures;
        checkpoint();
        log.write("info", "verify", "complete", {{"dossiers", dossiers.size()}, {"failures", failures}});
    }
    RunSummary s = summarize(man);
    s.complete = man.search_complete && (man.verified || !control.verify);
    return s;
}

RunSummary resume(const fs::path& dir, const RunControl& control)
{
    std::ifstream in(dir / "config.txt");
    if (!in) throw Error("no run recorded in " + dir.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return run_pipeline(RunConfig::parse_key_values(ss.str()), dir, control);
}

} // namespace rankforge
