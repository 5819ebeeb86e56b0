#pragma once

#include "rankforge/points.hpp"
#include "rankforge/records.hpp"
#include "rankforge/search_pair.hpp"
#include "rankforge/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>

namespace rankforge {

enum class SearchMethod { Direct, Pair };

/// Everything that determines a run's output. Serialized as flat key=value
/// text; the hash of that text guards resumption.
struct RunConfig {
    SearchMethod method = SearchMethod::Direct;
    PairSearchConfig search;           // search.base is the direct-search config
    std::int64_t partition_size = 256; // b4 slices per partition
    std::int64_t x_bound = 1000000;    // sieve bound for candidate verification
    unsigned m = 3;                    // combination bound for candidate verification
    unsigned verify_min_count = 0;     // candidates with fewer box points are logged and not verified

    std::string to_key_values() const;
    static RunConfig parse_key_values(std::string_view text);
    /// FNV-1a of to_key_values(), as 16 hex digits.
    std::string hash() const;
    void validate() const;
};

/// Knobs that do not change the output.
struct RunControl {
    std::uint64_t stop_after_slices = 0; // simulate an interruption after this many b4 slices
    bool verify = true;                  // continue from candidates to dossiers
    bool echo_logs = false;              // mirror log records to stderr
};

struct RunSummary {
    std::size_t partitions = 0;
    std::size_t partitions_done = 0;
    std::size_t candidates = 0;
    std::size_t dossiers = 0;
    std::size_t failures = 0; // candidates that failed a verification stage
    bool search_complete = false;
    bool complete = false;
    PairStats pair_stats;
};

/// Structured log written as JSON lines; safe to call from several threads.
class RunLog {
public:
    RunLog() = default;
    RunLog(const std::filesystem::path& file, bool echo);
    void write(const std::string& level, const std::string& stage, const std::string& message, Json extra = {});

private:
    std::filesystem::path file_;
    bool echo_ = false;
    std::mutex mu_;
};

/// Starts a run in `run_dir`, or continues one whose manifest has the same
/// config hash (ConfigMismatch otherwise). A completed run is a no-op.
RunSummary run_pipeline(const RunConfig& config, const std::filesystem::path& run_dir, const RunControl& control = {});

/// Continues the run recorded in `run_dir` using its stored config.
RunSummary resume(const std::filesystem::path& run_dir, const RunControl& control = {});

/// Merged candidates of a finished search stage, sorted.
std::vector<CandidateCurve> read_candidates(const std::filesystem::path& run_dir);

struct VerifiedCurve {
    CurveDossier dossier;
    PointInventory inventory;
    RankAssessment rank;
};

/// Minimal model, conductor, integral points and rank lower bound for one curve.
VerifiedCurve verify_curve(const WeierstrassCurve& curve, std::int64_t x_bound, unsigned m,
                           const std::string& provenance = "external");

/// Candidates to dossiers: dedup by minimal model, then verify_curve.
/// Failures are logged with their reason and counted, never dropped silently.
/// Candidates below min_count are logged as skipped in one record.
std::vector<CurveDossier> verify_candidates(const std::vector<CandidateCurve>& candidates, std::int64_t x_bound,
                                            unsigned m, const std::string& provenance, RunLog& log,
                                            std::size_t* failures = nullptr, unsigned min_count = 0);

} // namespace rankforge
