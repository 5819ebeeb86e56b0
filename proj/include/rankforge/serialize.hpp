#pragma once

#include "rankforge/heights.hpp"
#include "rankforge/records.hpp"
#include "rankforge/search_direct.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rankforge {

using Json = nlohmann::json;

/// Integers are written as JSON numbers inside the 64-bit range and as
/// decimal strings outside it; readers accept both.
Json int_to_json(const Int& n);
Int int_from_json(const Json& j);

/// {b2, two_b4, b6, count, witnesses: [[x, y], ...]}
Json to_json(const CandidateCurve& c);
CandidateCurve candidate_from_json(const Json& j);

/// {x, y}
Json to_json(const IntegralPoint& p);
IntegralPoint point_from_json(const Json& j);

/// Conductor, |Delta| and |Delta|/N always as strings.
Json to_json(const CurveDossier& d);
CurveDossier dossier_from_json(const Json& j);

/// {rank_lb, regulator, min_eigenvalue, basis: [[x, y], ...]}
Json to_json(const RankAssessment& r);

/// One JSON value per line; blank lines are skipped. Throws ParseError with the line number.
void read_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& visit);
void append_jsonl(const std::filesystem::path& path, const Json& value);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& values);

} // namespace rankforge
