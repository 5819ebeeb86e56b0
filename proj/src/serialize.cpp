#include "rankforge/serialize.hpp"

#include "rankforge/errors.hpp"

#include <fstream>

namespace rankforge {

Json int_to_json(const Int& n)
{
    if (fits_int64(n)) return to_int64(n);
    return to_string(n);
}

Int int_from_json(const Json& j)
{
    if (j.is_number_integer()) return from_int64(j.get<std::int64_t>());
    if (j.is_string()) return parse_int(j.get<std::string>());
    throw ParseError("expected an integer, got " + j.dump());
}

Json to_json(const IntegralPoint& p) { return Json{{"x", int_to_json(p.x)}, {"y", int_to_json(p.y)}}; }

IntegralPoint point_from_json(const Json& j)
{
    if (j.is_array() && j.size() == 2) return {int_from_json(j[0]), int_from_json(j[1])};
    return {int_from_json(j.at("x")), int_from_json(j.at("y"))};
}

Json to_json(const CandidateCurve& c)
{
    Json w = Json::array();
    for (const auto& p : c.witnesses) w.push_back(Json::array({int_to_json(p.x), int_to_json(p.y)}));
    return Json{{"b2", int_to_json(c.model.b2)},
                {"two_b4", int_to_json(2 * c.model.b4)},
                {"b6", int_to_json(c.model.b6)},
                {"count", c.count},
                {"witnesses", w}};
}

CandidateCurve candidate_from_json(const Json& j)
{
    try {
        CandidateCurve c;
        c.model.b2 = int_from_json(j.at("b2"));
        Int two_b4 = int_from_json(j.at("two_b4"));
        if (mpz_odd_p(two_b4.get_mpz_t())) throw ParseError("two_b4 must be even");
        c.model.b4 = two_b4 / 2;
        c.model.b6 = int_from_json(j.at("b6"));
        c.count = j.at("count").get<unsigned>();
        if (j.contains("witnesses"))
            for (const auto& w : j.at("witnesses")) c.witnesses.push_back(point_from_json(w));
        return c;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("bad candidate record: ") + e.what());
    }
}

Json to_json(const CurveDossier& d)
{
    return Json{{"curve", d.curve.to_string()},
                {"conductor", to_string(d.conductor)},
                {"abs_discriminant", to_string(d.abs_discriminant)},
                {"delta_over_n", to_string(d.delta_over_n)},
                {"I", d.integral_x},
                {"rank", d.rank},
                {"provenance", d.provenance}};
}

CurveDossier dossier_from_json(const Json& j)
{
    try {
        CurveDossier d(WeierstrassCurve::parse(j.at("curve").get<std::string>()));
        d.conductor = int_from_json(j.at("conductor"));
        d.abs_discriminant = int_from_json(j.at("abs_discriminant"));
        d.delta_over_n = int_from_json(j.at("delta_over_n"));
        d.integral_x = j.at("I").get<std::size_t>();
        d.rank = j.at("rank").get<int>();
        d.provenance = j.value("provenance", "external");
        return d;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("bad dossier record: ") + e.what());
    }
}

Json to_json(const RankAssessment& r)
{
    Json basis = Json::array();
    for (const auto& p : r.basis) basis.push_back(Json::array({to_string(p.x), to_string(p.y)}));
    return Json{{"rank_lb", r.rank}, {"regulator", r.regulator}, {"min_eigenvalue", r.min_eigenvalue}, {"basis", basis}};
}

void read_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& visit)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
        visit(j);
    }
}

void append_jsonl(const std::filesystem::path& path, const Json& value)
{
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot write " + path.string());
    out << value.dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& values)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& v : values) out << v.dump() << '\n';
}

} // namespace rankforge
