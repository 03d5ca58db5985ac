#pragma once

#include <json.hpp>

#include "conecalc/asymptotic_types.hpp"
#include "conecalc/symbol.hpp"

namespace conecalc {

using Json = nlohmann::json;

// JSON layouts:
//   symbol: {order, base: {kind, N}, holo: [matrix...], poles: [{p: [re,im],
//            m, coeffs: [matrix...]}], strip: [lo, hi]}
//   matrix: row-major [[ [re, im], ... ], ...]
//   asymptotic type: {pairs: [{re, im, m}], weight: {gamma, theta, n}}
// Doubles round-trip exactly through the serializer, which is more than the
// required 1e-15 relative fidelity.

inline Json base_to_json(const BaseModel& b)
{
    return Json{{"kind", b.kind == BaseModel::Kind::Point ? "point" : "circle"}, {"N", b.N}};
}

inline BaseModel base_from_json(const Json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "point") return BaseModel::point();
    if (kind == "circle") return BaseModel::circle(j.value("N", 32));
    throw SchemaError("base.kind must be \"point\" or \"circle\"");
}

inline Json matrix_to_json(const Matrix& m)
{
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j)
{
    if (!j.is_array() || j.empty()) throw SchemaError("matrix must be a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const Json& e = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
            m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    return m;
}

inline Json symbol_to_json(const MeromorphicSymbol& f)
{
    Json j;
    if (f.is_smoothing())
        j["order"] = "-inf";
    else
        j["order"] = f.order;
    j["base"] = base_to_json(f.base);
    j["holo"] = Json::array();
    for (const auto& h : f.holo) j["holo"].push_back(matrix_to_json(h));
    j["poles"] = Json::array();
    for (const auto& b : f.poles) {
        Json blk;
        blk["p"] = Json::array({b.p.real(), b.p.imag()});
        blk["m"] = b.log_order();
        blk["coeffs"] = Json::array();
        for (const auto& c : b.coeffs) blk["coeffs"].push_back(matrix_to_json(c));
        j["poles"].push_back(std::move(blk));
    }
    const auto bound = [](double v) -> Json {
        if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
        return v;
    };
    j["strip"] = Json::array({bound(f.strip_lo), bound(f.strip_hi)});
    return j;
}

inline MeromorphicSymbol symbol_from_json(const Json& j)
{
    MeromorphicSymbol f(base_from_json(j.at("base")));
    if (j.at("order").is_string())
        f.order = kSmoothingOrder;
    else
        f.order = j.at("order").get<double>();
    for (const auto& h : j.at("holo")) f.holo.push_back(matrix_from_json(h));
    for (const auto& blk : j.value("poles", Json::array())) {
        LaurentBlock b;
        b.p = Complex(blk.at("p").at(0).get<double>(), blk.at("p").at(1).get<double>());
        for (const auto& c : blk.at("coeffs")) b.coeffs.push_back(matrix_from_json(c));
        f.poles.push_back(std::move(b));
    }
    if (j.contains("strip")) {
        const auto bound = [](const Json& v, double sign) {
            return v.is_string() ? sign * std::numeric_limits<double>::infinity()
                                 : v.get<double>();
        };
        f.strip_lo = bound(j.at("strip").at(0), -1.0);
        f.strip_hi = bound(j.at("strip").at(1), +1.0);
    }
    f.validate();
    return f;
}

inline Json type_to_json(const DiscreteAsymptoticType& P)
{
    Json j;
    j["pairs"] = Json::array();
    for (const auto& q : P.pairs)
        j["pairs"].push_back(Json{{"re", q.p.real()}, {"im", q.p.imag()}, {"m", q.m}});
    j["weight"] = Json{{"gamma", P.weight.gamma},
                       {"theta", std::isinf(P.weight.theta) ? Json("-inf") : Json(P.weight.theta)},
                       {"n", P.weight.n}};
    return j;
}

inline DiscreteAsymptoticType type_from_json(const Json& j)
{
    const Json& w = j.at("weight");
    const double theta = w.at("theta").is_string() ? -std::numeric_limits<double>::infinity()
                                                   : w.at("theta").get<double>();
    WeightData wd(w.at("gamma").get<double>(), theta, w.at("n").get<int>());
    DiscreteAsymptoticType P(wd);
    for (const auto& q : j.value("pairs", Json::array()))
        P.pairs.push_back(AsymPair{Complex(q.at("re").get<double>(), q.at("im").get<double>()),
                                   q.at("m").get<int>()});
    P.normalize();
    return P;
}

} // namespace conecalc
