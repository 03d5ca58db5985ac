#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "conecalc/edge.hpp"
#include "conecalc/extraction.hpp"
#include "conecalc/parallel.hpp"
#include "conecalc/serialize.hpp"
#include "conecalc/solver.hpp"
#include "conecalc/spaces.hpp"

namespace conecalc {

inline constexpr const char* kToolVersion = "conecalc 0.1.0";
inline constexpr const char* kReportSchema = "conecalc/report/v1";

// ---------------------------------------------------------------------------
// Problem specification: JSON is canonical; a flat TOML-like key = value
// grammar (dotted keys, [section] prefixes, numbers/strings/booleans/arrays)
// is accepted as sugar and converted to the same document.
// ---------------------------------------------------------------------------

struct ProblemSpec {
    Json doc;
};

namespace io_detail {

inline void set_dotted(Json& root, const std::string& key, Json value, int line)
{
    Json* cur = &root;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (part.empty())
            throw ParseError("line " + std::to_string(line) + ": empty key component");
        if (dot == std::string::npos) {
            (*cur)[part] = std::move(value);
            return;
        }
        cur = &(*cur)[part];
        pos = dot + 1;
    }
}

inline Json parse_kv_value(const std::string& raw, int line, int col)
{
    const auto fail = [&](const std::string& why) {
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + why);
    };
    std::string s = raw;
    // trim
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    if (a == std::string::npos) fail("missing value");
    s = s.substr(a, b - a + 1);

    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail("unterminated string");
        return s.substr(1, s.size() - 2);
    }
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '[') {
        if (s.back() != ']') fail("unterminated array");
        Json arr = Json::array();
        std::string inner = s.substr(1, s.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ','))
            if (item.find_first_not_of(" \t") != std::string::npos)
                arr.push_back(parse_kv_value(item, line, col));
        return arr;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) fail("trailing characters after number: '" + s + "'");
        if (v == static_cast<long long>(v) && s.find_first_of(".eE") == std::string::npos)
            return static_cast<long long>(v);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        fail("cannot parse value '" + s + "'");
    }
    return nullptr;
}

inline Json parse_key_value_document(const std::string& text)
{
    Json root = Json::object();
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        const auto b = line.find_last_not_of(" \t\r");
        const std::string body = line.substr(a, b - a + 1);
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ParseError("line " + std::to_string(lineno) + ": unterminated section");
            section = body.substr(1, body.size() - 2);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ", column " +
                             std::to_string(static_cast<int>(a) + 1) + ": expected key = value");
        std::string key = body.substr(0, eq);
        const auto ka = key.find_first_not_of(" \t");
        const auto kb = key.find_last_not_of(" \t");
        key = key.substr(ka, kb - ka + 1);
        if (!section.empty()) key = section + "." + key;
        set_dotted(root, key, parse_kv_value(body.substr(eq + 1), lineno,
                                             static_cast<int>(eq) + 2),
                   lineno);
    }
    return root;
}

inline void require_key(const Json& j, const std::string& path)
{
    const Json* cur = &j;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = path.find('.', pos);
        const std::string part = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (!cur->is_object() || !cur->contains(part))
            throw SchemaError("missing required key \"" + path + "\"");
        cur = &(*cur)[part];
        if (dot == std::string::npos) return;
        pos = dot + 1;
    }
}

inline std::string fnv1a_digest(const std::string& data)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a:") + buf;
}

} // namespace io_detail

/// Parse a specification document (JSON, falling back to the key = value
/// grammar) and fill the documented defaults.
inline ProblemSpec parse_spec(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& je) {
        // not JSON; try the key/value grammar (its own errors carry line/col)
        if (text.find_first_not_of(" \t\r\n") != std::string::npos &&
            text[text.find_first_not_of(" \t\r\n")] == '{')
            throw ParseError(std::string("JSON: ") + je.what());
        doc = io_detail::parse_key_value_document(text);
    }
    if (!doc.is_object()) throw SchemaError("specification must be a JSON object");

    // defaults
    if (!doc.contains("grid")) doc["grid"] = Json::object();
    auto& grid = doc["grid"];
    if (!grid.contains("T")) grid["T"] = 12.0;
    if (!grid.contains("M")) grid["M"] = 4096;
    if (!grid.contains("Q")) grid["Q"] = 256;
    if (!grid.contains("L")) grid["L"] = 2.0 * 3.14159265358979323846;
    if (!doc.contains("base")) doc["base"] = Json{{"kind", "point"}, {"N", 32}};
    if (!doc["base"].contains("N")) doc["base"]["N"] = 32;

    return ProblemSpec{std::move(doc)};
}

inline ProblemSpec parse_spec_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spec file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline BaseModel build_base(const ProblemSpec& spec)
{
    return base_from_json(spec.doc.at("base"));
}

inline RadialGrid build_grid(const ProblemSpec& spec)
{
    const auto& g = spec.doc.at("grid");
    return RadialGrid(g.at("T").get<double>(), g.at("M").get<int>());
}

inline EdgeGrid build_edge_grid(const ProblemSpec& spec)
{
    const auto& g = spec.doc.at("grid");
    return EdgeGrid(g.at("L").get<double>(), g.at("Q").get<int>());
}

inline BaseOperator base_operator_from_json(const Json& j, const BaseModel& base)
{
    if (j.is_number()) return BaseOperator::constant(j.get<double>());
    if (j.is_array() && j.size() == 2 && j.at(0).is_number())
        return BaseOperator::constant(Complex(j.at(0).get<double>(), j.at(1).get<double>()));
    if (j.is_object() && j.contains("terms")) {
        BaseOperator op;
        for (const auto& t : j.at("terms")) {
            TrigTerm term;
            term.deriv_order = t.value("deriv", 0);
            for (const auto& c : t.at("trig")) {
                const auto& cc = c.at("c");
                term.trig[c.at("q").get<int>()] =
                    cc.is_number() ? Complex(cc.get<double>(), 0.0)
                                   : Complex(cc.at(0).get<double>(), cc.at(1).get<double>());
            }
            op.terms.push_back(std::move(term));
        }
        (void)base;
        return op;
    }
    throw SchemaError("operator.coefficients entries must be numbers, [re,im], or {terms: [...]}");
}

inline FuchsOperator build_operator(const ProblemSpec& spec)
{
    io_detail::require_key(spec.doc, "operator");
    const Json& op = spec.doc.at("operator");
    const BaseModel base = build_base(spec);

    if (op.contains("preset")) {
        const std::string preset = op.at("preset").get<std::string>();
        if (preset == "euler") {
            if (!op.contains("nu")) throw SchemaError("missing required key \"operator.nu\"");
            return FuchsOperator::euler(op.at("nu").get<double>());
        }
        if (preset == "polar_laplacian") {
            if (base.kind != BaseModel::Kind::Circle)
                throw SchemaError("polar_laplacian preset needs base.kind = \"circle\"");
            return FuchsOperator::polar_laplacian(base.N);
        }
        if (preset == "first_order") {
            if (!op.contains("p0")) throw SchemaError("missing required key \"operator.p0\"");
            const auto& p0 = op.at("p0");
            return FuchsOperator::first_order(
                p0.is_number() ? Complex(p0.get<double>(), 0.0)
                               : Complex(p0.at(0).get<double>(), p0.at(1).get<double>()));
        }
        throw SchemaError("unknown operator.preset \"" + preset + "\"");
    }

    io_detail::require_key(spec.doc, "operator.mu");
    io_detail::require_key(spec.doc, "operator.coefficients");
    const int mu = op.at("mu").get<int>();
    const int k_taylor = op.value("k_taylor", 0);
    const Json& coeffs = op.at("coefficients");
    if (!coeffs.is_array() || coeffs.empty())
        throw SchemaError("operator.coefficients must be a nonempty array over j");
    FuchsOperator A(mu, base, k_taylor, static_cast<int>(coeffs.size()) - 1);
    for (int j = 0; j < static_cast<int>(coeffs.size()); ++j) {
        const Json& row = coeffs.at(static_cast<std::size_t>(j));
        if (!row.is_array() || static_cast<int>(row.size()) != k_taylor + 1)
            throw SchemaError("operator.coefficients[" + std::to_string(j) +
                              "] must list k_taylor + 1 Taylor entries");
        for (int l = 0; l <= k_taylor; ++l)
            A.a(j, l) = base_operator_from_json(row.at(static_cast<std::size_t>(l)), base);
    }
    return A;
}

/// Test functions for right-hand sides and norm inputs. Kinds:
///   gaussian_bump: exp(-((t - t_center)/t_width)^2) on mode `mode`
///   exp_decay:     exp(-r) on mode `mode`
///   monomial_bump: omega(r) r^{-p} log^k r on mode `mode`
inline WeightedGridFunction build_function(const Json& j, const RadialGrid& g,
                                           const BaseModel& base)
{
    const std::string kind = j.value("kind", "gaussian_bump");
    const int mode_index = base.index_of_mode(j.value("mode", 0));
    WeightedGridFunction u(g, base, j.value("gamma", 0.0));
    if (kind == "gaussian_bump") {
        const double c = j.value("t_center", 0.0), w = j.value("t_width", 1.0);
        for (int i = 0; i < g.M; ++i)
            u.values(i, mode_index) = std::exp(-std::pow((g.t(i) - c) / w, 2));
    } else if (kind == "exp_decay") {
        for (int i = 0; i < g.M; ++i) u.values(i, mode_index) = std::exp(-g.r(i));
    } else if (kind == "monomial_bump") {
        Cutoff omega;
        const Json& p = j.at("p");
        const Complex pc = p.is_number() ? Complex(p.get<double>(), 0.0)
                                         : Complex(p.at(0).get<double>(), p.at(1).get<double>());
        const int k = j.value("k", 0);
        for (int i = 0; i < g.M; ++i) {
            const double w = omega(g.r(i));
            if (w == 0.0) continue;
            u.values(i, mode_index) = w * std::exp(-pc * g.t(i)) * std::pow(g.t(i), k);
        }
    } else {
        throw SchemaError("unknown function kind \"" + kind + "\"");
    }
    return u;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Report {
    Json doc;
    // CSV tables: name -> rows (first row = header)
    std::vector<std::pair<std::string, std::vector<std::string>>> tables;

    std::string to_json_string() const { return doc.dump(2); }
};

namespace io_detail {

inline Report make_report(const std::string& command, const ProblemSpec& spec)
{
    Report rep;
    rep.doc["schema"] = kReportSchema;
    rep.doc["version"] = kToolVersion;
    rep.doc["command"] = command;
    rep.doc["input_digest"] = fnv1a_digest(spec.doc.dump());
    rep.doc["spec"] = spec.doc;
    rep.doc["diagnostics"] = Json{{"threads", thread_budget()}};
    return rep;
}

inline std::string csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace io_detail

inline Report run_roots(const ProblemSpec& spec)
{
    Report rep = io_detail::make_report("roots", spec);
    const FuchsOperator A = build_operator(spec);
    io_detail::require_key(spec.doc, "strip");
    const double lo = spec.doc.at("strip").at(0).get<double>();
    const double hi = spec.doc.at("strip").at(1).get<double>();
    const double im_half = spec.doc.value("im_half", 16.0);

    const auto roots = indicial_roots(A, lo, hi, im_half);
    Json out = Json::array();
    std::vector<std::string> csv{"re,im,multiplicity,det_multiplicity"};
    for (const auto& z : roots) {
        out.push_back(Json{{"re", z.z.real()},
                           {"im", z.z.imag()},
                           {"multiplicity", z.multiplicity},
                           {"det_multiplicity", z.det_multiplicity}});
        csv.push_back(io_detail::csv_number(z.z.real()) + "," + io_detail::csv_number(z.z.imag()) +
                      "," + std::to_string(z.multiplicity) + "," +
                      std::to_string(z.det_multiplicity));
    }
    rep.doc["results"]["roots"] = std::move(out);
    rep.tables.emplace_back("roots", std::move(csv));
    return rep;
}

inline Report run_solve(const ProblemSpec& spec, ModelSolution* keep = nullptr)
{
    Report rep = io_detail::make_report("solve", spec);
    const FuchsOperator A = build_operator(spec);
    const RadialGrid g = build_grid(spec);
    io_detail::require_key(spec.doc, "weight.gamma");
    const double gamma = spec.doc.at("weight").at("gamma").get<double>();
    io_detail::require_key(spec.doc, "rhs");
    const WeightedGridFunction f = build_function(spec.doc.at("rhs"), g, A.base);
    const int depth = spec.doc.value("depth", 0);

    const ModelSolution sol = depth > 0 || A.k_taylor > 0
                                  ? solve_with_taylor(A, f, gamma, depth)
                                  : solve_model(A, f, gamma);
    rep.doc["results"]["residual"] = sol.residual;
    rep.doc["results"]["beta"] = sol.beta;
    rep.doc["results"]["solution_norm"] = scpr_norm(sol.u);

    std::vector<std::string> csv{"t,r,mode,re,im"};
    for (int i = 0; i < g.M; i += std::max(1, g.M / 1024))
        for (int m = 0; m < A.base.dim(); ++m)
            csv.push_back(io_detail::csv_number(g.t(i)) + "," + io_detail::csv_number(g.r(i)) +
                          "," + std::to_string(A.base.mode(m)) + "," +
                          io_detail::csv_number(sol.u.values(i, m).real()) + "," +
                          io_detail::csv_number(sol.u.values(i, m).imag()));
    rep.tables.emplace_back("solution", std::move(csv));
    if (keep) *keep = sol;
    return rep;
}

inline Report run_asymptotics(const ProblemSpec& spec)
{
    ModelSolution sol;
    Report solved = run_solve(spec, &sol);
    Report rep = io_detail::make_report("asymptotics", spec);
    io_detail::require_key(spec.doc, "weight.theta");
    const double theta = spec.doc.at("weight").at("theta").get<double>();

    const Extraction ex = extract_asymptotics(sol, theta);
    rep.doc["results"]["residual"] = sol.residual;
    rep.doc["results"]["type"] = type_to_json(ex.type);
    Json terms = Json::array();
    std::vector<std::string> csv{"re_p,im_p,k,mode,re_c,im_c"};
    for (const auto& term : ex.terms) {
        Json jt;
        jt["p"] = Json::array({term.p.real(), term.p.imag()});
        jt["coeff"] = Json::array();
        for (int k = 0; k <= term.log_order(); ++k) {
            Json ck = Json::array();
            for (int m = 0; m < sol.u.base.dim(); ++m) {
                const Complex c = term.coeff[static_cast<std::size_t>(k)](m);
                ck.push_back(Json::array({c.real(), c.imag()}));
                csv.push_back(io_detail::csv_number(term.p.real()) + "," +
                              io_detail::csv_number(term.p.imag()) + "," + std::to_string(k) +
                              "," + std::to_string(sol.u.base.mode(m)) + "," +
                              io_detail::csv_number(c.real()) + "," +
                              io_detail::csv_number(c.imag()));
            }
            jt["coeff"].push_back(std::move(ck));
        }
        terms.push_back(std::move(jt));
    }
    rep.doc["results"]["coefficients"] = std::move(terms);

    WeightData wd(sol.gamma, theta, sol.u.cone_dim());
    const auto profile = flatness_profile(ex.u_flat, wd, 4);
    rep.doc["results"]["flat_remainder_profile"] = profile;
    rep.tables.emplace_back("coefficients", std::move(csv));
    return rep;
}

inline Report run_norms(const ProblemSpec& spec)
{
    Report rep = io_detail::make_report("norms", spec);
    const BaseModel base = build_base(spec);
    const RadialGrid g = build_grid(spec);
    io_detail::require_key(spec.doc, "function");
    const WeightedGridFunction u = build_function(spec.doc.at("function"), g, base);

    const Json& ns = spec.doc.value("norm", Json::object());
    NormSpec nspec(ns.value("s", 0.0), ns.value("gamma", 0.0), ns.value("g", 0.0),
                   ns.value("variant", std::string("zfull")) == std::string("im_only")
                       ? MultiplierVariant::ImOnly
                       : MultiplierVariant::ZFull);

    Json out;
    out["scpr"] = scpr_norm(u);
    out["hs_gamma"] = hs_gamma_norm(u, nspec);
    out["ksg"] = ksg_norm(u, nspec);

    std::vector<std::string> csv{"name,value"};
    csv.push_back("scpr," + io_detail::csv_number(out["scpr"].get<double>()));
    csv.push_back("hs_gamma," + io_detail::csv_number(out["hs_gamma"].get<double>()));
    csv.push_back("ksg," + io_detail::csv_number(out["ksg"].get<double>()));

    if (spec.doc.contains("edge")) {
        const EdgeGrid yg = build_edge_grid(spec);
        EdgeGridFunction w(yg, g, base);
        const Json& e = spec.doc.at("edge");
        const double yc = e.value("y_center", 0.0), yw = e.value("y_width", 0.8);
        for (int jy = 0; jy < yg.Q; ++jy) {
            const double env = std::exp(-std::pow((yg.y(jy) - yc) / yw, 2));
            WeightedGridFunction fib = u;
            fib.values *= env;
            w.set_fiber(jy, fib);
        }
        const double s = e.value("s", 0.0);
        const double wsn = ws_norm(w, s);
        double l2 = 0.0;
        for (int jy = 0; jy < yg.Q; ++jy) {
            const double fn = scpr_norm(w.fiber(jy));
            l2 += fn * fn;
        }
        l2 = std::sqrt(l2 * yg.step());
        out["ws"] = wsn;
        out["l2_full"] = l2;
        csv.push_back("ws," + io_detail::csv_number(wsn));
        csv.push_back("l2_full," + io_detail::csv_number(l2));
    }
    rep.doc["results"] = std::move(out);
    rep.tables.emplace_back("norms", std::move(csv));
    return rep;
}

inline Report run_check_symbol(const ProblemSpec& spec)
{
    Report rep = io_detail::make_report("check-symbol", spec);
    const BaseModel base = build_base(spec);
    const RadialGrid g = build_grid(spec);
    io_detail::require_key(spec.doc, "symbol.kind");
    const Json& sj = spec.doc.at("symbol");
    const std::string kind = sj.at("kind").get<std::string>();

    OperatorValuedSymbol sym;
    if (kind == "multiplication") {
        const double c = sj.value("center", 1.0), w = sj.value("width", 0.3);
        sym = multiplication_symbol(
            [c, w](double r) { return std::exp(-std::pow((r - c) / w, 2)); });
    } else if (kind == "potential") {
        Vector b = Vector::Ones(base.dim());
        const Json& p = sj.at("p");
        sym = potential_symbol(b,
                               p.is_number()
                                   ? Complex(p.get<double>(), 0.0)
                                   : Complex(p.at(0).get<double>(), p.at(1).get<double>()),
                               sj.value("l", 0));
    } else if (kind == "smoothing_mellin") {
        MeromorphicSymbol f = sj.contains("mellin_symbol")
                                  ? symbol_from_json(sj.at("mellin_symbol"))
                                  : [&] {
                                        MeromorphicSymbol d(base, kSmoothingOrder);
                                        d.add_pole_term(Complex(sj.value("pole", -0.8), 0.0), 0,
                                                        0.4 * Matrix::Identity(base.dim(),
                                                                               base.dim()));
                                        return d;
                                    }();
        const double mu = sj.value("mu", 0.0);
        const int j = sj.value("j", 0), alpha = sj.value("alpha", 0);
        const double gamma = sj.value("gamma", 0.0);
        sym = smoothing_mellin_symbol(f, mu, j, alpha, gamma, sj.value("gamma_j", gamma));
    } else if (kind == "principal_edge") {
        sym = principal_edge_symbol(build_operator(spec));
    } else {
        throw SchemaError("unknown symbol.kind \"" + kind + "\"");
    }

    std::vector<double> lambdas{1.0, 1.3, 2.0, 3.7};
    std::vector<double> etas{1.0, -1.4, 2.5};
    std::vector<WeightedGridFunction> probes;
    for (double c : {-1.2, 0.4}) {
        probes.push_back(sample_function(g, base, [c](double r, int) {
            const double t = std::log(r);
            return std::exp(-std::pow((t - c) / 0.5, 2));
        }));
    }
    const double dev = twisted_homogeneity_check(sym, lambdas, etas, probes);
    rep.doc["results"]["order"] = sym.order;
    rep.doc["results"]["deviation"] = dev;
    std::vector<std::string> csv{"name,value"};
    csv.push_back("deviation," + io_detail::csv_number(dev));
    rep.tables.emplace_back("symbol_check", std::move(csv));
    return rep;
}

inline Report run(const std::string& command, const ProblemSpec& spec)
{
    if (command == "roots") return run_roots(spec);
    if (command == "solve") return run_solve(spec);
    if (command == "asymptotics") return run_asymptotics(spec);
    if (command == "norms") return run_norms(spec);
    if (command == "check-symbol") return run_check_symbol(spec);
    throw InvalidArgument("unknown command \"" + command + "\"");
}

inline void write_csv_tables(const Report& rep, const std::string& dir)
{
    for (const auto& [name, rows] : rep.tables) {
        std::ofstream out(dir + "/" + name + ".csv");
        if (!out) throw InvalidArgument("cannot write CSV table to " + dir);
        for (const auto& row : rows) out << row << "\n";
    }
}

} // namespace conecalc
