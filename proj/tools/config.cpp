#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

namespace nevres::cli {

using nlohmann::json;

const std::vector<std::string> kTaskOrder = {"validate", "identities", "resolve", "properties",
                                             "weyl",     "green",      "oracle"};

std::map<std::string, double> default_tolerances() {
    return {{"validate", 1e-10}, {"identities", 1e-10}, {"null", 1e-10},     {"ode", 1e-6},
            {"boundary", 1e-7},  {"adjoint", 1e-7},     {"nevanlinna", 1e-8}, {"norm", 1e-8},
            {"contour", 1e-7},   {"weyl", 1e-9},        {"split", 1e-8},      {"green", 1e-7},
            {"oracle", 1e-6}};
}

namespace {

const std::set<std::string> kTasks(kTaskOrder.begin(), kTaskOrder.end());

std::string with_pi(const std::string& src) {
    return std::regex_replace(src, std::regex("\\bpi\\b"), "3.141592653589793");
}

ScalarExpr scalar(const json& v, const std::string& path) {
    if (v.is_number()) return ScalarExpr::constant(v.get<double>());
    if (!v.is_string()) throw SchemaError(path, "expected a number or coeff-lang string");
    try {
        return parse_expr(with_pi(v.get<std::string>()));
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
}

/// A string or number is a 1 x 1 matrix; otherwise an array of rows.
MatrixExpr matrix(const json& v, const std::string& path, int rows, int cols) {
    if (!v.is_array()) {
        if (rows != 1 || cols != 1) throw SchemaError(path, "expected a " + std::to_string(rows) + "x" +
                                                                std::to_string(cols) + " matrix");
        MatrixExpr m(1, 1);
        m(0, 0) = scalar(v, path);
        return m;
    }
    if (static_cast<int>(v.size()) != rows) throw SchemaError(path, "expected " + std::to_string(rows) + " rows");
    MatrixExpr m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = v[i];
        std::string rp = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw SchemaError(rp, "expected " + std::to_string(cols) + " entries");
        for (int k = 0; k < cols; ++k) m(i, k) = scalar(row[k], rp + "[" + std::to_string(k) + "]");
    }
    return m;
}

/// A d-vector function: a single string when d = 1, otherwise an array of d strings.
MatrixExpr column(const json& v, const std::string& path, int d) {
    if (d == 1 && !v.is_array()) return matrix(v, path, 1, 1);
    if (!v.is_array() || static_cast<int>(v.size()) != d)
        throw SchemaError(path, "expected " + std::to_string(d) + " components");
    MatrixExpr m(d, 1);
    for (int i = 0; i < d; ++i) m(i, 0) = scalar(v[i], path + "[" + std::to_string(i) + "]");
    return m;
}

int integer(const json& j, const char* key, const std::string& path, std::optional<int> def = std::nullopt) {
    if (!j.contains(key)) {
        if (def) return *def;
        throw SchemaError(path + "." + key, "required");
    }
    if (!j[key].is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    return j[key].get<int>();
}

const json& object(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "required");
    if (!j[key].is_object()) throw SchemaError(path + "." + key, "expected an object");
    return j[key];
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw SchemaError(path + "." + it.key(), "unknown key");
}

/// Coefficients as {"p0": ..., "q1": ..., "s1": ...}.
DiffExpression diff_expression(const json& j, const std::string& path, int d, int r) {
    DiffExpression e = DiffExpression::zero(d, r);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        std::smatch mt;
        if (key == "r") continue;
        if (!std::regex_match(key, mt, std::regex("([pqs])([0-9]+)"))) throw SchemaError(path + "." + key, "unknown key");
        int idx = std::stoi(mt[2]);
        char kind = mt[1].str()[0];
        std::vector<MatrixExpr>& slot = kind == 'p' ? e.p : (kind == 'q' ? e.q : e.s);
        if (idx >= static_cast<int>(slot.size()) || (kind != 'p' && idx == 0))
            throw SchemaError(path + "." + key, "index out of range for order " + std::to_string(r));
        slot[idx] = matrix(it.value(), path + "." + key, d, d);
    }
    return e;
}

WeightExpression weight_expression(const json& j, const std::string& path, int d, int s) {
    WeightExpression w = WeightExpression::zero(d, s);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        std::smatch mt;
        if (!std::regex_match(key, mt, std::regex("([pq])([0-9]+)"))) throw SchemaError(path + "." + key, "unknown key");
        int idx = std::stoi(mt[2]);
        std::vector<MatrixExpr>& slot = mt[1] == "p" ? w.pt : w.qt;
        if (idx >= static_cast<int>(slot.size()) || (mt[1] == "q" && idx == 0))
            throw SchemaError(path + "." + key, "index out of range for order " + std::to_string(s));
        slot[idx] = matrix(it.value(), path + "." + key, d, d);
    }
    return w;
}

cplx lam_value(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw SchemaError(path, "expected a number or [re, im]");
}

}  // namespace

double real_constant(const json& v, const std::string& path) {
    cplx c = scalar(v, path).eval(0.0, 0.0);
    if (c.imag() != 0.0) throw SchemaError(path, "expected a real constant");
    return c.real();
}

ProblemConfig parse_config(const json& j) {
    const std::string root = "config";
    if (!j.is_object()) throw SchemaError(root, "expected an object");
    check_keys(j,
               {"name", "interval", "d", "r", "s", "l", "m", "n", "boundary", "grid", "lam", "lam_grid", "functions",
                "null_functions", "oracle", "tasks", "tolerances", "seed"},
               root);
    ProblemConfig c;
    c.source = j;
    c.name = j.value("name", std::string("problem"));
    if (!j.contains("interval") || !j["interval"].is_array() || j["interval"].size() != 2)
        throw SchemaError(root + ".interval", "expected [a, b]");
    c.a = real_constant(j["interval"][0], root + ".interval[0]");
    c.b = real_constant(j["interval"][1], root + ".interval[1]");
    if (!(c.a < c.b)) throw SchemaError(root + ".interval", "need a < b");
    c.d = integer(j, "d", root, 1);
    c.r = integer(j, "r", root);
    c.s = integer(j, "s", root, 0);
    if (c.d < 1) throw SchemaError(root + ".d", "must be positive");
    if (c.r < 1) throw SchemaError(root + ".r", "must be positive");
    if (c.s < 0 || c.s % 2 || c.s > c.r) throw SchemaError(root + ".s", "must be even and at most r");

    DiffExpression l = diff_expression(object(j, "l", root), root + ".l", c.d, c.r);
    WeightExpression m = weight_expression(object(j, "m", root), root + ".m", c.d, c.s);
    DiffExpression n = DiffExpression::zero(c.d, 0);
    if (j.contains("n")) {
        const json& nj = object(j, "n", root);
        int nr = integer(nj, "r", root + ".n", 0);
        if (nr % 2 || nr > c.r) throw SchemaError(root + ".n.r", "must be even and at most r");
        n = diff_expression(nj, root + ".n", c.d, nr);
    }
    try {
        c.family = LambdaFamily(l, m, n);
    } catch (const std::exception& e) {
        throw SchemaError(root, e.what());
    }

    const json& bj = object(j, "boundary", root);
    const int D = c.d * c.r;
    if (bj.contains("pair")) {
        const json& pj = object(bj, "pair", root + ".boundary");
        check_keys(pj, {"M", "N", "separated"}, root + ".boundary.pair");
        if (!pj.contains("M") || !pj.contains("N")) throw SchemaError(root + ".boundary.pair", "needs M and N");
        c.pair = BoundaryPair{matrix(pj["M"], root + ".boundary.pair.M", D, D),
                              matrix(pj["N"], root + ".boundary.pair.N", D, D), pj.value("separated", false)};
    } else if (bj.contains("separated")) {
        if (c.r % 2) throw SchemaError(root + ".boundary.separated", "needs even order");
        const int nd = D / 2;
        const json& sj = object(bj, "separated", root + ".boundary");
        check_keys(sj, {"a", "b", "gamma"}, root + ".boundary.separated");
        if (!sj.contains("a") || !sj.contains("b") || !sj.contains("gamma"))
            throw SchemaError(root + ".boundary.separated", "needs a, b and gamma");
        SeparatedSpec sp;
        sp.pair = {matrix(sj["a"], root + ".boundary.separated.a", nd, nd),
                   matrix(sj["b"], root + ".boundary.separated.b", nd, nd)};
        MatrixExpr g = matrix(sj["gamma"], root + ".boundary.separated.gamma", nd, D);
        if (g.has_lam()) throw SchemaError(root + ".boundary.separated.gamma", "must not depend on lam");
        sp.gamma = g.eval(0.0, 0.0);
        c.separated = sp;
    } else {
        throw SchemaError(root + ".boundary", "expected \"pair\" or \"separated\"");
    }

    if (j.contains("grid")) {
        const json& gj = object(j, "grid", root);
        check_keys(gj, {"N", "substeps"}, root + ".grid");
        c.N = integer(gj, "N", root + ".grid", 400);
        c.substeps = integer(gj, "substeps", root + ".grid", 4);
    }

    if (j.contains("lam")) {
        if (!j["lam"].is_array()) throw SchemaError(root + ".lam", "expected a list");
        for (std::size_t i = 0; i < j["lam"].size(); ++i)
            c.lams.push_back(lam_value(j["lam"][i], root + ".lam[" + std::to_string(i) + "]"));
    }
    if (j.contains("lam_grid")) {
        const json& lg = object(j, "lam_grid", root);
        auto axis = [&](const char* key) {
            std::string p = root + ".lam_grid." + key;
            if (!lg.contains(key) || !lg[key].is_array() || lg[key].size() != 3) throw SchemaError(p, "expected [lo, hi, count]");
            double lo = lg[key][0].get<double>(), hi = lg[key][1].get<double>();
            int cnt = lg[key][2].get<int>();
            if (cnt < 1) throw SchemaError(p, "count must be positive");
            std::vector<double> v;
            for (int i = 0; i < cnt; ++i) v.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1));
            return v;
        };
        for (double im : axis("im"))
            for (double re : axis("re")) c.lams.emplace_back(re, im);
    }
    if (c.lams.empty()) throw SchemaError(root + ".lam", "at least one lam is required");

    auto columns = [&](const char* key, std::vector<MatrixExpr>& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_array()) throw SchemaError(root + "." + key, "expected a list");
        for (std::size_t i = 0; i < j[key].size(); ++i)
            out.push_back(column(j[key][i], root + "." + key + "[" + std::to_string(i) + "]", c.d));
    };
    columns("functions", c.functions);
    columns("null_functions", c.null_functions);

    if (j.contains("oracle")) {
        if (!j["oracle"].is_array()) throw SchemaError(root + ".oracle", "expected a list");
        for (std::size_t i = 0; i < j["oracle"].size(); ++i) {
            std::string p = root + ".oracle[" + std::to_string(i) + "]";
            const json& oj = j["oracle"][i];
            if (!oj.is_object() || !oj.contains("y")) throw SchemaError(p, "expected {\"function\": k, \"y\": ...}");
            OracleSpec o;
            o.function = integer(oj, "function", p, 0);
            if (o.function < 0 || o.function >= static_cast<int>(c.functions.size()))
                throw SchemaError(p + ".function", "no such function");
            o.y = column(oj["y"], p + ".y", c.d);
            c.oracles.push_back(o);
        }
    }

    if (!j.contains("tasks") || !j["tasks"].is_array()) throw SchemaError(root + ".tasks", "expected a list");
    std::set<std::string> wanted;
    for (std::size_t i = 0; i < j["tasks"].size(); ++i) {
        const json& t = j["tasks"][i];
        std::string p = root + ".tasks[" + std::to_string(i) + "]";
        if (!t.is_string() || !kTasks.count(t.get<std::string>())) throw SchemaError(p, "unknown task");
        wanted.insert(t.get<std::string>());
    }
    for (const std::string& t : kTaskOrder)
        if (wanted.count(t)) c.tasks.push_back(t);

    static const std::set<std::string> needs_nonreal = {"resolve", "properties", "weyl", "green", "oracle"};
    for (const std::string& t : c.tasks)
        if (needs_nonreal.count(t))
            for (std::size_t i = 0; i < c.lams.size(); ++i)
                if (c.lams[i].imag() == 0.0)
                    throw SchemaError(root + ".lam[" + std::to_string(i) + "]", "nonreal λ required");
    if (wanted.count("weyl") && !c.separated) throw SchemaError(root + ".boundary", "weyl task needs a separated boundary");
    if (wanted.count("oracle") && c.oracles.empty()) throw SchemaError(root + ".oracle", "oracle task needs entries");

    c.tol = default_tolerances();
    if (j.contains("tolerances")) {
        const json& tj = object(j, "tolerances", root);
        for (auto it = tj.begin(); it != tj.end(); ++it) {
            std::string p = root + ".tolerances." + it.key();
            if (!c.tol.count(it.key())) throw SchemaError(p, "unknown tolerance");
            if (!it.value().is_number() || it.value().get<double>() <= 0.0) throw SchemaError(p, "expected a positive number");
            c.tol[it.key()] = it.value().get<double>();
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw SchemaError(root + ".seed", "expected a nonnegative integer");
        c.seed = j["seed"].get<unsigned>();
    }
    return c;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SchemaError(path, e.what());
    }
    return parse_config(j);
}

}  // namespace nevres::cli
