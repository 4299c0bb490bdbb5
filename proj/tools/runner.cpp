#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/SVD>

namespace nevres::cli {

using nlohmann::json;

namespace {

const cplx I(0.0, 1.0);

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string fnv_digest(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<cplx> with_conjugates(const std::vector<cplx>& lams) {
    std::vector<cplx> out;
    auto add = [&](cplx z) {
        for (cplx w : out)
            if (w == z) return;
        out.push_back(z);
    };
    for (cplx z : lams) {
        add(z);
        add(std::conj(z));
    }
    return out;
}

class Problem {
public:
    explicit Problem(const ProblemConfig& cfg)
        : cfg(cfg), sys(cfg.family), grid(Grid::uniform(cfg.a, cfg.b, cfg.N)) {
        for (const MatrixExpr& f : cfg.functions) functions.push_back(expr_function(f));
    }

    Mat char_op(const FundamentalSolution& fs) const {
        if (cfg.pair) return char_op_from_pair(*cfg.pair, fs).M;
        const SeparatedSpec& sp = *cfg.separated;
        cplx lc = std::conj(fs.lam);
        Mat P = pair_projection(sp.pair.a_at(lc), sp.pair.b_at(lc), weyl_function(fs, sp.gamma));
        return char_op_from_projection(P, fs.G);
    }

    ResolventKernel kernel(cplx lam) const {
        FundamentalSolution fs = integrate_fundamental(sys, lam, grid, cfg.substeps);
        FundamentalSolution fc = integrate_fundamental(sys, std::conj(lam), grid, cfg.substeps);
        Mat M = char_op(fs);
        return ResolventKernel(sys, std::move(fs), std::move(fc), M);
    }

    CharOp char_op_fn() const {
        return [this](cplx lam) { return char_op(integrate_fundamental(sys, lam, grid, cfg.substeps)); };
    }

    const ProblemConfig& cfg;
    CanonicalSystem sys;
    Grid grid;
    std::vector<Fn> functions;
};

struct Solved {
    std::optional<ResolventKernel> K;
    std::vector<ResolventResult> results;
};

void bump(std::map<std::string, double>& r, const std::string& key, double v) {
    auto it = r.find(key);
    if (it == r.end()) r[key] = v;
    else it->second = std::max(it->second, v);
}

void low(std::map<std::string, double>& r, const std::string& key, double v) {
    auto it = r.find(key);
    if (it == r.end()) r[key] = v;
    else it->second = std::min(it->second, v);
}

double max_norm(const std::vector<Vec>& v) {
    double m = 0.0;
    for (const Vec& x : v) m = std::max(m, x.norm());
    return m;
}

class Runner {
public:
    Runner(const ProblemConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt), pb_(cfg) {}

    Report run() {
        Report rep;
        rep.name = cfg_.name;
        rep.digest = fnv_digest(cfg_.source.dump());
        rep.seed = cfg_.seed;
        rep.N = cfg_.N;
        rep.substeps = cfg_.substeps;
        rep.lams = cfg_.lams;
        for (const std::string& task : cfg_.tasks) {
            TaskRecord rec;
            rec.task = task;
            auto t0 = std::chrono::steady_clock::now();
            try {
                if (task == "validate") validate(rec);
                else if (task == "identities") identities(rec);
                else if (task == "resolve") resolve(rec);
                else if (task == "properties") properties(rec);
                else if (task == "weyl") weyl(rec);
                else if (task == "green") green(rec);
                else if (task == "oracle") oracle(rec);
            } catch (const std::exception& e) {
                rec.pass = false;
                rec.error = e.what();
            }
            for (auto& [k, v] : rec.residuals)
                if (!std::isfinite(v)) rec.pass = false;
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rep.tasks.push_back(rec);
        }
        if (solved_.size() == cfg_.lams.size()) {
            for (std::size_t li = 0; li < solved_.size(); ++li)
                for (std::size_t fi = 0; fi < solved_[li].results.size(); ++fi) {
                    Curve c;
                    c.lam_index = static_cast<int>(li);
                    c.f_index = static_cast<int>(fi);
                    c.lam = cfg_.lams[li];
                    c.t = pb_.grid.t;
                    c.y1 = solved_[li].results[fi].y1;
                    rep.curves.push_back(std::move(c));
                }
        }
        return rep;
    }

private:
    double tol(const char* key) const { return cfg_.tol.at(key); }

    void solve_all() {
        if (!solved_.empty()) return;
        std::vector<Solved> out(cfg_.lams.size());
        parallel_for(static_cast<int>(out.size()), opt_.jobs, [&](int i) {
            out[i].K.emplace(pb_.kernel(cfg_.lams[i]));
            for (const Fn& f : pb_.functions) out[i].results.push_back(out[i].K->apply(f));
        });
        solved_ = std::move(out);
    }

    void validate(TaskRecord& rec) {
        std::vector<double> ts;
        for (int i = 0; i <= 20; ++i) ts.push_back(cfg_.a + (cfg_.b - cfg_.a) * i / 20.0);
        std::vector<cplx> lams;
        for (cplx z : with_conjugates(cfg_.lams))
            if (z.imag() != 0.0) lams.push_back(z);
        if (lams.empty()) lams = {I, -I};
        ValidationReport vr = cfg_.family.validate(ts, lams);
        rec.residuals["symmetry"] = vr.symmetry;
        rec.residuals["nevanlinna"] = vr.nevanlinna;
        rec.residuals["domination"] = vr.domination;
        rec.pass = vr.ok(tol("validate"));
        for (cplx lam : lams) {
            if (cfg_.pair) {
                PairReport pr = validate_pair(*cfg_.pair, pb_.sys, cfg_.a, cfg_.b, lam);
                bump(rec.residuals, "pair_flux", pr.flux);
                bump(rec.residuals, "pair_dissipativity", pr.dissipativity);
                low(rec.residuals, "pair_sigma_min", pr.sigma_min);
                rec.pass = rec.pass && pr.ok(tol("boundary"));
            } else {
                NevanlinnaPairReport nr = check_pair(cfg_.separated->pair, pb_.sys, cfg_.a, lam);
                bump(rec.residuals, "pair_symmetry", nr.symmetry);
                low(rec.residuals, "pair_dissipativity", nr.dissipativity);
                low(rec.residuals, "k_sigma_min", nr.k_sigma_min);
                rec.pass = rec.pass && nr.symmetry <= tol("weyl") && nr.dissipativity >= -tol("weyl") &&
                           nr.k_sigma_min > tol("weyl");
            }
        }
    }

    void identities(TaskRecord& rec) {
        std::mt19937 gen(cfg_.seed);
        std::normal_distribution<double> nd;
        const int r = cfg_.r, d = cfg_.d;
        double worst = 0.0;
        for (cplx lam : with_conjugates(cfg_.lams))
            for (int i = 0; i <= 20; ++i) {
                double t = cfg_.a + (cfg_.b - cfg_.a) * i / 20.0;
                Jets J = cfg_.family.composed().jets(t, lam, r + 3);
                Jets mj = cfg_.family.weight().jets(t, 0.0, r + 3);
                FuncJet f(r + 5, Vec::Zero(d));
                for (Vec& v : f)
                    for (int k = 0; k < d; ++k) v(k) = cplx(nd(gen), nd(gen));
                IdentityResiduals res = check_identities(J, mj, f, cfg_.seed + i);
                double scale = std::max(1.0, build_H(J).norm());
                bump(rec.residuals, "im_h", res.im_h / scale);
                bump(rec.residuals, "im_h_alt", res.im_h_alt / scale);
                bump(rec.residuals, "hermitian", res.hermitian / scale);
                bump(rec.residuals, "padding", res.padding / scale);
                bump(rec.residuals, "weighted_lift", res.wf / scale);
                bump(rec.residuals, "null_free", res.null_free / scale);
            }
        for (auto& [k, v] : rec.residuals) worst = std::max(worst, v);
        rec.pass = worst <= tol("identities");
        for (std::size_t i = 0; i < cfg_.null_functions.size(); ++i) {
            NullReport nr = null_check(cfg_.family.m, expr_function(cfg_.null_functions[i]), pb_.grid, tol("null"));
            bump(rec.residuals, "null_value", std::abs(nr.value) / nr.scale);
            bump(rec.residuals, "null_pointwise", nr.pointwise / nr.scale);
            rec.pass = rec.pass && nr.is_null;
        }
    }

    void resolve(TaskRecord& rec) {
        solve_all();
        rec.residuals["ode"] = rec.residuals["boundary"] = 0.0;
        for (std::size_t li = 0; li < solved_.size(); ++li) {
            const Solved& s = solved_[li];
            BoundaryPair bp = cfg_.pair ? *cfg_.pair : separated_pair(cfg_.lams[li]);
            for (const ResolventResult& res : s.results) {
                OdeBcReport o = residuals_ode_bc(*s.K, res, bp);
                bump(rec.residuals, "ode", o.ode / o.scale);
                bump(rec.residuals, "boundary", o.boundary / o.scale);
                bump(rec.residuals, "max_y1", max_norm(res.y1));
            }
        }
        rec.pass = rec.residuals["ode"] <= tol("ode") && rec.residuals["boundary"] <= tol("boundary");
    }

    /// The separated conditions as a coupled pair at lam: x(a) = col(a, b) h1, x(b) = null(Gamma) h2.
    BoundaryPair separated_pair(cplx lam) const {
        const SeparatedSpec& sp = *cfg_.separated;
        const int D = pb_.sys.dim(), n = D / 2;
        Mat A(D, n);
        A << sp.pair.a_at(lam), sp.pair.b_at(lam);
        Eigen::JacobiSVD<Mat> svd(sp.gamma, Eigen::ComputeFullV);
        Mat Nb = svd.matrixV().rightCols(D - n);
        auto constant = [](const Mat& m) {
            MatrixExpr e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j) e(i, j) = ScalarExpr::constant(m(i, j));
            return e;
        };
        Mat M = Mat::Zero(D, D), N = Mat::Zero(D, D);
        M.leftCols(n) = A;
        N.rightCols(D - n) = Nb;
        return {constant(M), constant(N), true};
    }

    void properties(TaskRecord& rec) {
        std::vector<cplx> lams = with_conjugates(cfg_.lams);
        std::vector<SuiteReport> suites(lams.size());
        parallel_for(static_cast<int>(lams.size()), opt_.jobs, [&](int i) {
            if (lams[i].imag() < 0.0) return;
            ResolventFactory R = [this](cplx z) { return pb_.kernel(z); };
            suites[i] = property_suite(R, pb_.functions, {lams[i], std::conj(lams[i])}, true);
        });
        rec.pass = true;
        for (std::size_t i = 0; i < lams.size(); ++i) {
            if (lams[i].imag() < 0.0) continue;
            const SuiteReport& s = suites[i];
            bump(rec.residuals, "adjoint", s.adjoint);
            bump(rec.residuals, "nevanlinna", s.nevanlinna);
            bump(rec.residuals, "equality", s.equality);
            low(rec.residuals, "norm_slack", s.norm_slack);
            low(rec.residuals, "weighted_slack", s.weighted_slack);
            bump(rec.residuals, "contour", s.contour);
            rec.pass = rec.pass && s.ok(tol("adjoint"), tol("nevanlinna"), tol("norm"), tol("contour"));
        }
        std::vector<Fn> trials = bump_trials(pb_.sys.dim(), 3, cfg_.seed, cfg_.a, cfg_.b);
        std::vector<cplx> up;
        for (cplx z : lams)
            if (z.imag() > 0.0) up.push_back(z);
        Certificate cert = verify_characteristic(pb_.char_op_fn(), pb_.sys, pb_.grid, trials, up, cfg_.substeps);
        rec.residuals["cert_flux"] = cert.flux / cert.scale;
        rec.residuals["cert_symmetry"] = cert.symmetry / cert.scale;
        rec.residuals["cert_contour"] = cert.contour;
        rec.pass = rec.pass && cert.ok(tol("contour"));
        if (cfg_.separated || (cfg_.pair && cfg_.pair->separated)) {
            rec.residuals["cert_left"] = cert.left / cert.scale;
            rec.residuals["cert_right"] = cert.right / cert.scale;
            rec.pass = rec.pass && cert.separated(tol("contour"));
        }
    }

    void weyl(TaskRecord& rec) {
        const SeparatedSpec& sp = *cfg_.separated;
        std::vector<cplx> lams = with_conjugates(cfg_.lams);
        std::vector<WeylData> ws(lams.size());
        std::vector<std::map<std::string, double>> part(lams.size());
        parallel_for(static_cast<int>(lams.size()), opt_.jobs, [&](int i) {
            cplx lam = lams[i], lc = std::conj(lam);
            FundamentalSolution fs = integrate_fundamental(pb_.sys, lam, pb_.grid, cfg_.substeps);
            Mat P = char_projection(pb_.char_op(fs), fs.G);
            ProjectionFactors pf = factor_projection(P, tol("weyl"));
            Mat m = weyl_function(fs, sp.gamma);
            part[i]["factor_residual"] = pf.residual;
            part[i]["m_mismatch"] = (pf.m - m).norm() / std::max(1.0, m.norm());
            Mat rebuilt = pair_projection(sp.pair.a_at(lc), sp.pair.b_at(lc), pf.m);
            part[i]["round_trip"] = (rebuilt - P).norm() / std::max(1.0, P.norm());
            ws[i] = weyl_solutions(sp.pair, fs, m, sp.gamma);
            part[i]["right_residual"] = ws[i].right_residual;
        });
        for (const auto& p : part)
            for (const auto& [k, v] : p) bump(rec.residuals, k, v);
        HerglotzReport hr = herglotz_check(pb_.sys, pb_.grid, ws);
        rec.residuals["herglotz_im_min"] = hr.im_min;
        rec.residuals["herglotz_symmetry"] = hr.symmetry;
        rec.residuals["v_slack"] = hr.v_slack;
        rec.residuals["w_slack"] = hr.w_slack;
        bool pass = rec.residuals["factor_residual"] <= tol("weyl") && rec.residuals["m_mismatch"] <= tol("weyl") &&
                    rec.residuals["round_trip"] <= tol("weyl") && rec.residuals["right_residual"] <= tol("weyl") &&
                    hr.im_min >= -tol("norm") && hr.symmetry <= tol("weyl") && hr.v_slack >= -tol("norm") &&
                    hr.w_slack >= -tol("norm");
        solve_all();
        rec.residuals["split"] = 0.0;
        for (std::size_t li = 0; li < cfg_.lams.size(); ++li) {
            auto at = [&](cplx z) -> const WeylData& {
                for (std::size_t i = 0; i < lams.size(); ++i)
                    if (lams[i] == z) return ws[i];
                throw std::logic_error("missing lam");
            };
            const WeylData& wd = at(cfg_.lams[li]);
            const WeylData& wc = at(std::conj(cfg_.lams[li]));
            for (std::size_t fi = 0; fi < pb_.functions.size(); ++fi) {
                std::vector<Vec> y = split_resolvent(pb_.sys, wd, wc, pb_.grid, pb_.functions[fi]);
                const ResolventResult& res = solved_[li].results[fi];
                double err = 0.0;
                for (std::size_t k = 0; k < y.size(); ++k) err = std::max(err, (y[k] - res.y1[k]).norm());
                bump(rec.residuals, "split", err / std::max(1.0, max_norm(res.x)));
            }
        }
        rec.pass = pass && rec.residuals["split"] <= tol("split");
    }

    void green(TaskRecord& rec) {
        solve_all();
        rec.residuals["green"] = 0.0;
        for (const Solved& s : solved_) {
            const ResolventKernel& K = *s.K;
            for (std::size_t fi = 0; fi < s.results.size(); ++fi) {
                const ResolventResult& res = s.results[fi];
                const Fn& f = pb_.functions[fi];
                cplx yf = m_inner(K, res, f), yy = m_inner(K, res, K, res);
                cplx lhs = std::conj(yf) - yf + 2.0 * I * K.lam().imag() * yy;
                const Vec &xa = res.x.front(), &xb = res.x.back();
                cplx rhs = I * (xb.dot(K.fs().R.back() * xb) - xa.dot(K.fs().R.front() * xa));
                double scale = std::max({1.0, std::abs(yf), std::abs(K.lam().imag() * yy), std::abs(rhs)});
                bump(rec.residuals, "green", std::abs(lhs - rhs) / scale);
            }
        }
        rec.pass = rec.residuals["green"] <= tol("green");
    }

    void oracle(TaskRecord& rec) {
        solve_all();
        rec.residuals["oracle"] = 0.0;
        for (std::size_t li = 0; li < solved_.size(); ++li)
            for (const OracleSpec& o : cfg_.oracles) {
                const ResolventResult& res = solved_[li].results[o.function];
                double err = 0.0, size = 0.0;
                for (int k = 0; k <= pb_.grid.N; ++k) {
                    Vec y = o.y.eval(pb_.grid.t[k], cfg_.lams[li]).col(0);
                    err = std::max(err, (res.y1[k] - y).norm());
                    size = std::max(size, y.norm());
                }
                bump(rec.residuals, "oracle", size > 0.0 ? err / size : err);
            }
        rec.pass = rec.residuals["oracle"] <= tol("oracle");
    }

    const ProblemConfig& cfg_;
    RunOptions opt_;
    Problem pb_;
    std::vector<Solved> solved_;
};

std::string num17(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void dump(const json& j, std::string& out, int indent) {
    std::string pad(indent, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + "  " + json(it.key()).dump() + ": ";
                dump(it.value(), out, indent + 2);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            bool first = true;
            for (const json& v : j) {
                if (!first) out += ", ";
                first = false;
                dump(v, out, indent);
            }
            out += "]";
            return;
        }
        case json::value_t::number_float: out += num17(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace

bool Report::ok() const {
    for (const TaskRecord& t : tasks)
        if (!t.pass) return false;
    return true;
}

Report run(const ProblemConfig& cfg, const RunOptions& opt) { return Runner(cfg, opt).run(); }

std::string structured(const Report& rep, bool timing) {
    json j;
    j["name"] = rep.name;
    j["digest"] = rep.digest;
    j["seed"] = rep.seed;
    j["grid"] = {{"N", rep.N}, {"substeps", rep.substeps}};
    json lams = json::array();
    for (cplx z : rep.lams) lams.push_back({z.real(), z.imag()});
    j["lam"] = lams;
    json tasks = json::array();
    for (const TaskRecord& t : rep.tasks) {
        json r;
        r["task"] = t.task;
        r["status"] = t.pass ? "pass" : "fail";
        json res = json::object();
        for (const auto& [k, v] : t.residuals) res[k] = v;
        r["residuals"] = res;
        if (!t.error.empty()) r["error"] = t.error;
        if (timing) r["seconds"] = t.seconds;
        tasks.push_back(r);
    }
    j["tasks"] = tasks;
    j["status"] = rep.ok() ? "pass" : "fail";
    std::string out;
    dump(j, out, 0);
    return out + "\n";
}

void write_curve(std::ostream& out, const Curve& c) {
    const int d = c.y1.empty() ? 1 : static_cast<int>(c.y1.front().size());
    out << "t";
    for (int i = 0; i < d; ++i) {
        std::string sfx = d == 1 ? "" : "_" + std::to_string(i + 1);
        out << ",Re y1" << sfx << ",Im y1" << sfx;
    }
    out << "\n";
    for (std::size_t k = 0; k < c.t.size(); ++k) {
        out << num17(c.t[k]);
        for (int i = 0; i < d; ++i) out << "," << num17(c.y1[k](i).real()) << "," << num17(c.y1[k](i).imag());
        out << "\n";
    }
}

std::string summary_table(const Report& rep) {
    std::ostringstream os;
    for (const TaskRecord& t : rep.tasks) {
        char head[64];
        std::snprintf(head, sizeof head, "%-11s %-4s %8.3fs", t.task.c_str(), t.pass ? "PASS" : "FAIL", t.seconds);
        os << head;
        for (const auto& [k, v] : t.residuals) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "  %s=%.3g", k.c_str(), v);
            os << buf;
        }
        if (!t.error.empty()) os << "  error: " << t.error;
        os << "\n";
    }
    return os.str();
}

}  // namespace nevres::cli
