#include "nevres/forms.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace nevres {

namespace {

struct DerivCache {
    std::mutex mu;
    std::vector<MatrixExpr> d;
};

double pair_abs(cplx v) { return std::abs(v); }

}  // namespace

Fn expr_function(const MatrixExpr& f) {
    auto cache = std::make_shared<DerivCache>();
    cache->d.push_back(f);
    return [cache](double t, int K) {
        std::vector<MatrixExpr> ds;
        {
            std::lock_guard<std::mutex> lock(cache->mu);
            while (static_cast<int>(cache->d.size()) <= K) cache->d.push_back(cache->d.back().dt());
            ds.assign(cache->d.begin(), cache->d.begin() + K + 1);
        }
        FuncJet out;
        for (const auto& e : ds) out.push_back(e.eval(t, 0.0).col(0));
        return out;
    };
}

Fn zero_function(int d) {
    return [d](double, int K) { return FuncJet(static_cast<std::size_t>(K + 1), Vec::Zero(d)); };
}

Grid Grid::uniform(double a, double b, int N) {
    if (N < 8 || N % 2) throw std::invalid_argument("grid needs an even N >= 8");
    if (!(b > a)) throw std::invalid_argument("grid needs a < b");
    Grid g;
    g.a = a;
    g.b = b;
    g.N = N;
    g.t.resize(N + 1);
    for (int k = 0; k <= N; ++k) g.t[k] = a + (b - a) * k / N;
    g.t[N] = b;
    g.w = g.weights(0, N);
    return g;
}

std::vector<double> Grid::weights(int i0, int i1) const {
    if (i0 < 0 || i1 > N || i1 < i0 || (i1 - i0) % 2) throw std::invalid_argument("Simpson range must be even");
    std::vector<double> w(static_cast<std::size_t>(N + 1), 0.0);
    const double c = h() / 3.0;
    for (int k = i0; k < i1; k += 2) {
        w[k] += c;
        w[k + 1] += 4 * c;
        w[k + 2] += c;
    }
    return w;
}

cplx form_density(const Jets& L, const FuncJet& f, const FuncJet& g) { return dirichlet_density(L, f, g); }

cplx form_integral(const DiffExpression& L, const Fn& f, const Fn& g, const Grid& grid, cplx lam) {
    const int K = (L.r + 1) / 2;
    cplx sum = 0.0;
    for (int k = 0; k <= grid.N; ++k) {
        if (grid.w[k] == 0.0) continue;
        double t = grid.t[k];
        sum += grid.w[k] * dirichlet_density(L.jets(t, lam, 0), f(t, K), g(t, K));
    }
    return sum;
}

NullReport null_check(const WeightExpression& m, const Fn& f, const Grid& grid, double tol) {
    DiffExpression e = m.as_expression();
    e.prepare(1);
    const int k = m.s / 2, d = m.d;
    NullReport rep;
    double mass = 0.0;
    cplx val = 0.0;
    for (int i = 0; i <= grid.N; ++i) {
        double t = grid.t[i];
        Jets J = e.jets(t, 0.0, 0);
        FuncJet fj = f(t, k);
        Vec col((k + 1) * d);
        for (int j = 0; j <= k; ++j) col.segment(j * d, d) = fj[j];
        Mat F = form_matrix(J, k);
        Vec mv = F.topLeftCorner((k + 1) * d, (k + 1) * d) * col;
        rep.pointwise = std::max(rep.pointwise, mv.norm());
        val += grid.w[i] * col.dot(mv);
        mass += grid.w[i] * F.norm() * col.squaredNorm();
    }
    rep.value = val.real();
    rep.scale = std::max(1.0, mass);
    rep.is_null = rep.value <= tol * rep.scale;
    return rep;
}

RelationResiduals relation_checks(const LambdaFamily& fam, const Fn& f1, const Fn& f2, const Fn& y1,
                                  const Fn& y2, const Grid& grid, cplx lam) {
    const DiffExpression& L = fam.composed();
    const DiffExpression& Mw = fam.weight();
    const int r = L.r, s = Mw.r, K = r + 2;
    RelationResiduals out;
    double scale = 1.0;
    for (int i = 0; i <= grid.N; ++i) {
        double t = grid.t[i];
        Jets l = L.jets(t, lam, K), ls = l.adjoint();
        Jets m = Mw.jets(t, 0.0, K), ms = m.adjoint();
        Jets iml = l.imag_part().trimmed(1e-300);
        FuncJet F1 = f1(t, K), F2 = f2(t, K), Y1 = y1(t, K), Y2 = y2(t, K);

        // weight form
        Vec A1 = lift_F(l, s, F1), A2 = lift_F(l, s, F2);
        cplx lhs = A2.dot(build_W(l, m) * A1);
        cplx rhs = dirichlet_density(m, F1, F2);
        out.weight_form = std::max(out.weight_form, pair_abs(lhs - rhs));
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});

        // Im-balance
        Vec yb = lift_solution(l, m, Y1, F1);
        Vec Fs = lift_F(ls, s, F1);
        cplx a = yb.dot(build_W(l, iml * -1.0) * yb);
        cplx b = Fs.dot(build_W(ls, ms) * yb);
        cplx c = dirichlet_density(iml, Y1, Y1);
        cplx e = dirichlet_density(ms, Y1, F1);
        cplx left = a - b.imag(), right = -c - e.imag();
        out.imag_balance = std::max(out.imag_balance, std::abs(left - right));
        scale = std::max({scale, std::abs(a), std::abs(b), std::abs(c), std::abs(e)});

        // skew balance
        Vec yb1 = lift_solution(l, m, Y1, F1);
        Vec yb2 = lift_solution(ls, ms, Y2, F2);
        cplx p = dirichlet_density(m, Y1, F2) - dirichlet_density(m, F1, Y2);
        cplx q = A2.dot(build_W(l, m) * yb1) - yb2.dot(build_W(ls, m) * lift_F(ls, s, F1));
        out.skew_balance = std::max(out.skew_balance, std::abs(p - q));
        scale = std::max({scale, std::abs(p), std::abs(q)});
    }
    out.scale = scale;
    return out;
}

}  // namespace nevres
