#pragma once

#include <random>

#include "nevres/coeff.hpp"
#include "nevres/expr.hpp"

namespace testgen {

using namespace nevres;

/// Random smooth expression in t (and optionally lam), depth-limited, no poles on [-2, 2].
inline ScalarExpr random_expr(std::mt19937& g, int depth, bool with_lam) {
    std::uniform_int_distribution<int> pick(0, with_lam ? 9 : 8);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    if (depth == 0) {
        int k = pick(g) % 3;
        if (k == 0) return ScalarExpr::constant({u(g), u(g)});
        if (k == 1 || !with_lam) return ScalarExpr::t();
        return ScalarExpr::lam();
    }
    ScalarExpr a = random_expr(g, depth - 1, with_lam), b = random_expr(g, depth - 1, with_lam);
    switch (pick(g)) {
        case 0: return a + b;
        case 1: return a - b;
        case 2: return a * b;
        case 3: return a / (ScalarExpr::constant(3.0) + pow(ScalarExpr::t(), 2));
        case 4: return pow(a, 2);
        case 5: return sin(a);
        case 6: return cos(a);
        case 7: return exp(a * ScalarExpr::constant(0.3));
        case 8: return sqrt(ScalarExpr::constant(4.0) + pow(ScalarExpr::t(), 2)) * a;
        default: return a * ScalarExpr::lam() + b;
    }
}

/// Random polynomial in t of the given degree with complex coefficients.
inline ScalarExpr random_poly(std::mt19937& g, int deg, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    ScalarExpr e = ScalarExpr::constant({nd(g), nd(g)});
    for (int k = 1; k <= deg; ++k) e = e + ScalarExpr::constant({nd(g), nd(g)}) * pow(ScalarExpr::t(), k);
    return e;
}

inline MatrixExpr random_matrix(std::mt19937& g, int d, int deg, double scale = 1.0) {
    MatrixExpr m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = random_poly(g, deg, scale);
    return m;
}

inline MatrixExpr hermitian_matrix(std::mt19937& g, int d, int deg, double scale = 1.0) {
    MatrixExpr m = random_matrix(g, d, deg, scale);
    return ScalarExpr::constant(0.5) * (m + m.adjoint());
}

}  // namespace testgen

namespace testgen {

/// Random order-r expression with polynomial coefficients; p_n is shifted to stay
/// invertible and, for odd r, s_{n+1} = q_{n+1}* so that Im l has even order.
inline DiffExpression random_diff(std::mt19937& g, int d, int r, int deg = 2) {
    DiffExpression e = DiffExpression::zero(d, r);
    for (auto& m : e.p) m = random_matrix(g, d, deg, 0.5);
    for (std::size_t j = 1; j < e.q.size(); ++j) {
        e.q[j] = random_matrix(g, d, deg, 0.5);
        e.s[j] = random_matrix(g, d, deg, 0.5);
    }
    int n = r / 2;
    if (r % 2 == 0) {
        e.p[n] = e.p[n] + MatrixExpr::scalar(d, ScalarExpr::constant(3.0));
    } else {
        e.q[n + 1] = e.q[n + 1] + MatrixExpr::scalar(d, ScalarExpr::constant(3.0));
        e.s[n + 1] = e.q[n + 1].adjoint();
    }
    e.prepare(r + 4);
    return e;
}

inline WeightExpression random_weight(std::mt19937& g, int d, int s, int deg = 2) {
    WeightExpression w = WeightExpression::zero(d, s);
    for (auto& m : w.pt) m = hermitian_matrix(g, d, deg, 0.5);
    for (std::size_t j = 1; j < w.qt.size(); ++j) w.qt[j] = random_matrix(g, d, deg, 0.5);
    return w;
}

inline MatrixExpr random_function(std::mt19937& g, int d) {
    MatrixExpr f(d, 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < d; ++i)
        f(i, 0) = random_poly(g, 3, 0.7) +
                  ScalarExpr::constant({u(g), u(g)}) * sin(ScalarExpr::constant(1.0 + u(g)) * ScalarExpr::t());
    return f;
}

}  // namespace testgen
