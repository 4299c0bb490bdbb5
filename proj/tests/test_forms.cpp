#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nevres/forms.hpp"
#include "random_expr.hpp"

using namespace nevres;

namespace {

const double PI = 3.14159265358979323846;

MatrixExpr fn(const std::string& src) { return MatrixExpr::parse({{src}}); }

WeightExpression null_weight() {
    WeightExpression m = WeightExpression::zero(1, 2);
    m.pt[0] = fn("1");
    m.pt[1] = fn("1");
    m.qt[1] = fn("2");
    return m;
}

}  // namespace

TEST_CASE("form densities") {
    WeightExpression m0 = WeightExpression::zero(1, 0);
    m0.pt[0] = fn("1");
    DiffExpression e0 = m0.as_expression();
    Fn f = expr_function(fn("t"));
    CHECK(std::abs(form_density(e0.jets(2.0, 0.0, 0), f(2.0, 1), f(2.0, 1)) - 4.0) < 1e-15);

    WeightExpression m2 = WeightExpression::zero(1, 2);
    m2.pt[1] = fn("1");
    DiffExpression e2 = m2.as_expression();
    CHECK(std::abs(form_density(e2.jets(0.7, 0.0, 0), f(0.7, 1), f(0.7, 1)) - 1.0) < 1e-15);

    // r = 2, p1 = 1, q1 = 2i, s1 = q1* = -2i, f = g = e^{it} at t = 0:
    // p1 |f'|^2 + (i/2)[(s1 f', f) - (q1 f, f')] = 1 + (i/2)(-2i*i - 2i*(-i)) = 1 + (i/2)(2 - 2) = 1
    DiffExpression l = DiffExpression::zero(1, 2);
    l.p[1] = fn("1");
    l.q[1] = fn("2*i");
    l.s[1] = fn("-2*i");
    Fn e = expr_function(fn("exp(i*t)"));
    cplx direct = 1.0 + cplx(0, 0.5) * (cplx(0, -2) * cplx(0, 1) - cplx(0, 2) * std::conj(cplx(0, 1)));
    CHECK(std::abs(form_density(l.jets(0.0, 0.0, 0), e(0.0, 1), e(0.0, 1)) - direct) < 1e-15);
}

TEST_CASE("form integrals") {
    WeightExpression m0 = WeightExpression::zero(1, 0);
    m0.pt[0] = fn("1");
    Grid g = Grid::uniform(0.0, PI, 200);
    Fn s = expr_function(fn("sin(t)"));
    CHECK(std::abs(form_integral(m0.as_expression(), s, s, g) - PI / 2) < 1e-8);
    CHECK(form_integral(m0.as_expression(), zero_function(1), zero_function(1), g) == cplx(0.0));

    Fn f0 = expr_function(fn("exp(i*t)"));
    CHECK(std::abs(form_integral(null_weight().as_expression(), f0, f0, g)) < 1e-10);
}

TEST_CASE("grid") {
    CHECK_THROWS(Grid::uniform(0, 1, 7));
    CHECK_THROWS(Grid::uniform(0, 1, 6));
    Grid g = Grid::uniform(-1, 2, 8);
    double sum = 0;
    for (double w : g.w) sum += w;
    CHECK(std::abs(sum - 3.0) < 1e-14);
    auto w = g.weights(2, 6);
    double cubic = 0;
    for (int k = 0; k <= g.N; ++k) cubic += w[k] * std::pow(g.t[k], 3);
    CHECK(std::abs(cubic - (std::pow(g.t[6], 4) - std::pow(g.t[2], 4)) / 4) < 1e-13);
}

TEST_CASE("null detection") {
    Grid g = Grid::uniform(0.0, PI, 64);
    NullReport a = null_check(null_weight(), expr_function(fn("exp(i*t)")), g);
    CHECK(a.is_null);
    CHECK(a.pointwise <= 1e-12);
    CHECK(std::abs(a.value) <= 1e-10);

    WeightExpression m0 = WeightExpression::zero(1, 0);
    m0.pt[0] = fn("1");
    CHECK_FALSE(null_check(m0, expr_function(fn("sin(t)")), g).is_null);
    CHECK(null_check(m0, zero_function(1), g).is_null);

    // the other solution of m[f] = 0 is not null
    NullReport b = null_check(null_weight(), expr_function(fn("t*exp(i*t)")), g);
    CHECK_FALSE(b.is_null);
    CHECK(std::abs(b.value - PI) < 1e-8);
}

TEST_CASE("semi-inner product properties") {
    std::mt19937 gen(11);
    Grid g = Grid::uniform(-1.0, 1.0, 64);
    for (int d = 1; d <= 2; ++d)
        for (int s : {0, 2, 4}) {
            WeightExpression m = testgen::random_weight(gen, d, s);
            // shift the top coefficient so the weight is positive on the grid
            m.pt[s / 2] = m.pt[s / 2] + MatrixExpr::scalar(d, ScalarExpr::constant(4.0));
            DiffExpression e = m.as_expression();
            e.prepare(2);
            Fn f = expr_function(testgen::random_function(gen, d));
            Fn h = expr_function(testgen::random_function(gen, d));
            cplx fh = form_integral(e, f, h, g), hf = form_integral(e, h, f, g);
            cplx ff = form_integral(e, f, f, g), hh = form_integral(e, h, h, g);
            double scale = std::abs(ff) + std::abs(hh);
            CHECK(std::abs(fh - std::conj(hf)) < 1e-12 * scale);
            CHECK(std::abs(ff.imag()) < 1e-12 * scale);
            CHECK(std::norm(fh) <= ff.real() * hh.real() + 1e-10 * scale * scale);
        }
}

TEST_CASE("form relations on random families") {
    std::mt19937 gen(5);
    Grid g = Grid::uniform(-0.5, 0.5, 8);
    for (int r = 1; r <= 4; ++r)
        for (int d = 1; d <= 2; ++d)
            for (int s = 0; s <= 2 * (r / 2); s += 2) {
                DiffExpression l = testgen::random_diff(gen, d, r);
                WeightExpression m = testgen::random_weight(gen, d, s);
                LambdaFamily fam(l, m, DiffExpression::zero(d, 0));
                Fn f1 = expr_function(testgen::random_function(gen, d));
                Fn f2 = expr_function(testgen::random_function(gen, d));
                Fn y1 = expr_function(testgen::random_function(gen, d));
                Fn y2 = expr_function(testgen::random_function(gen, d));
                RelationResiduals res = relation_checks(fam, f1, f2, y1, y2, g, cplx(0.3, 0.8));
                INFO("r=" << r << " d=" << d << " s=" << s);
                CHECK(res.weight_form <= 1e-9 * res.scale);
                CHECK(res.imag_balance <= 1e-9 * res.scale);
                CHECK(res.skew_balance <= 1e-9 * res.scale);
            }
}

TEST_CASE("Im-balance with zero data reduces to the Im-form") {
    DiffExpression l = DiffExpression::zero(1, 2);
    l.p[1] = fn("1");
    WeightExpression m = WeightExpression::zero(1, 0);
    m.pt[0] = fn("1");
    LambdaFamily fam(l, m, DiffExpression::zero(1, 0));
    Grid g = Grid::uniform(0, 1, 8);
    Fn z = zero_function(1), y = expr_function(fn("cos(2*t)+i*t"));
    RelationResiduals res = relation_checks(fam, z, z, y, y, g, cplx(0.0, 1.0));
    CHECK(res.imag_balance < 1e-14);
    CHECK(res.weight_form == 0.0);
}
