#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nevres/coeff.hpp"
#include "random_expr.hpp"

using namespace nevres;

TEST_CASE("parse builds the expected trees") {
    ScalarExpr e = parse_expr("2*t + i");
    REQUIRE(e.node().op == Op::Add);
    CHECK(e.node().a->op == Op::Mul);
    CHECK(e.node().a->a->value == cplx(2.0, 0.0));
    CHECK(e.node().a->b->op == Op::T);
    CHECK(e.node().b->value == cplx(0.0, 1.0));

    ScalarExpr f = parse_expr("1/(lam - 3)");
    REQUIRE(f.node().op == Op::Div);
    CHECK(f.node().b->op == Op::Sub);
    CHECK(f.node().b->a->op == Op::Lam);
}

TEST_CASE("syntax errors carry the column") {
    try {
        parse_expr("sin(t^2");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.column == 8);
    }
    try {
        parse_expr("2*foo(t)");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.column == 3);
        CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_expr("1 +"), ParseError);
    CHECK_THROWS_AS(parse_expr("t^x"), ParseError);
    CHECK_THROWS_AS(parse_expr("(t))"), ParseError);
}

TEST_CASE("derivative examples") {
    CHECK(differentiate_t(parse_expr("t^3")) == parse_expr("3*t^2"));
    CHECK(differentiate_t(parse_expr("sin(2*t)")) == parse_expr("2*cos(2*t)"));
    CHECK(differentiate_t(parse_expr("1/(lam-3)")).is_zero());
}

TEST_CASE("matrix evaluation") {
    MatrixExpr m = MatrixExpr::parse({{"t", "0"}, {"0", "1"}});
    Mat v = eval_matrix(m, 2.0, 0.0);
    CHECK(v(0, 0) == cplx(2.0));
    CHECK(v(1, 1) == cplx(1.0));
    CHECK(v(0, 1) == cplx(0.0));
    CHECK(eval_matrix(MatrixExpr::parse({{"lam"}}), 0.0, {0.0, 1.0})(0, 0) == cplx(0.0, 1.0));
    try {
        eval_matrix(MatrixExpr::parse({{"1", "1/t"}}), 0.0, 0.0);
        FAIL("no error");
    } catch (const EvalError& e) {
        CHECK(e.row == 0);
        CHECK(e.col == 1);
    }
}

TEST_CASE("print/parse round trip on random trees") {
    std::mt19937 g(7);
    for (int k = 0; k < 500; ++k) {
        ScalarExpr e = testgen::random_expr(g, 4, true);
        ScalarExpr back = parse_expr(e.str());
        REQUIRE_MESSAGE(back == e, e.str());
        CHECK(parse_expr(back.str()).str() == back.str());
    }
}

TEST_CASE("symbolic derivative matches centered differences") {
    std::mt19937 g(11);
    std::uniform_real_distribution<double> ut(-1.0, 1.0), ul(-1.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        ScalarExpr e = testgen::random_expr(g, 3, true);
        ScalarExpr de = e.dt();
        double t = ut(g);
        cplx lam(ul(g), ul(g));
        const double h = 1e-5;
        cplx fd = (e.eval(t + h, lam) - e.eval(t - h, lam)) / (2 * h);
        double scale = std::max({1.0, std::abs(de.eval(t, lam)), std::abs(e.eval(t, lam))});
        if (!std::isfinite(std::abs(fd)) || scale > 1e6) continue;
        CHECK(std::abs(de.eval(t, lam) - fd) <= 1e-6 * scale);
        ++checked;
    }
}

TEST_CASE("expressions are holomorphic in lam") {
    std::mt19937 g(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        ScalarExpr e = testgen::random_expr(g, 3, true);
        double t = u(g);
        cplx lam(u(g), u(g));
        const double h = 1e-5;
        cplx dre = (e.eval(t, lam + h) - e.eval(t, lam - h)) / (2 * h);
        cplx dim = (e.eval(t, lam + cplx(0, h)) - e.eval(t, lam - cplx(0, h))) / cplx(0, 2 * h);
        double scale = std::max(1.0, std::abs(dre));
        if (scale > 1e6) continue;
        CHECK(std::abs(dre - dim) <= 1e-5 * scale);
    }
}

TEST_CASE("conjugation of lam-free expressions") {
    ScalarExpr e = parse_expr("(1+2*i)*t + sin(i*t)");
    ScalarExpr c = e.conj();
    CHECK(std::abs(c.eval(0.7, 0.0) - std::conj(e.eval(0.7, 0.0))) < 1e-14);
    CHECK_THROWS(parse_expr("lam*t").conj());
}
