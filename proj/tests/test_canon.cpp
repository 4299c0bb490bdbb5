#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nevres/canon.hpp"
#include "random_expr.hpp"

using namespace nevres;

namespace {

const cplx I(0.0, 1.0);

DiffExpression scalar_expr(int r, std::vector<std::string> p, std::vector<std::string> q,
                           std::vector<std::string> s) {
    DiffExpression e = DiffExpression::zero(1, r);
    for (std::size_t j = 0; j < p.size(); ++j) e.p[j] = MatrixExpr::parse({{p[j]}});
    for (std::size_t j = 0; j < q.size(); ++j) e.q[j + 1] = MatrixExpr::parse({{q[j]}});
    for (std::size_t j = 0; j < s.size(); ++j) e.s[j + 1] = MatrixExpr::parse({{s[j]}});
    e.prepare(r + 3);
    return e;
}

MatrixExpr fn(const std::string& src) { return MatrixExpr::parse({{src}}); }

Mat m2(cplx a, cplx b, cplx c, cplx d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("Q blocks") {
    CHECK((build_Q(scalar_expr(2, {"0", "1"}, {"0"}, {"0"}).jets(0, 0, 1)) - m2(0, I, -I, 0)).norm() == 0);
    CHECK(build_Q(scalar_expr(1, {"0"}, {"1"}, {"1"}).jets(0, 0, 1))(0, 0) == cplx(1));
    Mat Q3 = build_Q(scalar_expr(3, {"0", "0"}, {"0", "1"}, {"0", "1"}).jets(0, 0, 1));
    Mat expect = Mat::Zero(3, 3);
    expect(0, 1) = I;
    expect(1, 0) = -I;
    expect(2, 2) = 1;
    CHECK((Q3 - expect).norm() == 0);
}

TEST_CASE("H blocks") {
    Mat H = build_H(scalar_expr(2, {"t+1", "1"}, {"0"}, {"0"}).jets(2.0, 0, 1));
    CHECK((H - m2(-3, 0, 0, 1)).norm() == 0);
    CHECK(build_H(scalar_expr(1, {"7"}, {"1"}, {"1"}).jets(0, 0, 1))(0, 0) == cplx(-7));
    Mat H4 = build_H(scalar_expr(4, {"0", "0", "1"}, {"0", "0"}, {"0", "0"}).jets(0, 0, 1));
    CHECK(H4.topLeftCorner(2, 2).norm() == 0);
    CHECK((H4.topRightCorner(2, 2) - m2(0, 0, 1, 0)).norm() == 0);
    CHECK((H4.bottomLeftCorner(2, 2) - m2(0, 1, 0, 0)).norm() == 0);
    CHECK((H4.bottomRightCorner(2, 2) - m2(0, 0, 0, 1)).norm() == 0);
}

TEST_CASE("C transform") {
    CHECK((build_C(scalar_expr(2, {"0", "1"}, {"0"}, {"0"}).jets(0, 0, 2)) - Mat::Identity(2, 2)).norm() == 0);
    CHECK((build_C(scalar_expr(2, {"0", "1"}, {"2"}, {"0"}).jets(0, 0, 2)) - m2(1, 0, -I, 1)).norm() == 0);
    CHECK((build_C(scalar_expr(2, {"0", "5"}, {"0"}, {"0"}).jets(0, 0, 2)) - m2(1, 0, 0, 5)).norm() == 0);
}

TEST_CASE("C block pattern") {
    std::mt19937 g(3);
    for (int n : {1, 2}) {
        for (int d : {1, 2}) {
            DiffExpression e = testgen::random_diff(g, d, 2 * n);
            Jets J = e.jets(0.3, 0.0, 2 * n + 2);
            Mat C = build_C(J);
            CHECK((C.topLeftCorner(n * d, n * d) - Mat::Identity(n * d, n * d)).norm() == 0);
            CHECK(C.topRightCorner(n * d, n * d).norm() == 0);
            for (int a = 0; a < n; ++a) {
                double sign = ((n - 1 - a) % 2) ? -1.0 : 1.0;
                CHECK((C.block((n + a) * d, (n + a) * d, d, d) - sign * J.get(Kind::P, n)).norm() < 1e-14);
                CHECK((C.block((n + a) * d, a * d, d, d) + 0.5 * I * J.get(Kind::Q, a + 1)).norm() < 1e-14);
                for (int b = 0; b < a; ++b) {
                    CHECK(C.block((n + a) * d, b * d, d, d).norm() == 0);
                    CHECK(C.block((n + a) * d, (n + b) * d, d, d).norm() == 0);
                }
            }
        }
    }
}

TEST_CASE("W examples") {
    WeightExpression w = WeightExpression::zero(1, 0);
    w.pt[0] = fn("1");
    Jets mj = w.as_expression().jets(0, 0, 2);
    CHECK((build_W(scalar_expr(2, {"0", "1"}, {"0"}, {"0"}).jets(0, 0, 2), mj) - m2(1, 0, 0, 0)).norm() == 0);
    CHECK(build_W(scalar_expr(1, {"0"}, {"1"}, {"1"}).jets(0, 0, 2), mj)(0, 0) == cplx(1));
    WeightExpression w2 = WeightExpression::zero(1, 2);
    w2.pt[1] = fn("1");
    Mat W = build_W(scalar_expr(2, {"0", "1"}, {"0"}, {"0"}).jets(0, 0, 2), w2.as_expression().jets(0, 0, 2));
    CHECK((W - m2(0, 0, 0, 1)).norm() == 0);
}

TEST_CASE("quasi-derivative examples") {
    DiffExpression e = scalar_expr(2, {"0", "1"}, {"0"}, {"0"});
    QuasiTable T = quasi_table(e.jets(1.0, 0, 3), 0);
    FuncJet f = function_jet(fn("t^2"), 1.0, 3);
    CHECK(std::abs(T.apply(1, f)(0) - 2.0) < 1e-15);
    CHECK(std::abs(T.apply(2, f)(0) + 2.0) < 1e-15);

    DiffExpression e1 = scalar_expr(1, {"0"}, {"1"}, {"1"});
    QuasiTable T1 = quasi_table(e1.jets(0.4, 0, 3), 0);
    CHECK(std::abs(T1.apply(0, function_jet(fn("1"), 0.4, 2))(0) + 0.5 * I) < 1e-15);

    DiffExpression e2 = scalar_expr(2, {"0", "1"}, {"2"}, {"0"});
    QuasiTable T2 = quasi_table(e2.jets(0.0, 0, 3), 0);
    CHECK(std::abs(T2.apply(1, function_jet(fn("exp(t)"), 0.0, 3))(0) - cplx(1, -1)) < 1e-15);
}

TEST_CASE("lift examples") {
    DiffExpression l2 = scalar_expr(2, {"0", "1"}, {"0"}, {"0"});
    Jets J = l2.jets(0.5, 0, 4);
    FuncJet f = function_jet(fn("t"), 0.5, 4);
    Vec F0 = lift_F(J, 0, f);
    CHECK(std::abs(F0(0) - 0.5) < 1e-15);
    CHECK(F0(1) == cplx(0));
    Vec F2 = lift_F(J, 2, f);
    CHECK(std::abs(F2(0) - 0.5) < 1e-15);
    CHECK(std::abs(F2(1) - 1.0) < 1e-15);
    Jets J1 = scalar_expr(1, {"0"}, {"1"}, {"1"}).jets(0.5, 0, 4);
    CHECK(lift_F(J1, 0, f)(0) == f[0](0));

    WeightExpression w2 = WeightExpression::zero(1, 2);
    w2.pt[1] = fn("1");
    Jets mj = w2.as_expression().jets(0.5, 0, 4);
    FuncJet zero = function_jet(fn("0"), 0.5, 4);
    Vec y = lift_solution(J, mj, zero, f);
    CHECK(y(0) == cplx(0));
    CHECK(std::abs(y(1) + 1.0) < 1e-15);
}

TEST_CASE("top quasi-derivative equals the divergent form") {
    std::mt19937 g(5);
    for (int r = 0; r <= 5; ++r)
        for (int d : {1, 2}) {
            DiffExpression e = testgen::random_diff(g, d, r);
            MatrixExpr f = testgen::random_function(g, d);
            for (double t : {-0.7, 0.1, 0.9}) {
                Jets J = e.jets(t, 0.0, r + 2);
                FuncJet fj = function_jet(f, t, r + 2);
                Vec direct = apply_expression(J, fj);
                Vec quasi = quasi_table(J, 0).apply(r, fj);
                CHECK((direct - quasi).norm() <= 1e-11 * (1 + direct.norm()));
            }
        }
}

TEST_CASE("homogeneous canonical residual is l[y] in the first block") {
    std::mt19937 g(17);
    WeightExpression w0 = WeightExpression::zero(1, 0);
    for (int r = 1; r <= 5; ++r)
        for (int d : {1, 2}) {
            DiffExpression e = testgen::random_diff(g, d, r);
            WeightExpression w = WeightExpression::zero(d, 0);
            MatrixExpr y = testgen::random_function(g, d);
            double t = 0.37;
            Jets J = e.jets(t, 0.0, r + 3);
            Jets mj = w.as_expression().jets(t, 0.0, r + 3);
            FuncJet yj = function_jet(y, t, r + 3);
            FuncJet zero(yj.size(), Vec::Zero(d));
            Vec x = lift_solution(J, mj, yj, zero, 0), dx = lift_solution(J, mj, yj, zero, 1);
            Vec res = canonical_operator(J, x, dx);
            Vec ly = apply_expression(J, yj);
            CHECK((res.head(d) - ly).norm() <= 1e-10 * (1 + ly.norm()));
            CHECK(res.tail(res.size() - d).norm() <= 1e-10 * (1 + ly.norm()));
        }
}

TEST_CASE("lifted solution satisfies the canonical system with weight") {
    std::mt19937 g(19);
    for (int r = 1; r <= 5; ++r)
        for (int d : {1, 2})
            for (int s = 0; s <= 2 * (r / 2); s += 2) {
                DiffExpression e = testgen::random_diff(g, d, r);
                WeightExpression w = testgen::random_weight(g, d, s);
                MatrixExpr y = testgen::random_function(g, d), f = testgen::random_function(g, d);
                double t = -0.21;
                Jets J = e.jets(t, 0.0, r + 3);
                Jets mj = w.as_expression().jets(t, 0.0, r + 3);
                FuncJet yj = function_jet(y, t, r + 3), fj = function_jet(f, t, r + 3);
                Vec x = lift_solution(J, mj, yj, fj, 0), dx = lift_solution(J, mj, yj, fj, 1);
                Vec res = canonical_operator(J, x, dx) - build_W(J.adjoint(), mj) * lift_F(J.adjoint(), s, fj);
                Vec g1 = apply_expression(J, yj) - apply_expression(mj, fj);
                double sc = 1 + g1.norm() + x.norm();
                INFO("r=" << r << " d=" << d << " s=" << s);
                CHECK((res.head(d) - g1).norm() <= 1e-10 * sc);
                CHECK(res.tail(res.size() - d).norm() <= 1e-10 * sc);
            }
}

TEST_CASE("structural identities on random samples") {
    std::mt19937 g(23);
    int count = 0;
    for (int sample = 0; sample < 25; ++sample)
        for (int r = 1; r <= 4; ++r)
            for (int d : {1, 2}) {
                int s = 2 * std::uniform_int_distribution<int>(0, r / 2)(g);
                DiffExpression e = testgen::random_diff(g, d, r);
                WeightExpression w = testgen::random_weight(g, d, s);
                double t = std::uniform_real_distribution<double>(-1, 1)(g);
                Jets J = e.jets(t, 0.0, r + 3);
                Jets mj = w.as_expression().jets(t, 0.0, r + 3);
                FuncJet fj = function_jet(testgen::random_function(g, d), t, r + 4);
                IdentityResiduals res = check_identities(J, mj, fj, 99u + sample);
                INFO("r=" << r << " d=" << d << " s=" << s);
                CHECK(res.im_h <= 1e-10);
                CHECK(res.im_h_alt <= 1e-10);
                CHECK(res.hermitian <= 1e-12);
                CHECK(res.padding <= 1e-12);
                CHECK(res.wf <= 1e-12 * (1 + fj[0].norm()) * 10);
                CHECK(res.null_free <= 1e-12);
                ++count;
            }
    CHECK(count == 200);
}
