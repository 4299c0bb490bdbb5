#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nevres/charop.hpp"

using namespace nevres;

namespace {

const double PI = 3.14159265358979323846;
const cplx I(0.0, 1.0);

MatrixExpr fn(const std::string& src) { return MatrixExpr::parse({{src}}); }

CanonicalSystem first_order(const char* weight = "1") {
    DiffExpression l = DiffExpression::zero(1, 1);
    l.q[1] = fn("1");
    l.s[1] = fn("1");
    WeightExpression m = WeightExpression::zero(1, 0);
    m.pt[0] = fn(weight);
    return CanonicalSystem(LambdaFamily(l, m, DiffExpression::zero(1, 0)));
}

CanonicalSystem sturm_liouville() {
    DiffExpression l = DiffExpression::zero(1, 2);
    l.p[1] = fn("1");
    WeightExpression m = WeightExpression::zero(1, 0);
    m.pt[0] = fn("1");
    return CanonicalSystem(LambdaFamily(l, m, DiffExpression::zero(1, 0)));
}

BoundaryPair dirichlet_pair() {
    return {MatrixExpr::parse({{"0", "0"}, {"1", "0"}}), MatrixExpr::parse({{"0", "0"}, {"0", "1"}}), true};
}

BoundaryPair neumann_pair() {
    return {MatrixExpr::parse({{"1", "0"}, {"0", "0"}}), MatrixExpr::parse({{"0", "1"}, {"0", "0"}}), true};
}

BoundaryPair quasi_periodic(double theta) {
    MatrixExpr N(1, 1);
    N(0, 0) = ScalarExpr::constant(std::exp(I * theta));
    return {fn("1"), N, false};
}

// i y' - lam y = 0 has X(t) = exp(-i lam t), so X^{-1}(2 pi) N = exp(i theta + 2 pi i lam)
cplx first_order_M(cplx lam, double theta) {
    cplx z = std::exp(I * theta + 2.0 * PI * I * lam);
    return -0.5 * (1.0 + z) / (1.0 - z) / I;
}

}  // namespace

TEST_CASE("pair validation") {
    CanonicalSystem sl = sturm_liouville();
    for (const BoundaryPair& bp : {dirichlet_pair(), neumann_pair()}) {
        PairReport rep = validate_pair(bp, sl, 0.0, PI, I);
        CHECK(rep.flux == 0.0);
        CHECK(rep.rank == 2);
        CHECK(rep.kappa_plus == 2);
        CHECK(rep.g_plus == 1);
        CHECK(rep.g_minus == 1);
        CHECK(rep.dissipativity <= 0.0);
        CHECK(rep.ok());
    }
    PairReport q = validate_pair(quasi_periodic(PI / 3), first_order(), 0.0, 2 * PI, cplx(1, 1));
    CHECK(q.flux < 1e-15);
    CHECK(q.kappa_plus == 1);
    CHECK(q.rank == 1);
    CHECK(q.ok());
}

TEST_CASE("inertia of G for even order") {
    DiffExpression l = DiffExpression::zero(2, 4);
    l.p[2] = MatrixExpr::identity(2);
    WeightExpression m = WeightExpression::zero(2, 0);
    m.pt[0] = MatrixExpr::identity(2);
    CanonicalSystem sys(LambdaFamily(l, m, DiffExpression::zero(2, 0)));
    BoundaryPair bp{MatrixExpr::identity(8), MatrixExpr::identity(8), false};
    PairReport rep = validate_pair(bp, sys, 0.0, 1.0, I);
    CHECK(rep.g_plus == 4);
    CHECK(rep.g_minus == 4);
}

TEST_CASE("first-order characteristic operator") {
    CanonicalSystem sys = first_order();
    Grid g = Grid::uniform(0.0, 2 * PI, 400);
    for (cplx lam : {I, cplx(1, 1), cplx(0.3, -0.6)}) {
        CharOpValue v = char_op_from_pair(quasi_periodic(PI / 3), integrate_fundamental(sys, lam, g));
        cplx ref = first_order_M(lam, PI / 3);
        CHECK(std::abs(v.M(0, 0) - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
        CHECK(v.cond >= 1.0);
    }
}

TEST_CASE("unresolvable pair") {
    CanonicalSystem sys = first_order("0");  // l_lam = iD, X = 1
    Grid g = Grid::uniform(0.0, 1.0, 8);
    BoundaryPair bp{fn("1"), fn("1"), false};
    CHECK_THROWS_AS(char_op_from_pair(bp, integrate_fundamental(sys, I, g)), PairError);
}

TEST_CASE("characteristic projection") {
    Mat G(2, 2);
    G << 0, I, -I, 0;
    Mat P0 = char_projection(Mat::Zero(2, 2), G);
    CHECK((P0 - 0.5 * Mat::Identity(2, 2)).norm() == 0.0);
    CHECK(std::abs(separation_residual(P0) - std::sqrt(2.0) / 4) < 1e-15);

    std::mt19937 gen(3);
    std::normal_distribution<double> nd;
    Mat M(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) M(i, j) = cplx(nd(gen), nd(gen));
    CHECK((char_op_from_projection(char_projection(M, G), G) - M).norm() < 1e-13);

    Mat A = Mat::Random(3, 3);
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Qm = qr.householderQ();
    Mat Pr = Qm.leftCols(2) * Qm.leftCols(2).adjoint();
    CHECK(separation_residual(Pr) < 1e-14);
}

TEST_CASE("Dirichlet problem is separated") {
    CanonicalSystem sys = sturm_liouville();
    Grid g = Grid::uniform(0.0, PI, 400);
    FundamentalSolution fs = integrate_fundamental(sys, I, g);
    Mat M = char_op_from_pair(dirichlet_pair(), fs).M;
    CHECK(separation_residual(char_projection(M, fs.G)) <= 1e-9);
}

TEST_CASE("cumulative quadrature") {
    auto err = [](int N) {
        Grid g = Grid::uniform(0.0, 2.0, N);
        std::vector<Vec> v(g.N + 1, Vec(1));
        for (int k = 0; k <= g.N; ++k) v[k](0) = std::cos(3 * g.t[k]);
        std::vector<Vec> c = cumulative(g, v);
        double e = 0;
        for (int k = 0; k <= g.N; ++k) e = std::max(e, std::abs(c[k](0) - std::sin(3 * g.t[k]) / 3));
        return e;
    };
    CHECK(err(64) < 2e-6);
    CHECK(err(64) / err(128) > 12.0);
}

TEST_CASE("characteristic operator certificate") {
    CanonicalSystem sys = sturm_liouville();
    Grid g = Grid::uniform(0.0, PI, 200);
    CharOp M = pair_char_op(dirichlet_pair(), sys, g);
    auto trials = bump_trials(2, 3, 7, 0.0, PI);
    std::vector<cplx> lams{I, -I, cplx(0.5, 0.5), cplx(0.5, -0.5)};
    Certificate c = verify_characteristic(M, sys, g, trials, lams);
    CHECK(c.ok());
    CHECK(c.separated());
    CHECK(std::abs(c.flux) <= 1e-7 * c.scale);

    CharOp bad = [&](cplx lam) { return Mat(M(lam) + 0.1 * I * Mat::Identity(2, 2)); };
    Certificate cb = verify_characteristic(bad, sys, g, trials, {I, -I});
    CHECK(cb.symmetry > 0.1);
    CHECK_FALSE(cb.ok());

    for (const Fn& f : trials) {
        CHECK(f(0.05, 0)[0].norm() == 0.0);
        CHECK(f(PI / 2, 0)[0].norm() > 0.0);
    }
}
