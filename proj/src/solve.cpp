#include "nevres/solve.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace nevres {

namespace {

const cplx I(0.0, 1.0);

Mat hermitian(const Mat& A) { return 0.5 * (A + A.adjoint()); }

Mat inverse(const Mat& A, const char* what) {
    Eigen::PartialPivLU<Mat> lu(A);
    double c = A.cwiseAbs().maxCoeff();
    Mat inv = lu.inverse();
    if (!inv.allFinite() || c == 0.0 || (A * inv - Mat::Identity(A.rows(), A.cols())).norm() > 1e-6)
        throw std::domain_error(what);
    return inv;
}

}  // namespace

double min_eig(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian(A), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eig(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian(A), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

CanonicalSystem::CanonicalSystem(LambdaFamily fam) : fam_(std::move(fam)) {}

Jets CanonicalSystem::jets(double t, cplx lam) const { return fam_.composed().jets(t, lam, order() + 1); }

Jets CanonicalSystem::weight_jets(double t) const { return fam_.weight().jets(t, 0.0, order() + 1); }

Mat CanonicalSystem::ReQ(double t) const {
    Jets J = fam_.composed().jets(t, 0.0, 0);
    return 0.5 * (build_Q(J) + build_S(J));
}

Mat CanonicalSystem::Qprime(double t) const { return build_Qprime(fam_.composed().jets(t, 0.0, 1)); }

Mat CanonicalSystem::H(double t, cplx lam) const { return build_H(fam_.composed().jets(t, lam, 0)); }

Mat CanonicalSystem::generator(double t, cplx lam) const {
    Jets J = fam_.composed().jets(t, lam, 1);
    Mat R = 0.5 * (build_Q(J) + build_S(J));
    Mat rhs = -I * build_H(J) - 0.5 * build_Qprime(J);
    Eigen::PartialPivLU<Mat> lu(R);
    Mat A = lu.solve(rhs);
    if (!A.allFinite()) throw std::domain_error("Re Q is singular");
    return A;
}

Mat CanonicalSystem::nev_weight(double t, cplx lam) const {
    if (lam.imag() == 0.0) throw std::invalid_argument("nonreal lam required");
    Mat Hm = H(t, lam);
    return (Hm - Hm.adjoint()) / (2.0 * I * lam.imag());
}

Mat CanonicalSystem::weight(double t, cplx lam) const { return build_W(jets(t, lam), weight_jets(t)); }

Vec CanonicalSystem::lifted_rhs(double t, cplx lam, const FuncJet& f) const {
    return weighted_lift_formula(jets(t, lam), weight_jets(t), f);
}

Vec CanonicalSystem::lift(double t, cplx lam, const FuncJet& y, const FuncJet& f) const {
    return lift_solution(jets(t, lam), weight_jets(t), y, f);
}

FuncJet CanonicalSystem::derivatives(double t, cplx lam, const Vec& x, const FuncJet& f, int k) const {
    const int r = order(), dd = d(), n = r / 2;
    if (k > n) throw std::invalid_argument("only derivatives up to [r/2] are carried by x");
    FuncJet out;
    if (r == 1) {
        out.push_back(x);
        return out;
    }
    for (int j = 0; j < std::min(k + 1, n); ++j) out.push_back(x.segment(j * dd, dd));
    if (k < n) return out;
    if (r % 2) {
        out.push_back(I * x.segment(2 * n * dd, dd));
        return out;
    }
    Jets l = jets(t, lam), m = weight_jets(t);
    const int s = m.r;
    Vec xt = x;
    if (s > 0) {
        QuasiTable Tm = quasi_table(m, 0);
        for (int j = 1; j <= n; ++j)
            if (s - j >= s / 2) xt.segment((n + j - 1) * dd, dd) += Tm.apply(s - j, f);
    }
    Vec v = inverse(build_C(l), "singular quasi-derivative transform") * xt;
    out.push_back(v.segment((2 * n - 1) * dd, dd));
    return out;
}

Mat CanonicalSystem::derivative_rows(double t, cplx lam, const Mat& X, int k) const {
    const int r = order(), dd = d(), n = r / 2;
    if (k > n) throw std::invalid_argument("only derivatives up to [r/2] are carried by x");
    if (r == 1) return X;
    if (k < n) return X.middleRows(k * dd, dd);
    if (r % 2) return I * X.middleRows(2 * n * dd, dd);
    Mat v = inverse(build_C(jets(t, lam)), "singular quasi-derivative transform") * X;
    return v.middleRows((2 * n - 1) * dd, dd);
}

FundamentalSolution integrate_fundamental(const CanonicalSystem& sys, cplx lam, const Grid& grid, int substeps) {
    if (substeps < 1) throw std::invalid_argument("substeps must be positive");
    const int D = sys.dim();
    FundamentalSolution fs;
    fs.lam = lam;
    fs.grid = grid;
    fs.substeps = substeps;
    fs.steps = grid.N * substeps;
    fs.X.resize(grid.N + 1);
    fs.Xinv.resize(grid.N + 1);
    fs.R.resize(grid.N + 1);
    Mat X = Mat::Identity(D, D);
    const double hs = grid.h() / substeps;
    Mat A0 = sys.generator(grid.t[0], lam);
    for (int k = 0; k <= grid.N; ++k) {
        fs.R[k] = sys.ReQ(grid.t[k]);
        if (k > 0) {
            for (int j = 0; j < substeps; ++j) {
                double t0 = grid.t[k - 1] + j * hs;
                double t1 = (j + 1 == substeps) ? grid.t[k] : t0 + hs;
                Mat Am = sys.generator(0.5 * (t0 + t1), lam);
                Mat A1 = sys.generator(t1, lam);
                double h = t1 - t0;
                Mat k1 = A0 * X;
                Mat k2 = Am * (X + 0.5 * h * k1);
                Mat k3 = Am * (X + 0.5 * h * k2);
                Mat k4 = A1 * (X + h * k3);
                X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                A0 = A1;
            }
            if (!X.allFinite()) throw std::runtime_error("integration produced non-finite values");
        }
        fs.X[k] = X;
        fs.Xinv[k] = X.partialPivLu().inverse();
    }
    fs.G = fs.R[0];
    return fs;
}

LagrangeReport lagrange_residual(const FundamentalSolution& fs, const FundamentalSolution& fs_conj) {
    if (fs.grid.N != fs_conj.grid.N || fs.grid.a != fs_conj.grid.a || fs.grid.b != fs_conj.grid.b)
        throw std::invalid_argument("grids differ");
    LagrangeReport rep;
    for (std::size_t k = 0; k < fs.X.size(); ++k) {
        rep.residual = std::max(rep.residual, (fs_conj.X[k].adjoint() * fs.R[k] * fs.X[k] - fs.G).norm());
        Mat U = fs.lam.imag() * (fs.X[k].adjoint() * fs.R[k] * fs.X[k] - fs.G);
        rep.monotone = std::min(rep.monotone, min_eig(U));
    }
    return rep;
}

Mat adjoint_shortcut(const FundamentalSolution& fs, int k) {
    return fs.G * fs.Xinv.at(k) * fs.R.at(k).inverse();
}

DeltaData split_delta(const Mat& Delta, double rel_eps) {
    DeltaData dd;
    dd.Delta = hermitian(Delta);
    const int D = Delta.rows();
    Eigen::SelfAdjointEigenSolver<Mat> es(dd.Delta);
    dd.eps = rel_eps * dd.Delta.norm();
    int nnull = 0;
    for (int i = 0; i < D; ++i)
        if (es.eigenvalues()(i) <= dd.eps) ++nnull;
    dd.null_basis = es.eigenvectors().leftCols(nnull);
    Mat range = es.eigenvectors().rightCols(D - nnull);
    dd.P = range * range.adjoint();
    return dd;
}

DeltaData delta_matrix(const CanonicalSystem& sys, const FundamentalSolution& fs, WeightChoice which, int i0,
                       int i1, double rel_eps) {
    std::vector<double> w = fs.grid.weights(i0, i1);
    const int D = sys.dim();
    Mat Delta = Mat::Zero(D, D);
    for (int k = i0; k <= i1; ++k) {
        double t = fs.grid.t[k];
        Mat Wt = which == WeightChoice::Family ? sys.weight(t, fs.lam) : sys.nev_weight(t, fs.lam);
        Delta += w[k] * fs.X[k].adjoint() * Wt * fs.X[k];
    }
    return split_delta(Delta, rel_eps);
}

Definiteness definiteness_check(const DeltaData& dd) {
    Definiteness out;
    const int D = dd.Delta.rows();
    const int rank = D - static_cast<int>(dd.null_basis.cols());
    if (rank == 0) {
        out.trivial = true;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(dd.Delta);
    out.delta = es.eigenvalues()(D - rank);
    out.positive = rank == D && out.delta > 0.0;
    return out;
}

}  // namespace nevres
