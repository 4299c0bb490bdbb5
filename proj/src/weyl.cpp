#include "nevres/weyl.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace nevres {

namespace {

const cplx I(0.0, 1.0);

double sigma_min(const Mat& A) { return Eigen::JacobiSVD<Mat>(A).singularValues().minCoeff(); }

Mat checked_inverse(const Mat& A, const char* what) {
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    if (!(s.maxCoeff() > 0.0) || s.minCoeff() < 1e-13 * s.maxCoeff()) throw WeylError(what);
    return A.inverse();
}

Mat range_basis(const Mat& A, int rank) {
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ();
    return Q.leftCols(rank);
}

Mat stack(const Mat& top, const Mat& bottom) {
    Mat out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

}  // namespace

Mat NevanlinnaPair::K(cplx lam) const {
    cplx lc = std::conj(lam);
    return a_at(lc).adjoint() * a_at(lam) + b_at(lc).adjoint() * b_at(lam);
}

NevanlinnaPairReport check_pair(const NevanlinnaPair& np, const CanonicalSystem& sys, double a, cplx lam) {
    NevanlinnaPairReport rep;
    cplx lc = std::conj(lam);
    Mat A = np.a_at(lam), B = np.b_at(lam);
    rep.k_sigma_min = sigma_min(np.K(lam));
    Mat C = stack(A, B);
    rep.dissipativity = min_eig(lam.imag() * C.adjoint() * sys.ReQ(a) * C);
    rep.symmetry = (np.b_at(lc).adjoint() * A - np.a_at(lc).adjoint() * B).norm();
    return rep;
}

ProjectionFactors factor_projection(const Mat& P, double tol) {
    const int D = static_cast<int>(P.rows());
    if (D % 2) throw std::invalid_argument("projection of odd size");
    const int n = D / 2;
    Mat Id = Mat::Identity(D, D);
    if (separation_residual(P) > tol * std::max(1.0, P.norm())) throw WeylError("projection is not idempotent");
    int rank = static_cast<int>(std::lround(P.trace().real()));
    if (rank != n) throw WeylError("Weyl function not extractable at lam");
    Mat B = range_basis(P, n);
    Mat B1 = B.topRows(n), B2 = B.bottomRows(n);
    double smax = Eigen::JacobiSVD<Mat>(B1).singularValues().maxCoeff();
    if (sigma_min(B1) < 1e-10 * std::max(1.0, smax)) throw WeylError("Weyl function not extractable at lam");
    ProjectionFactors out;
    out.m = B2 * B1.inverse();
    out.ab = range_basis(Id - P, n);
    Mat a = out.ab.topRows(n), b = out.ab.bottomRows(n);
    Mat rebuilt = pair_complement(a, b, out.m);
    out.residual = (Id - P - rebuilt).norm();
    return out;
}

Mat weyl_function(const FundamentalSolution& fs, const Mat& Gamma) {
    const Mat& Xb = fs.X.back();
    const int n = static_cast<int>(Xb.cols()) / 2;
    Mat GX = Gamma * Xb;
    return -checked_inverse(GX.rightCols(n), "right condition does not determine m") * GX.leftCols(n);
}

Mat pair_projection(const Mat& a_conj, const Mat& b_conj, const Mat& m) {
    const int n = static_cast<int>(m.rows());
    Mat row(n, 2 * n);
    row << b_conj.adjoint(), -a_conj.adjoint();
    Mat mid = checked_inverse(b_conj.adjoint() - a_conj.adjoint() * m, "singular b*(conj) - a*(conj) m");
    return stack(Mat::Identity(n, n), m) * mid * row;
}

Mat pair_complement(const Mat& a, const Mat& b, const Mat& m) {
    const int n = static_cast<int>(m.rows());
    Mat row(n, 2 * n);
    row << -m, Mat::Identity(n, n);
    return stack(a, b) * checked_inverse(b - m * a, "singular b - m a") * row;
}

WeylData weyl_solutions(const NevanlinnaPair& np, const FundamentalSolution& fs, const Mat& m, const Mat& Gamma) {
    WeylData wd;
    wd.lam = fs.lam;
    cplx lc = std::conj(fs.lam);
    wd.a = np.a_at(fs.lam);
    wd.b = np.b_at(fs.lam);
    wd.a_conj = np.a_at(lc);
    wd.b_conj = np.b_at(lc);
    wd.K = np.K(fs.lam);
    wd.m = m;
    Mat Ki = checked_inverse(wd.K, "singular K");
    Mat mid = checked_inverse(wd.b_conj.adjoint() - wd.a_conj.adjoint() * m, "singular b*(conj) - a*(conj) m");
    wd.mab = Ki * (wd.a_conj.adjoint() + wd.b_conj.adjoint() * m) * mid;
    Mat Ua = stack(wd.a, wd.b);
    Mat Va = stack(wd.b, -wd.a) * Ki + Ua * wd.mab;
    wd.U.resize(fs.X.size());
    wd.V.resize(fs.X.size());
    for (std::size_t k = 0; k < fs.X.size(); ++k) {
        wd.U[k] = fs.X[k] * Ua;
        wd.V[k] = fs.X[k] * Va;
    }
    wd.right_residual = (Gamma * wd.V.back()).norm() / std::max(1e-300, wd.V.back().norm());
    return wd;
}

WeylData weyl_solutions(const NevanlinnaPair& np, const FundamentalSolution& fs, const Mat& Gamma) {
    return weyl_solutions(np, fs, weyl_function(fs, Gamma), Gamma);
}

std::vector<Vec> split_canonical(const WeylData& wd, const WeylData& wd_conj, const Grid& grid,
                                 const std::vector<Vec>& phi) {
    std::vector<Vec> lo(grid.N + 1), hi(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) {
        lo[k] = wd_conj.U[k].adjoint() * phi[k];
        hi[k] = wd_conj.V[k].adjoint() * phi[k];
    }
    std::vector<Vec> A = cumulative(grid, lo), B = cumulative(grid, hi);
    std::vector<Vec> x(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) x[k] = wd.V[k] * A[k] + wd.U[k] * (B.back() - B[k]);
    return x;
}

std::vector<Vec> split_resolvent(const CanonicalSystem& sys, const WeylData& wd, const WeylData& wd_conj,
                                 const Grid& grid, const Fn& f) {
    const int s2 = sys.family().weight().r / 2;
    const cplx lc = std::conj(wd.lam);
    std::vector<Vec> lo(grid.N + 1), hi(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) {
        double t = grid.t[k];
        FuncJet dens = weight_densities(sys, t, f(t, s2 + 1));
        lo[k] = Vec::Zero(wd.U[k].cols());
        hi[k] = Vec::Zero(wd.V[k].cols());
        for (int j = 0; j <= s2; ++j) {
            lo[k] += sys.derivative_rows(t, lc, wd_conj.U[k], j).adjoint() * dens[j];
            hi[k] += sys.derivative_rows(t, lc, wd_conj.V[k], j).adjoint() * dens[j];
        }
    }
    std::vector<Vec> A = cumulative(grid, lo), B = cumulative(grid, hi);
    std::vector<Vec> y(grid.N + 1);
    for (int k = 0; k <= grid.N; ++k) {
        double t = grid.t[k];
        y[k] = sys.derivative_rows(t, wd.lam, wd.V[k], 0) * A[k] +
               sys.derivative_rows(t, wd.lam, wd.U[k], 0) * (B.back() - B[k]);
    }
    return y;
}

CharOp weyl_char_op(const NevanlinnaPair& np, const Mat& Gamma, const CanonicalSystem& sys, const Grid& grid,
                    int substeps) {
    return [np, Gamma, sys, grid, substeps](cplx lam) {
        FundamentalSolution fs = integrate_fundamental(sys, lam, grid, substeps);
        cplx lc = std::conj(lam);
        Mat P = pair_projection(np.a_at(lc), np.b_at(lc), weyl_function(fs, Gamma));
        return char_op_from_projection(P, fs.G);
    };
}

HerglotzReport herglotz_check(const CanonicalSystem& sys, const Grid& grid, const std::vector<WeylData>& ws) {
    HerglotzReport rep;
    const DiffExpression& Mw = sys.family().weight();
    const int s2 = Mw.r / 2;
    for (const WeylData& wd : ws) {
        const cplx lam = wd.lam;
        const WeylData* conj = nullptr;
        for (const WeylData& o : ws)
            if (o.lam == std::conj(lam)) conj = &o;
        if (!conj) throw std::invalid_argument("lam list must be closed under conjugation");
        rep.symmetry = std::max(rep.symmetry, (wd.mab - conj->mab.adjoint()).norm());
        Mat im = (wd.mab - wd.mab.adjoint()) / (2.0 * I * lam.imag());
        rep.im_min = std::min(rep.im_min, min_eig(im));
        const int n = static_cast<int>(wd.V.front().cols());
        Mat gram_m = Mat::Zero(n, n), gram_w = Mat::Zero(n, n);
        for (int k = 0; k <= grid.N; ++k) {
            double t = grid.t[k];
            Mat D((s2 + 1) * sys.d(), n);
            for (int j = 0; j <= s2; ++j) D.middleRows(j * sys.d(), sys.d()) = sys.derivative_rows(t, lam, wd.V[k], j);
            gram_m += grid.w[k] * D.adjoint() * form_matrix(Mw.jets(t, 0.0, 0), s2) * D;
            gram_w += grid.w[k] * wd.V[k].adjoint() * sys.nev_weight(t, lam) * wd.V[k];
        }
        rep.v_slack = std::min(rep.v_slack, min_eig(im - gram_m));
        rep.w_slack = std::min(rep.w_slack, min_eig(im - gram_w));
    }
    return rep;
}

}  // namespace nevres
