#include "nevres/charop.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace nevres {

namespace {

const cplx I(0.0, 1.0);
const double PI = 3.14159265358979323846;

int count_sign(const Mat& A, double tol, int sign) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
    int c = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (sign * es.eigenvalues()(i) > tol) ++c;
    return c;
}

}  // namespace

bool PairReport::ok(double tol) const {
    return flux <= tol && sigma_min > tol && dissipativity <= tol && rank == kappa_plus;
}

PairReport validate_pair(const BoundaryPair& bp, const CanonicalSystem& sys, double a, double b, cplx lam) {
    Mat M = bp.M_at(lam), N = bp.N_at(lam);
    Mat Ra = sys.ReQ(a), Rb = sys.ReQ(b);
    const int D = sys.dim();
    PairReport rep;
    Mat fa = M.adjoint() * Ra * M, fb = N.adjoint() * Rb * N;
    rep.flux = (fa - fb).norm();
    Mat stacked(2 * D, D);
    stacked << M, N;
    Eigen::JacobiSVD<Mat> svd(stacked);
    rep.sigma_min = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    rep.rank = 0;
    for (int i = 0; i < D; ++i)
        if (svd.singularValues()(i) > 1e-12 * std::max(1.0, smax)) ++rep.rank;
    rep.dissipativity = max_eig(lam.imag() * (fb - fa));
    Mat Qm = Mat::Zero(2 * D, 2 * D);
    Qm.topLeftCorner(D, D) = lam.imag() * Ra;
    Qm.bottomRightCorner(D, D) = -lam.imag() * Rb;
    rep.kappa_plus = count_sign(Qm, 1e-12, 1);
    Mat G = sys.ReQ(a);
    rep.g_plus = count_sign(G, 1e-12, 1);
    rep.g_minus = count_sign(G, 1e-12, -1);
    return rep;
}

CharOpValue char_op_from_pair(const BoundaryPair& bp, const FundamentalSolution& fs) {
    const Mat& Xa_inv = fs.Xinv.front();
    const Mat& Xb_inv = fs.Xinv.back();
    Mat Mv = bp.M_at(fs.lam), Nv = bp.N_at(fs.lam);
    Mat A = Xa_inv * Mv + Xb_inv * Nv;
    Mat B = Xa_inv * Mv - Xb_inv * Nv;
    Eigen::JacobiSVD<Mat> svd(B);
    double smax = svd.singularValues().maxCoeff(), smin = svd.singularValues().minCoeff();
    if (!(smax > 0.0) || smin < 1e-13 * smax) throw PairError("pair not resolvable at lam");
    CharOpValue out;
    out.cond = smax / smin;
    Mat iG_inv = (I * fs.G).inverse();
    out.M = -0.5 * A * B.inverse() * iG_inv;
    return out;
}

CharOp pair_char_op(const BoundaryPair& bp, const CanonicalSystem& sys, const Grid& grid, int substeps) {
    return [bp, sys, grid, substeps](cplx lam) {
        return char_op_from_pair(bp, integrate_fundamental(sys, lam, grid, substeps)).M;
    };
}

Mat char_projection(const Mat& M, const Mat& G) {
    return I * M * G + 0.5 * Mat::Identity(M.rows(), M.cols());
}

Mat char_op_from_projection(const Mat& P, const Mat& G) {
    return (P - 0.5 * Mat::Identity(P.rows(), P.cols())) * (I * G).inverse();
}

double separation_residual(const Mat& P) { return (P * P - P).norm(); }

std::vector<Vec> cumulative(const Grid& grid, const std::vector<Vec>& v) {
    const int N = grid.N;
    const double h = grid.h();
    std::vector<Vec> c(N + 1);
    c[0] = Vec::Zero(v[0].size());
    for (int k = 1; k <= N; ++k) {
        if (k % 2 == 0) {
            c[k] = c[k - 2] + (h / 3.0) * (v[k - 2] + 4.0 * v[k - 1] + v[k]);
        } else if (k == 1) {
            c[k] = c[0] + (h / 12.0) * (5.0 * v[0] + 8.0 * v[1] - v[2]);
        } else {
            c[k] = c[k - 1] + (h / 12.0) * (-v[k - 2] + 8.0 * v[k - 1] + 5.0 * v[k]);
        }
    }
    return c;
}

std::vector<Vec> kernel_apply(const FundamentalSolution& fs, const FundamentalSolution& fs_conj, const Mat& M,
                              const std::vector<Vec>& phi) {
    const Grid& g = fs.grid;
    std::vector<Vec> integrand(g.N + 1);
    for (int k = 0; k <= g.N; ++k) integrand[k] = fs_conj.X[k].adjoint() * phi[k];
    std::vector<Vec> J = cumulative(g, integrand);
    const Vec& total = J.back();
    Mat half = 0.5 * (I * fs.G).inverse();
    Vec base = M * total;
    std::vector<Vec> x(g.N + 1);
    for (int k = 0; k <= g.N; ++k) x[k] = fs.X[k] * (base + half * (2.0 * J[k] - total));
    return x;
}

std::vector<Fn> bump_trials(int D, int count, unsigned seed, double a, double b) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double lo = a + 0.1 * (b - a), hi = b - 0.1 * (b - a);
    std::vector<Fn> out;
    for (int c = 0; c < count; ++c) {
        Mat coef(D, 3);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < 3; ++j) coef(i, j) = cplx(nd(gen), nd(gen));
        out.push_back([coef, lo, hi, D](double t, int K) {
            FuncJet f(static_cast<std::size_t>(K + 1), Vec::Zero(D));
            double u = (2.0 * t - lo - hi) / (hi - lo);
            if (std::abs(u) >= 1.0) return f;
            double bump = std::exp(-1.0 / (1.0 - u * u));
            for (int i = 0; i < D; ++i) f[0](i) = bump * (coef(i, 0) + coef(i, 1) * u + coef(i, 2) * u * u);
            return f;
        });
    }
    return out;
}

double contour_residual(const std::function<Mat(cplx)>& f, cplx lam, double rho, int nodes) {
    Mat acc;
    double scale = 1.0;
    for (int j = 0; j < nodes; ++j) {
        cplx e = std::exp(I * (2.0 * PI * j / nodes));
        Mat v = f(lam + rho * e);
        scale = std::max(scale, v.norm());
        if (j == 0) acc = v * e;
        else acc += v * e;
    }
    return (acc / static_cast<double>(nodes)).norm() / scale;
}

bool Certificate::ok(double tol) const {
    return flux <= tol * scale && symmetry <= tol * scale && contour <= tol;
}

bool Certificate::separated(double tol) const { return left >= -tol * scale && right <= tol * scale; }

Certificate verify_characteristic(const CharOp& Mfun, const CanonicalSystem& sys, const Grid& grid,
                                  const std::vector<Fn>& trials, const std::vector<cplx>& lams, int substeps) {
    Certificate cert;
    for (cplx lam : lams) {
        FundamentalSolution fs = integrate_fundamental(sys, lam, grid, substeps);
        FundamentalSolution fc = integrate_fundamental(sys, std::conj(lam), grid, substeps);
        Mat M = Mfun(lam);
        cert.symmetry = std::max(cert.symmetry, (M - Mfun(std::conj(lam)).adjoint()).norm());
        cert.scale = std::max(cert.scale, M.norm());
        cert.contour = std::max(cert.contour, contour_residual(Mfun, lam));
        for (const Fn& F : trials) {
            std::vector<Vec> phi(grid.N + 1);
            for (int k = 0; k <= grid.N; ++k) phi[k] = sys.nev_weight(grid.t[k], lam) * F(grid.t[k], 0)[0];
            std::vector<Vec> x = kernel_apply(fs, fc, M, phi);
            double Ua = x.front().dot(fs.R.front() * x.front()).real();
            double Ub = x.back().dot(fs.R.back() * x.back()).real();
            cert.scale = std::max({cert.scale, std::abs(Ua), std::abs(Ub)});
            cert.flux = std::max(cert.flux, lam.imag() * (Ub - Ua));
            cert.left = std::min(cert.left, lam.imag() * Ua);
            cert.right = std::max(cert.right, lam.imag() * Ub);
        }
    }
    return cert;
}

}  // namespace nevres
