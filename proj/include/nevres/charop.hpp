#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "nevres/solve.hpp"

namespace nevres {

/// Boundary conditions x(a) = M_lam h, x(b) = N_lam h.
struct BoundaryPair {
    MatrixExpr M, N;
    bool separated = false;

    Mat M_at(cplx lam) const { return M.eval(0.0, lam); }
    Mat N_at(cplx lam) const { return N.eval(0.0, lam); }
};

struct PairReport {
    double flux = 0.0;           // |M* ReQ(a) M - N* ReQ(b) N|
    double sigma_min = 0.0;      // of col(M, N)
    double dissipativity = 0.0;  // max eigenvalue of Im lam (N* ReQ(b) N - M* ReQ(a) M)
    int rank = 0;
    int kappa_plus = 0;  // positive inertia of Im lam diag(ReQ(a), -ReQ(b))
    int g_plus = 0, g_minus = 0;
    bool ok(double tol = 1e-9) const;
};

PairReport validate_pair(const BoundaryPair& bp, const CanonicalSystem& sys, double a, double b, cplx lam);

class PairError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CharOpValue {
    Mat M;
    double cond = 0.0;  // of the difference matrix
};

/// M(lam) from a boundary pair; throws PairError when the difference matrix is singular.
CharOpValue char_op_from_pair(const BoundaryPair& bp, const FundamentalSolution& fs);

using CharOp = std::function<Mat(cplx)>;

/// M(lam) for the pair, integrating the fundamental solution on each call.
CharOp pair_char_op(const BoundaryPair& bp, const CanonicalSystem& sys, const Grid& grid, int substeps = 4);

Mat char_projection(const Mat& M, const Mat& G);
Mat char_op_from_projection(const Mat& P, const Mat& G);
double separation_residual(const Mat& P);

/// x(t_k) = X(t_k)[M J(a,b) + (1/2)(iG)^{-1}(J(a,t_k) - J(t_k,b))], J(.) = int X_conj* phi.
std::vector<Vec> kernel_apply(const FundamentalSolution& fs, const FundamentalSolution& fs_conj, const Mat& M,
                              const std::vector<Vec>& phi);

/// Cumulative integrals int_a^{t_k} of node samples, fourth order at every node.
std::vector<Vec> cumulative(const Grid& grid, const std::vector<Vec>& v);

/// Smooth bump-modulated polynomial vectors vanishing on the outer 10% of [a, b].
std::vector<Fn> bump_trials(int D, int count, unsigned seed, double a, double b);

/// Holomorphy residual: |mean_j f(lam + rho e^{i th_j}) e^{i th_j}| over 16 nodes, relative to max(1, |f(lam)|).
double contour_residual(const std::function<Mat(cplx)>& f, cplx lam, double rho = 0.1, int nodes = 16);

struct Certificate {
    double flux = -1e300;      // max Im lam (U[x(b)] - U[x(a)]), must be <= tol
    double left = 1e300;       // min Im lam U[x(a)], separated: >= -tol
    double right = -1e300;     // max Im lam U[x(b)], separated: <= tol
    double symmetry = 0.0;     // max |M(lam) - M(conj lam)*|
    double contour = 0.0;
    double scale = 1.0;
    bool ok(double tol = 1e-7) const;
    bool separated(double tol = 1e-7) const;
};

Certificate verify_characteristic(const CharOp& M, const CanonicalSystem& sys, const Grid& grid,
                                  const std::vector<Fn>& trials, const std::vector<cplx>& lams, int substeps = 4);

}  // namespace nevres
