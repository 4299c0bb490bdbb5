#pragma once

#include <stdexcept>
#include <vector>

#include "nevres/resolvent.hpp"

namespace nevres {

class WeylError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Left condition x(a) in span col(a(lam), b(lam)), even order only.
struct NevanlinnaPair {
    MatrixExpr a, b;

    Mat a_at(cplx lam) const { return a.eval(0.0, lam); }
    Mat b_at(cplx lam) const { return b.eval(0.0, lam); }
    /// a*(conj lam) a(lam) + b*(conj lam) b(lam)
    Mat K(cplx lam) const;
};

struct NevanlinnaPairReport {
    double k_sigma_min = 0.0;    // smallest singular value of K(lam)
    double dissipativity = 0.0;  // min eigenvalue of Im lam col(a,b)* ReQ(a) col(a,b), >= -tol
    double symmetry = 0.0;       // |b*(conj lam) a(lam) - a*(conj lam) b(lam)|
};

NevanlinnaPairReport check_pair(const NevanlinnaPair& np, const CanonicalSystem& sys, double a, cplx lam);

struct ProjectionFactors {
    Mat m;     // B2 B1^{-1} from a range basis col(B1, B2)
    Mat ab;    // kernel basis col(a, b), up to a right factor
    double residual = 0.0;  // I - P against col(a,b)(b - m a)^{-1}(-m, I)
};

/// Splits a separated characteristic projection; throws WeylError when the range is not a graph over the first block.
ProjectionFactors factor_projection(const Mat& P, double tol = 1e-9);

/// m(lam) from the right condition Gamma x(b) = 0: Gamma X(b) col(I, m) = 0.
Mat weyl_function(const FundamentalSolution& fs, const Mat& Gamma);

/// col(I, m)(b*(conj) - a*(conj) m)^{-1}(b*(conj), -a*(conj)).
Mat pair_projection(const Mat& a_conj, const Mat& b_conj, const Mat& m);
/// col(a, b)(b - m a)^{-1}(-m, I).
Mat pair_complement(const Mat& a, const Mat& b, const Mat& m);

struct WeylData {
    cplx lam;
    Mat a, b, a_conj, b_conj, K, m, mab;
    std::vector<Mat> U, V;      // D x n on the grid
    double right_residual = 0.0;  // |Gamma V(b)| relative to |V(b)|
};

WeylData weyl_solutions(const NevanlinnaPair& np, const FundamentalSolution& fs, const Mat& m, const Mat& Gamma);
WeylData weyl_solutions(const NevanlinnaPair& np, const FundamentalSolution& fs, const Mat& Gamma);

/// x(t) = V(t) int_a^t U_conj* phi + U(t) int_t^b V_conj* phi.
std::vector<Vec> split_canonical(const WeylData& wd, const WeylData& wd_conj, const Grid& grid,
                                 const std::vector<Vec>& phi);

/// y1 from the rows u_j, v_j and the densities m_k[f].
std::vector<Vec> split_resolvent(const CanonicalSystem& sys, const WeylData& wd, const WeylData& wd_conj,
                                 const Grid& grid, const Fn& f);

/// Characteristic operator from the left pair and the right condition, through (I - P) and P.
CharOp weyl_char_op(const NevanlinnaPair& np, const Mat& Gamma, const CanonicalSystem& sys, const Grid& grid,
                    int substeps = 4);

struct HerglotzReport {
    double im_min = 1e300;     // min eigenvalue of Im m_ab / Im lam
    double symmetry = 0.0;     // max |m_ab(lam) - m_ab(conj lam)*|
    double v_slack = 1e300;    // min eigenvalue of Im m_ab / Im lam - Gram_m(v)
    double w_slack = 1e300;    // the same with int V* W V, W = Im H / Im lam
};

/// ws must be closed under conjugation and share one grid.
HerglotzReport herglotz_check(const CanonicalSystem& sys, const Grid& grid, const std::vector<WeylData>& ws);

}  // namespace nevres
