#pragma once

#include <functional>
#include <vector>

#include "nevres/charop.hpp"

namespace nevres {

struct ResolventResult {
    cplx lam;
    std::vector<Vec> x;   // ybar(t_k, l_lam, m, f)
    std::vector<Vec> y1;  // first d components
    Fn f;
};

/// R(lam) on a grid for a given characteristic operator.
class ResolventKernel {
public:
    ResolventKernel(const CanonicalSystem& sys, const Grid& grid, cplx lam, const Mat& M, int substeps = 4);
    ResolventKernel(const CanonicalSystem& sys, FundamentalSolution fs, FundamentalSolution fs_conj, const Mat& M);

    const CanonicalSystem& system() const { return sys_; }
    const Grid& grid() const { return fs_.grid; }
    const FundamentalSolution& fs() const { return fs_; }
    const FundamentalSolution& fs_conj() const { return fc_; }
    const Mat& M() const { return M_; }
    cplx lam() const { return fs_.lam; }

    /// W(s, l_conj, m) F(s, l_conj, m) per node, from the branch formula.
    std::vector<Vec> lift_rhs(const Fn& f) const;
    /// The same through the product of W and F.
    std::vector<Vec> lift_rhs_product(const Fn& f) const;

    ResolventResult apply(const Fn& f) const;
    /// Applies the canonical resolvent to node samples phi (x = R_lam phi).
    std::vector<Vec> apply_canonical(const std::vector<Vec>& phi) const;

    /// K(t_k, t_j); side = -1 or +1 picks the limit s -> t_k from below or above when j = k.
    Mat kernel(int k, int j, int side = 0) const;

    /// y, ..., y^(s/2) at node k.
    FuncJet solution_jet(const ResolventResult& res, int k) const;

private:
    CanonicalSystem sys_;
    FundamentalSolution fs_, fc_;
    Mat M_;
};

using ResolventFactory = std::function<ResolventKernel(cplx)>;

/// (u, v)_m over the kernel's grid, u = R f given as a result, v a smooth function.
cplx m_inner(const ResolventKernel& K, const ResolventResult& u, const Fn& v);
cplx m_inner(const ResolventKernel& K, const ResolventResult& u, const ResolventKernel& K2,
             const ResolventResult& v);
cplx m_inner(const CanonicalSystem& sys, const Grid& grid, const Fn& u, const Fn& v);

struct OdeBcReport {
    double ode = 0.0;       // canonical residual by fourth-order differences, interior nodes
    double boundary = 0.0;  // least-squares residual of x(a) = M h, x(b) = N h
    double scale = 1.0;
};

OdeBcReport residuals_ode_bc(const ResolventKernel& K, const ResolventResult& res, const BoundaryPair& bp);

struct SuiteReport {
    double adjoint = 0.0;      // max |(R f, g) - (f, R(conj) g)|
    double nevanlinna = -1e300;  // max (|Rf|^2 - Im(Rf, f)/Im lam)
    double equality = 0.0;     // max |(|Rf|^2 - Im(Rf, f)/Im lam)|
    double norm_slack = 1e300;   // min (|f|/|Im lam| - |Rf|)
    double weighted_slack = 1e300;  // min (|F|_W/|Im lam| - |R F|_W), canonical level
    double contour = 0.0;
    bool ok(double tol_adj = 1e-7, double tol_nev = 1e-8, double tol_norm = 1e-8, double tol_contour = 1e-7) const;
};

/// lams must be closed under conjugation.
SuiteReport property_suite(const ResolventFactory& R, const std::vector<Fn>& fs, const std::vector<cplx>& lams,
                           bool contour = true);

struct GreenSide {
    DiffExpression l;  // prepared to its order + 2
    DiffExpression m;  // even-order weight
    cplx lam = 0.0;
    Fn y, f;
};

struct GreenReport {
    cplx lhs = 0.0, rhs = 0.0;
    double residual = 0.0, scale = 1.0;
};

/// int m1{f1, y2} - int m2*{y1, f2} - int (l1 - l2*){y1, y2} against the boundary pairing over [t_i0, t_i1].
GreenReport green_formula(const GreenSide& one, const GreenSide& two, const Grid& grid, int i0, int i1);

/// The spectral form: m{f1, y2} - m{y1, f2} + (lam1 - conj lam2) m{y1, y2} = i (ReQ ybar1, ybar2)|.
GreenReport green_spectral(const LambdaFamily& fam, cplx lam1, const Fn& y1, const Fn& f1, cplx lam2, const Fn& y2,
                           const Fn& f2, const Grid& grid, int i0, int i1);

/// m_k[f] for k = 0..s/2: the pieces of m{f, g} paired with g^(k).
FuncJet weight_densities(const CanonicalSystem& sys, double t, const FuncJet& f);

/// R(lam) f through the projection split: rows of X_lam and X_conj with P(lam), P(conj lam).
std::vector<Vec> straus_split(const ResolventKernel& K, const Mat& M_conj, const Fn& f);

/// Same characteristic operator moved to the anchor c: X(c) M X_conj(c)*.
CharOp reanchor_char_op(const CharOp& M, const CanonicalSystem& sys, double a, double c, int N, int substeps = 4);

}  // namespace nevres
