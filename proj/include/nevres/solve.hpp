#pragma once

#include <vector>

#include "nevres/forms.hpp"

namespace nevres {

/// The first-order system (i/2)((Qx)' + Q*x') - H(t, l_lam) x = W F attached to a family.
class CanonicalSystem {
public:
    explicit CanonicalSystem(LambdaFamily fam);

    const LambdaFamily& family() const { return fam_; }
    int dim() const { return fam_.dim() * fam_.order(); }
    int order() const { return fam_.order(); }
    int d() const { return fam_.dim(); }

    Jets jets(double t, cplx lam) const;
    Jets weight_jets(double t) const;
    Mat ReQ(double t) const;
    Mat Qprime(double t) const;
    Mat H(double t, cplx lam) const;
    /// x' = A x for the homogeneous system.
    Mat generator(double t, cplx lam) const;
    /// Im H / Im lam.
    Mat nev_weight(double t, cplx lam) const;
    /// W(t, l_lam, m).
    Mat weight(double t, cplx lam) const;
    /// W(t, l_lam*, m) F(t, l_lam*, m) from the branch formula. l_lam* = l_conj(lam), so this is the
    /// resolvent integrand at lam.
    Vec lifted_rhs(double t, cplx lam, const FuncJet& f) const;
    /// ybar(t, l_lam, m, f) read off y and f.
    Vec lift(double t, cplx lam, const FuncJet& y, const FuncJet& f) const;
    /// y, y', ..., y^(k) recovered from x = ybar(t, l_lam, m, f), k <= [r/2].
    FuncJet derivatives(double t, cplx lam, const Vec& x, const FuncJet& f, int k) const;
    /// Rows giving y^(k) of the homogeneous solutions X(t) h, k <= [r/2].
    Mat derivative_rows(double t, cplx lam, const Mat& X, int k) const;

private:
    LambdaFamily fam_;
};

struct FundamentalSolution {
    cplx lam;
    Grid grid;
    int substeps = 4;
    int steps = 0;
    Mat G;
    std::vector<Mat> X, Xinv, R;  // R = Re Q at the nodes
};

/// Classical fourth-order integration anchored at X(a) = I.
FundamentalSolution integrate_fundamental(const CanonicalSystem& sys, cplx lam, const Grid& grid, int substeps = 4);

struct LagrangeReport {
    double residual = 0.0;  // max |X_conj* ReQ X - G|
    double monotone = 0.0;  // min eigenvalue of Im lam (X* ReQ X - G) over t >= a
};

LagrangeReport lagrange_residual(const FundamentalSolution& fs, const FundamentalSolution& fs_conj);

/// X_conj(t)* from the conserved quantity: G X^{-1}(t) ReQ(t)^{-1}.
Mat adjoint_shortcut(const FundamentalSolution& fs, int k);

enum class WeightChoice { Family, Nevanlinna };

struct DeltaData {
    Mat Delta;
    Mat null_basis;  // columns span N
    Mat P;           // orthoprojector onto the orthogonal complement of N
    double eps = 0.0;
};

DeltaData delta_matrix(const CanonicalSystem& sys, const FundamentalSolution& fs, WeightChoice which, int i0,
                       int i1, double rel_eps = 1e-8);
DeltaData split_delta(const Mat& Delta, double rel_eps = 1e-8);

struct Definiteness {
    double delta = 0.0;  // smallest eigenvalue of Delta on ran P
    bool trivial = false;
    bool positive = false;  // P = I and delta > 0
};

Definiteness definiteness_check(const DeltaData& dd);

/// Smallest eigenvalue of a Hermitian matrix (symmetrized first).
double min_eig(const Mat& A);
double max_eig(const Mat& A);

}  // namespace nevres
