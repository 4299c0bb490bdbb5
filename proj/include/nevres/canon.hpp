#pragma once

#include <vector>

#include "nevres/expr.hpp"

namespace nevres {

/// Values f, f', ..., f^(K) of a vector function at one point.
using FuncJet = std::vector<Vec>;

FuncJet function_jet(const MatrixExpr& f, double t, int K);

/// Quasi-derivatives f^[k](t|l), k = 0..r, as linear maps of col(f, f', ..., f^(Kf)).
/// ops[k][i] is the i-th t-derivative of that map.
struct QuasiTable {
    int d = 1;
    int r = 0;
    int Kf = 0;
    std::vector<std::vector<Mat>> ops;

    /// A_{k,j}: coefficient of f^(j) in f^[k].
    Mat coeff(int k, int j, int i = 0) const;
    Vec apply(int k, const FuncJet& f, int i = 0) const;
};

/// extra = number of additional t-derivatives required of every f^[k].
QuasiTable quasi_table(const Jets& J, int extra = 0);

/// l[f] from the divergent form directly (independent of the quasi-derivative recursion).
Vec apply_expression(const Jets& J, const FuncJet& f);

/// Dirichlet density L{f, g} at one point.
cplx dirichlet_density(const Jets& J, const FuncJet& f, const FuncJet& g);

int system_dim(int r, int d);

Mat build_Q(const Jets& J);
Mat build_S(const Jets& J);
/// t-derivative of Q (nonzero only through q_{n+1} for odd r).
Mat build_Qprime(const Jets& J);
Mat build_H(const Jets& J);
/// Transform to quasi-derivative coordinates (even r only).
Mat build_C(const Jets& J);
/// Weight block W(t, l, m); m is any even-order expression with order <= 2[r/2].
Mat build_W(const Jets& l, const Jets& m);

/// F(t, l, m) for the lift of f. i > 0 gives t-derivatives.
Vec lift_F(const Jets& l, int s, const FuncJet& f, int i = 0);
/// ybar(t, l, m, f).
Vec lift_solution(const Jets& l, const Jets& m, const FuncJet& y, const FuncJet& f, int i = 0);

/// Right-hand side of the W F branch formula evaluated from quasi-derivatives of f w.r.t. m;
/// lstar are the jets of l* whose F is lifted, l those of l.
Vec weighted_lift_formula(const Jets& l, const Jets& m, const FuncJet& f);

/// (i/2)((Q x)' + S x') - H x for x given with its derivative.
Vec canonical_operator(const Jets& J, const Vec& x, const Vec& dx);

struct IdentityResiduals {
    double im_h = 0.0;        // |Im H(l) - W(l, -Im l)|
    double im_h_alt = 0.0;    // |W(l, Im l) + Im H(l)|
    double hermitian = 0.0;   // |H(l)* - H(l*)| and |W(l,m)* - W(l,m*)|
    double padding = 0.0;     // quasi-derivatives under order inflation
    double wf = 0.0;          // W(l*,m) F(l*,m) against the branch formula
    double null_free = 0.0;   // W F with random data in the null components
};

IdentityResiduals check_identities(const Jets& l, const Jets& m, const FuncJet& f, unsigned seed);

}  // namespace nevres
