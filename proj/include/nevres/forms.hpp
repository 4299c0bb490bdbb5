#pragma once

#include <functional>
#include <vector>

#include "nevres/canon.hpp"

namespace nevres {

/// f, f', ..., f^(K) at t.
using Fn = std::function<FuncJet(double t, int K)>;

/// Symbolic derivatives are cached up to the highest order requested so far.
Fn expr_function(const MatrixExpr& f);
Fn zero_function(int d);

/// Uniform grid with composite Simpson weights.
struct Grid {
    double a = 0.0, b = 1.0;
    int N = 8;
    std::vector<double> t, w;

    static Grid uniform(double a, double b, int N);
    double h() const { return (b - a) / N; }
    /// Simpson weights for [t_i0, t_i1]; needs i1 - i0 even.
    std::vector<double> weights(int i0, int i1) const;
};

cplx form_density(const Jets& L, const FuncJet& f, const FuncJet& g);
cplx form_integral(const DiffExpression& L, const Fn& f, const Fn& g, const Grid& grid, cplx lam = 0.0);

struct NullReport {
    double value = 0.0;      // m[f, f]
    double pointwise = 0.0;  // max |m(t) col(f, ..., f^(s/2))|
    double scale = 1.0;
    bool is_null = false;
};

NullReport null_check(const WeightExpression& m, const Fn& f, const Grid& grid, double tol = 1e-10);

struct RelationResiduals {
    double weight_form = 0.0;   // (W F1, F2) = m{f1, f2}
    double imag_balance = 0.0;  // the Im-balance for ybar
    double skew_balance = 0.0;  // m{y1, f2} - m{f1, y2} against the weighted pairings
    double scale = 1.0;
};

/// Pointwise residuals of the three form relations at every grid node.
RelationResiduals relation_checks(const LambdaFamily& fam, const Fn& f1, const Fn& f2, const Fn& y1,
                                  const Fn& y2, const Grid& grid, cplx lam);

}  // namespace nevres
