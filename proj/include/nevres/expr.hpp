#pragma once

#include <memory>
#include <vector>

#include "nevres/coeff.hpp"

namespace nevres {

enum class Kind { P, Q, S };

/// Point values of p_j, q_j, s_j and their t-derivatives.
/// p[j][k] is the k-th derivative of p_j; q[0], s[0] are zero.
struct Jets {
    int d = 1;
    int r = 0;
    int K = 0;
    std::vector<std::vector<Mat>> p, q, s;

    static Jets zero(int d, int r, int K);
    /// Zero beyond the stored order.
    Mat get(Kind kind, int j, int k = 0) const;
    Mat& at(Kind kind, int j, int k);

    /// Jets of the formal adjoint: p_j -> p_j*, q_j -> s_j*, s_j -> q_j*.
    Jets adjoint() const;
    /// Same expression written with a larger formal order (zero coefficients).
    Jets inflate(int r2) const;
    /// Drops trailing zero coefficients of odd order, so Im l keeps even order.
    Jets trimmed(double tol = 0.0) const;
    Jets operator+(const Jets& o) const;
    Jets operator-(const Jets& o) const;
    Jets operator*(cplx c) const;
    /// (l - l*)/(2i)
    Jets imag_part() const;
    /// (l + l*)/2
    Jets real_part() const;
};

/// l = sum_k i^k l_k with l_{2j} = D^j p_j D^j and
/// l_{2j-1} = 1/2 D^{j-1}(D q_j + s_j D) D^{j-1}.
class DiffExpression {
public:
    int d = 1;
    int r = 0;
    std::vector<MatrixExpr> p;  // j = 0..r/2
    std::vector<MatrixExpr> q;  // j = 0..(r+1)/2, q[0] unused
    std::vector<MatrixExpr> s;

    static DiffExpression zero(int d, int r);

    const MatrixExpr& coeff(Kind kind, int j) const;
    MatrixExpr& coeff(Kind kind, int j);
    Mat eval_coefficient(Kind kind, int j, double t, cplx lam) const;

    /// Caches symbolic t-derivatives up to order K; jets() is faster afterwards.
    void prepare(int K);
    Jets jets(double t, cplx lam, int K) const;

    DiffExpression inflate(int r2) const;
    bool has_lam() const;

private:
    struct Table {
        int K = -1;
        std::vector<std::vector<MatrixExpr>> p, q, s;
    };
    std::shared_ptr<const Table> table_;
};

/// Weight expression m of even order s with s~_j = q~_j* implied.
struct WeightExpression {
    int d = 1;
    int s = 0;
    std::vector<MatrixExpr> pt;  // j = 0..s/2
    std::vector<MatrixExpr> qt;  // j = 0..s/2, qt[0] unused

    static WeightExpression zero(int d, int s);
    DiffExpression as_expression() const;
};

/// Form matrix of the Dirichlet density of an even-order expression (or of
/// an odd one padded by its top odd terms), acting on col(f, f', ..., f^(k)).
Mat form_matrix(const Jets& J, int k);

struct ValidationReport {
    double symmetry = 0.0;       // max |p_j(t,lam) - p_j(t,conj lam)*| etc.
    double nevanlinna = 0.0;     // max eigenvalue of Im form(l_lam)/Im lam, must be <= 0
    double domination = 0.0;     // min eigenvalue of gap and of form(m), must be >= 0
    bool ok(double tol = 1e-10) const;
};

class LambdaFamily {
public:
    DiffExpression l;
    WeightExpression m;
    DiffExpression n;  // Nevanlinna part n_lam, even order

    LambdaFamily() = default;
    LambdaFamily(DiffExpression l, WeightExpression m, DiffExpression n);

    int order() const { return l.r; }
    int dim() const { return l.d; }
    /// l_lam = l - lam m - n_lam as a single expression.
    const DiffExpression& composed() const { return composed_; }
    const DiffExpression& weight() const { return weight_; }
    Mat eval_coefficient(Kind kind, int j, double t, cplx lam) const;

    ValidationReport validate(const std::vector<double>& ts, const std::vector<cplx>& lams) const;

private:
    DiffExpression composed_, weight_;
};

}  // namespace nevres
