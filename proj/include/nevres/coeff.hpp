#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nevres {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t column, const std::string& what);
    std::size_t column;  // 1-based
};

class EvalError : public std::runtime_error {
public:
    EvalError(int row, int col, const std::string& what);
    int row, col;  // -1 for scalar evaluation
};

enum class Op { Const, T, Lam, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    cplx value{};   // Const
    int power = 0;  // Pow
    NodePtr a, b;
};

/// Immutable expression tree in t and lam. Constructors fold constants and
/// trivial identities, so parse(print(e)) reproduces e exactly.
class ScalarExpr {
public:
    ScalarExpr();  // constant 0
    explicit ScalarExpr(NodePtr n) : node_(std::move(n)) {}

    static ScalarExpr constant(cplx c);
    static ScalarExpr t();
    static ScalarExpr lam();

    const Node& node() const { return *node_; }
    NodePtr ptr() const { return node_; }

    cplx eval(double t, cplx lam) const;
    ScalarExpr dt() const;
    /// Conjugate of a lam-free expression (t is real).
    ScalarExpr conj() const;
    bool has_lam() const;
    bool is_zero() const;
    bool is_const() const;
    std::string str() const;

    friend ScalarExpr operator+(const ScalarExpr& x, const ScalarExpr& y);
    friend ScalarExpr operator-(const ScalarExpr& x, const ScalarExpr& y);
    friend ScalarExpr operator*(const ScalarExpr& x, const ScalarExpr& y);
    friend ScalarExpr operator/(const ScalarExpr& x, const ScalarExpr& y);
    friend ScalarExpr operator-(const ScalarExpr& x);
    friend bool operator==(const ScalarExpr& x, const ScalarExpr& y);

private:
    NodePtr node_;
};

ScalarExpr pow(const ScalarExpr& x, int k);
ScalarExpr sin(const ScalarExpr& x);
ScalarExpr cos(const ScalarExpr& x);
ScalarExpr exp(const ScalarExpr& x);
ScalarExpr sqrt(const ScalarExpr& x);

ScalarExpr parse_expr(const std::string& source);
ScalarExpr differentiate_t(const ScalarExpr& e);

class MatrixExpr {
public:
    MatrixExpr() = default;
    MatrixExpr(int rows, int cols);
    static MatrixExpr zero(int rows, int cols);
    static MatrixExpr identity(int n);
    static MatrixExpr scalar(int n, const ScalarExpr& e);
    static MatrixExpr parse(const std::vector<std::vector<std::string>>& src);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    ScalarExpr& operator()(int i, int j) { return e_[i * cols_ + j]; }
    const ScalarExpr& operator()(int i, int j) const { return e_[i * cols_ + j]; }

    Mat eval(double t, cplx lam) const;
    MatrixExpr dt() const;
    /// Conjugate transpose; entries must be lam-free.
    MatrixExpr adjoint() const;
    bool has_lam() const;
    bool is_zero() const;

    friend MatrixExpr operator+(const MatrixExpr& x, const MatrixExpr& y);
    friend MatrixExpr operator-(const MatrixExpr& x, const MatrixExpr& y);
    friend MatrixExpr operator*(const ScalarExpr& c, const MatrixExpr& x);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<ScalarExpr> e_;
};

Mat eval_matrix(const MatrixExpr& m, double t, cplx lam);

}  // namespace nevres
