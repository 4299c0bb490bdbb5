#include "nevres/coeff.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>

namespace nevres {

ParseError::ParseError(std::size_t col, const std::string& what)
    : std::runtime_error("column " + std::to_string(col) + ": " + what), column(col) {}

EvalError::EvalError(int r, int c, const std::string& what)
    : std::runtime_error(r < 0 ? what
                               : "entry (" + std::to_string(r) + "," + std::to_string(c) +
                                     "): " + what),
      row(r),
      col(c) {}

namespace {

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_const(cplx c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = c;
    return n;
}

bool is_c(const NodePtr& n, double v) { return n->op == Op::Const && n->value == cplx(v, 0.0); }

cplx apply_fn(Op op, cplx z) {
    switch (op) {
        case Op::Sin: return std::sin(z);
        case Op::Cos: return std::cos(z);
        case Op::Exp: return std::exp(z);
        case Op::Sqrt: return std::sqrt(z);
        default: return z;
    }
}

std::string fmt_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::fabs(x));
    std::string s(buf);
    if (std::signbit(x)) return "(-" + s + ")";
    return s;
}

void print(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::Const:
            if (n.value.imag() == 0.0) {
                out += fmt_real(n.value.real());
            } else if (n.value.real() == 0.0) {
                out += "(" + fmt_real(n.value.imag()) + "*i)";
            } else {
                out += "(" + fmt_real(n.value.real()) + "+" + fmt_real(n.value.imag()) + "*i)";
            }
            return;
        case Op::T: out += "t"; return;
        case Op::Lam: out += "lam"; return;
        case Op::Neg:
            out += "(-";
            print(*n.a, out);
            out += ")";
            return;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            static const char sym[] = {'+', '-', '*', '/'};
            out += "(";
            print(*n.a, out);
            out += sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
            print(*n.b, out);
            out += ")";
            return;
        }
        case Op::Pow:
            out += "(";
            print(*n.a, out);
            out += "^" + std::to_string(n.power) + ")";
            return;
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Sqrt: {
            static const char* names[] = {"sin", "cos", "exp", "sqrt"};
            out += names[static_cast<int>(n.op) - static_cast<int>(Op::Sin)];
            out += "(";
            print(*n.a, out);
            out += ")";
            return;
        }
    }
}

bool equal(const Node& x, const Node& y) {
    if (x.op != y.op) return false;
    switch (x.op) {
        case Op::Const: return x.value == y.value;
        case Op::T:
        case Op::Lam: return true;
        case Op::Pow: return x.power == y.power && equal(*x.a, *y.a);
        default:
            if (!equal(*x.a, *y.a)) return false;
            return !x.b || equal(*x.b, *y.b);
    }
}

cplx eval_node(const Node& n, double t, cplx lam) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::T: return {t, 0.0};
        case Op::Lam: return lam;
        case Op::Neg: return -eval_node(*n.a, t, lam);
        case Op::Add: return eval_node(*n.a, t, lam) + eval_node(*n.b, t, lam);
        case Op::Sub: return eval_node(*n.a, t, lam) - eval_node(*n.b, t, lam);
        case Op::Mul: return eval_node(*n.a, t, lam) * eval_node(*n.b, t, lam);
        case Op::Div: {
            cplx den = eval_node(*n.b, t, lam);
            if (den == cplx(0.0, 0.0)) throw EvalError(-1, -1, "division by zero");
            return eval_node(*n.a, t, lam) / den;
        }
        case Op::Pow: {
            cplx base = eval_node(*n.a, t, lam), acc(1.0, 0.0);
            for (int k = 0; k < n.power; ++k) acc *= base;
            return acc;
        }
        default: return apply_fn(n.op, eval_node(*n.a, t, lam));
    }
}

ScalarExpr func(Op op, const ScalarExpr& x) {
    if (x.is_const()) return ScalarExpr::constant(apply_fn(op, x.node().value));
    return ScalarExpr(make(op, x.ptr()));
}

class Parser {
public:
    explicit Parser(const std::string& s) : src_(s) {}

    ScalarExpr run() {
        ScalarExpr e = expr();
        skip();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_ + 1, what); }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c) {
            if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    ScalarExpr expr() {
        ScalarExpr e = term();
        for (char c = peek(); c == '+' || c == '-'; c = peek()) {
            ++pos_;
            ScalarExpr rhs = term();
            e = c == '+' ? e + rhs : e - rhs;
        }
        return e;
    }

    ScalarExpr term() {
        ScalarExpr e = factor();
        for (char c = peek(); c == '*' || c == '/'; c = peek()) {
            ++pos_;
            ScalarExpr rhs = factor();
            e = c == '*' ? e * rhs : e / rhs;
        }
        return e;
    }

    // Unary minus is accepted here in addition to the base grammar.
    ScalarExpr factor() {
        if (peek() == '-') {
            ++pos_;
            return -factor();
        }
        ScalarExpr b = base();
        if (peek() == '^') {
            ++pos_;
            skip();
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (start == pos_) fail("expected integer exponent");
            b = pow(b, std::stoi(src_.substr(start, pos_ - start)));
        }
        return b;
    }

    ScalarExpr number() {
        std::size_t start = pos_;
        auto digits = [&] {
            std::size_t s = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            return pos_ - s;
        };
        std::size_t nd = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            nd += digits();
        }
        if (nd == 0) fail("malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) fail("malformed exponent");
        }
        return ScalarExpr::constant(std::stod(src_.substr(start, pos_ - start)));
    }

    ScalarExpr base() {
        char c = peek();
        if (c == '\0') fail("unexpected end of input");
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            ScalarExpr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            std::string id = src_.substr(start, pos_ - start);
            if (id == "t") return ScalarExpr::t();
            if (id == "lam") return ScalarExpr::lam();
            if (id == "i") return ScalarExpr::constant({0.0, 1.0});
            Op op;
            if (id == "sin") op = Op::Sin;
            else if (id == "cos") op = Op::Cos;
            else if (id == "exp") op = Op::Exp;
            else if (id == "sqrt") op = Op::Sqrt;
            else throw ParseError(start + 1, "unknown identifier '" + id + "'");
            expect('(');
            ScalarExpr arg = expr();
            expect(')');
            return func(op, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

ScalarExpr::ScalarExpr() : node_(make_const(0.0)) {}
ScalarExpr ScalarExpr::constant(cplx c) { return ScalarExpr(make_const(c)); }
ScalarExpr ScalarExpr::t() { return ScalarExpr(make(Op::T)); }
ScalarExpr ScalarExpr::lam() { return ScalarExpr(make(Op::Lam)); }

bool ScalarExpr::is_const() const { return node_->op == Op::Const; }
bool ScalarExpr::is_zero() const { return is_c(node_, 0.0); }

cplx ScalarExpr::eval(double t, cplx lam) const { return eval_node(*node_, t, lam); }

std::string ScalarExpr::str() const {
    std::string s;
    print(*node_, s);
    return s;
}

bool ScalarExpr::has_lam() const {
    std::function<bool(const Node&)> rec = [&](const Node& n) {
        if (n.op == Op::Lam) return true;
        if (n.a && rec(*n.a)) return true;
        return n.b && rec(*n.b);
    };
    return rec(*node_);
}

ScalarExpr operator+(const ScalarExpr& x, const ScalarExpr& y) {
    if (x.is_const() && y.is_const()) return ScalarExpr::constant(x.node().value + y.node().value);
    if (x.is_zero()) return y;
    if (y.is_zero()) return x;
    return ScalarExpr(make(Op::Add, x.ptr(), y.ptr()));
}

ScalarExpr operator-(const ScalarExpr& x, const ScalarExpr& y) {
    if (x.is_const() && y.is_const()) return ScalarExpr::constant(x.node().value - y.node().value);
    if (y.is_zero()) return x;
    if (x.is_zero()) return -y;
    return ScalarExpr(make(Op::Sub, x.ptr(), y.ptr()));
}

ScalarExpr operator*(const ScalarExpr& x, const ScalarExpr& y) {
    if (x.is_const() && y.is_const()) return ScalarExpr::constant(x.node().value * y.node().value);
    if (x.is_zero() || y.is_zero()) return ScalarExpr();
    if (is_c(x.ptr(), 1.0)) return y;
    if (is_c(y.ptr(), 1.0)) return x;
    return ScalarExpr(make(Op::Mul, x.ptr(), y.ptr()));
}

ScalarExpr operator/(const ScalarExpr& x, const ScalarExpr& y) {
    if (x.is_const() && y.is_const() && !y.is_zero())
        return ScalarExpr::constant(x.node().value / y.node().value);
    if (x.is_zero() && !y.is_zero()) return ScalarExpr();
    if (is_c(y.ptr(), 1.0)) return x;
    return ScalarExpr(make(Op::Div, x.ptr(), y.ptr()));
}

ScalarExpr operator-(const ScalarExpr& x) {
    if (x.is_const()) return ScalarExpr::constant(-x.node().value);
    if (x.node().op == Op::Neg) return ScalarExpr(x.node().a);
    return ScalarExpr(make(Op::Neg, x.ptr()));
}

bool operator==(const ScalarExpr& x, const ScalarExpr& y) { return equal(x.node(), y.node()); }

ScalarExpr pow(const ScalarExpr& x, int k) {
    if (k == 0) return ScalarExpr::constant(1.0);
    if (k == 1) return x;
    if (x.is_const()) {
        cplx acc(1.0, 0.0);
        for (int j = 0; j < k; ++j) acc *= x.node().value;
        return ScalarExpr::constant(acc);
    }
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->power = k;
    n->a = x.ptr();
    return ScalarExpr(n);
}

ScalarExpr sin(const ScalarExpr& x) { return func(Op::Sin, x); }
ScalarExpr cos(const ScalarExpr& x) { return func(Op::Cos, x); }
ScalarExpr exp(const ScalarExpr& x) { return func(Op::Exp, x); }
ScalarExpr sqrt(const ScalarExpr& x) { return func(Op::Sqrt, x); }

ScalarExpr ScalarExpr::dt() const {
    const Node& n = *node_;
    auto A = [&] { return ScalarExpr(n.a); };
    auto B = [&] { return ScalarExpr(n.b); };
    switch (n.op) {
        case Op::Const:
        case Op::Lam: return ScalarExpr();
        case Op::T: return constant(1.0);
        case Op::Neg: return -A().dt();
        case Op::Add: return A().dt() + B().dt();
        case Op::Sub: return A().dt() - B().dt();
        case Op::Mul: return A().dt() * B() + A() * B().dt();
        case Op::Div: {
            ScalarExpr bd = B().dt();
            if (bd.is_zero()) return A().dt() / B();
            return (A().dt() * B() - A() * bd) / pow(B(), 2);
        }
        case Op::Pow:
            return constant(static_cast<double>(n.power)) * pow(A(), n.power - 1) * A().dt();
        case Op::Sin: return A().dt() * cos(A());
        case Op::Cos: return -(A().dt() * sin(A()));
        case Op::Exp: return A().dt() * exp(A());
        case Op::Sqrt: return A().dt() / (constant(2.0) * sqrt(A()));
    }
    return ScalarExpr();
}

ScalarExpr ScalarExpr::conj() const {
    const Node& n = *node_;
    switch (n.op) {
        case Op::Const: return constant(std::conj(n.value));
        case Op::T: return *this;
        case Op::Lam: throw std::invalid_argument("conj of a lam-dependent expression");
        case Op::Neg: return -ScalarExpr(n.a).conj();
        case Op::Add: return ScalarExpr(n.a).conj() + ScalarExpr(n.b).conj();
        case Op::Sub: return ScalarExpr(n.a).conj() - ScalarExpr(n.b).conj();
        case Op::Mul: return ScalarExpr(n.a).conj() * ScalarExpr(n.b).conj();
        case Op::Div: return ScalarExpr(n.a).conj() / ScalarExpr(n.b).conj();
        case Op::Pow: return pow(ScalarExpr(n.a).conj(), n.power);
        default: return func(n.op, ScalarExpr(n.a).conj());
    }
}

ScalarExpr parse_expr(const std::string& source) { return Parser(source).run(); }
ScalarExpr differentiate_t(const ScalarExpr& e) { return e.dt(); }

MatrixExpr::MatrixExpr(int rows, int cols)
    : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows * cols)) {}

MatrixExpr MatrixExpr::zero(int rows, int cols) { return MatrixExpr(rows, cols); }

MatrixExpr MatrixExpr::identity(int n) { return scalar(n, ScalarExpr::constant(1.0)); }

MatrixExpr MatrixExpr::scalar(int n, const ScalarExpr& e) {
    MatrixExpr m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = e;
    return m;
}

MatrixExpr MatrixExpr::parse(const std::vector<std::vector<std::string>>& src) {
    int rows = static_cast<int>(src.size());
    int cols = rows ? static_cast<int>(src[0].size()) : 0;
    MatrixExpr m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(src[i].size()) != cols)
            throw std::invalid_argument("ragged matrix expression");
        for (int j = 0; j < cols; ++j) m(i, j) = parse_expr(src[i][j]);
    }
    return m;
}

Mat MatrixExpr::eval(double t, cplx lam) const {
    Mat out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            try {
                out(i, j) = (*this)(i, j).eval(t, lam);
            } catch (const EvalError& e) {
                throw EvalError(i, j, e.what());
            }
        }
    return out;
}

MatrixExpr MatrixExpr::dt() const {
    MatrixExpr m(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) m.e_[k] = e_[k].dt();
    return m;
}

MatrixExpr MatrixExpr::adjoint() const {
    MatrixExpr m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j).conj();
    return m;
}

bool MatrixExpr::has_lam() const {
    for (const auto& e : e_)
        if (e.has_lam()) return true;
    return false;
}

bool MatrixExpr::is_zero() const {
    for (const auto& e : e_)
        if (!e.is_zero()) return false;
    return true;
}

MatrixExpr operator+(const MatrixExpr& x, const MatrixExpr& y) {
    MatrixExpr m(x.rows_, x.cols_);
    for (std::size_t k = 0; k < m.e_.size(); ++k) m.e_[k] = x.e_[k] + y.e_[k];
    return m;
}

MatrixExpr operator-(const MatrixExpr& x, const MatrixExpr& y) {
    MatrixExpr m(x.rows_, x.cols_);
    for (std::size_t k = 0; k < m.e_.size(); ++k) m.e_[k] = x.e_[k] - y.e_[k];
    return m;
}

MatrixExpr operator*(const ScalarExpr& c, const MatrixExpr& x) {
    MatrixExpr m(x.rows_, x.cols_);
    for (std::size_t k = 0; k < m.e_.size(); ++k) m.e_[k] = c * x.e_[k];
    return m;
}

Mat eval_matrix(const MatrixExpr& m, double t, cplx lam) { return m.eval(t, lam); }

}  // namespace nevres
