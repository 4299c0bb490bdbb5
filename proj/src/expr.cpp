#include "nevres/expr.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace nevres {

namespace {

int np(int r) { return r / 2; }
int nq(int r) { return (r + 1) / 2; }

std::vector<std::vector<Mat>>& pick(Jets& J, Kind kind) {
    return kind == Kind::P ? J.p : kind == Kind::Q ? J.q : J.s;
}
const std::vector<std::vector<Mat>>& pick(const Jets& J, Kind kind) {
    return kind == Kind::P ? J.p : kind == Kind::Q ? J.q : J.s;
}

template <class F>
Jets combine(const Jets& a, const Jets& b, F f) {
    int r = std::max(a.r, b.r), K = std::min(a.K, b.K);
    Jets out = Jets::zero(a.d, r, K);
    for (Kind kind : {Kind::P, Kind::Q, Kind::S}) {
        auto& dst = pick(out, kind);
        for (std::size_t j = 0; j < dst.size(); ++j)
            for (int k = 0; k <= K; ++k)
                dst[j][k] = f(a.get(kind, static_cast<int>(j), k), b.get(kind, static_cast<int>(j), k));
    }
    return out;
}

double min_eig(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

Jets Jets::zero(int d, int r, int K) {
    Jets J;
    J.d = d;
    J.r = r;
    J.K = K;
    std::vector<Mat> z(static_cast<std::size_t>(K + 1), Mat::Zero(d, d));
    J.p.assign(static_cast<std::size_t>(np(r) + 1), z);
    J.q.assign(static_cast<std::size_t>(nq(r) + 1), z);
    J.s.assign(static_cast<std::size_t>(nq(r) + 1), z);
    return J;
}

Mat Jets::get(Kind kind, int j, int k) const {
    const auto& v = pick(*this, kind);
    if (j < 0 || j >= static_cast<int>(v.size()) || k > K) return Mat::Zero(d, d);
    if (kind != Kind::P && j == 0) return Mat::Zero(d, d);
    return v[j][k];
}

Mat& Jets::at(Kind kind, int j, int k) { return pick(*this, kind).at(j).at(k); }

Jets Jets::adjoint() const {
    Jets out = zero(d, r, K);
    for (std::size_t j = 0; j < p.size(); ++j)
        for (int k = 0; k <= K; ++k) out.p[j][k] = p[j][k].adjoint();
    for (std::size_t j = 1; j < q.size(); ++j)
        for (int k = 0; k <= K; ++k) {
            out.q[j][k] = s[j][k].adjoint();
            out.s[j][k] = q[j][k].adjoint();
        }
    return out;
}

Jets Jets::inflate(int r2) const {
    if (r2 < r) throw std::invalid_argument("inflate to a lower order");
    Jets out = zero(d, r2, K);
    for (Kind kind : {Kind::P, Kind::Q, Kind::S}) {
        const auto& src = pick(*this, kind);
        auto& dst = pick(out, kind);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
    }
    return out;
}

Jets Jets::trimmed(double tol) const {
    int r2 = r;
    auto top_zero = [&](int rr) {
        if (rr % 2 == 1) {
            int j = nq(rr);
            for (int k = 0; k <= K; ++k)
                if (get(Kind::Q, j, k).norm() > tol || get(Kind::S, j, k).norm() > tol) return false;
        } else {
            int j = np(rr);
            for (int k = 0; k <= K; ++k)
                if (get(Kind::P, j, k).norm() > tol) return false;
        }
        return true;
    };
    while (r2 > 0 && r2 % 2 == 1 && top_zero(r2)) --r2;
    Jets out = zero(d, r2, K);
    for (Kind kind : {Kind::P, Kind::Q, Kind::S}) {
        auto& dst = pick(out, kind);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = pick(*this, kind)[j];
    }
    return out;
}

Jets Jets::operator+(const Jets& o) const {
    return combine(*this, o, [](const Mat& x, const Mat& y) -> Mat { return x + y; });
}

Jets Jets::operator-(const Jets& o) const {
    return combine(*this, o, [](const Mat& x, const Mat& y) -> Mat { return x - y; });
}

Jets Jets::operator*(cplx c) const {
    return combine(*this, *this, [c](const Mat& x, const Mat&) -> Mat { return c * x; });
}

Jets Jets::imag_part() const { return ((*this - adjoint()) * cplx(0.0, -0.5)).trimmed(1e-14); }

Jets Jets::real_part() const { return (*this + adjoint()) * 0.5; }

DiffExpression DiffExpression::zero(int d, int r) {
    DiffExpression e;
    e.d = d;
    e.r = r;
    e.p.assign(static_cast<std::size_t>(np(r) + 1), MatrixExpr::zero(d, d));
    e.q.assign(static_cast<std::size_t>(nq(r) + 1), MatrixExpr::zero(d, d));
    e.s.assign(static_cast<std::size_t>(nq(r) + 1), MatrixExpr::zero(d, d));
    return e;
}

const MatrixExpr& DiffExpression::coeff(Kind kind, int j) const {
    const auto& v = kind == Kind::P ? p : kind == Kind::Q ? q : s;
    if (j < 0 || j >= static_cast<int>(v.size()) || (kind != Kind::P && j == 0))
        throw std::out_of_range("coefficient index out of range");
    return v[j];
}

MatrixExpr& DiffExpression::coeff(Kind kind, int j) {
    table_.reset();
    return const_cast<MatrixExpr&>(static_cast<const DiffExpression&>(*this).coeff(kind, j));
}

Mat DiffExpression::eval_coefficient(Kind kind, int j, double t, cplx lam) const {
    return coeff(kind, j).eval(t, lam);
}

void DiffExpression::prepare(int K) {
    auto tab = std::make_shared<Table>();
    tab->K = K;
    auto build = [K](const std::vector<MatrixExpr>& src) {
        std::vector<std::vector<MatrixExpr>> out(src.size());
        for (std::size_t j = 0; j < src.size(); ++j) {
            out[j].push_back(src[j]);
            for (int k = 1; k <= K; ++k) out[j].push_back(out[j].back().dt());
        }
        return out;
    };
    tab->p = build(p);
    tab->q = build(q);
    tab->s = build(s);
    table_ = tab;
}

Jets DiffExpression::jets(double t, cplx lam, int K) const {
    if (!table_ || table_->K < K) {
        DiffExpression tmp = *this;
        tmp.prepare(K);
        return tmp.jets(t, lam, K);
    }
    Jets J = Jets::zero(d, r, K);
    for (std::size_t j = 0; j < p.size(); ++j)
        for (int k = 0; k <= K; ++k) J.p[j][k] = table_->p[j][k].eval(t, lam);
    for (std::size_t j = 1; j < q.size(); ++j)
        for (int k = 0; k <= K; ++k) {
            J.q[j][k] = table_->q[j][k].eval(t, lam);
            J.s[j][k] = table_->s[j][k].eval(t, lam);
        }
    return J;
}

DiffExpression DiffExpression::inflate(int r2) const {
    if (r2 < r) throw std::invalid_argument("inflate to a lower order");
    DiffExpression e = zero(d, r2);
    std::copy(p.begin(), p.end(), e.p.begin());
    std::copy(q.begin(), q.end(), e.q.begin());
    std::copy(s.begin(), s.end(), e.s.begin());
    return e;
}

bool DiffExpression::has_lam() const {
    for (const auto* v : {&p, &q, &s})
        for (const auto& m : *v)
            if (m.has_lam()) return true;
    return false;
}

WeightExpression WeightExpression::zero(int d, int s) {
    WeightExpression w;
    w.d = d;
    w.s = s;
    w.pt.assign(static_cast<std::size_t>(s / 2 + 1), MatrixExpr::zero(d, d));
    w.qt.assign(static_cast<std::size_t>(s / 2 + 1), MatrixExpr::zero(d, d));
    return w;
}

DiffExpression WeightExpression::as_expression() const {
    if (s % 2) throw std::invalid_argument("weight order must be even");
    DiffExpression e = DiffExpression::zero(d, s);
    for (int j = 0; j <= s / 2; ++j) {
        if (pt[j].has_lam()) throw std::invalid_argument("weight coefficients must not depend on lam");
        e.p[j] = pt[j];
    }
    for (int j = 1; j <= s / 2; ++j) {
        if (qt[j].has_lam()) throw std::invalid_argument("weight coefficients must not depend on lam");
        e.q[j] = qt[j];
        e.s[j] = qt[j].adjoint();
    }
    return e;
}

Mat form_matrix(const Jets& J, int k) {
    int d = J.d;
    Mat M = Mat::Zero((k + 1) * d, (k + 1) * d);
    const cplx h(0.0, 0.5);
    for (int j = 0; j <= k; ++j) {
        M.block(j * d, j * d, d, d) = J.get(Kind::P, j);
        if (j >= 1) {
            M.block((j - 1) * d, j * d, d, d) += h * J.get(Kind::S, j);
            M.block(j * d, (j - 1) * d, d, d) -= h * J.get(Kind::Q, j);
        }
    }
    return M;
}

bool ValidationReport::ok(double tol) const {
    return symmetry <= tol && nevanlinna <= tol && domination >= -tol;
}

LambdaFamily::LambdaFamily(DiffExpression l_, WeightExpression m_, DiffExpression n_)
    : l(std::move(l_)), m(std::move(m_)), n(std::move(n_)) {
    if (n.r % 2) throw std::invalid_argument("order of n_lam must be even");
    if (m.s > 2 * (l.r / 2)) throw std::invalid_argument("weight order exceeds 2[r/2]");
    if (n.r > l.r) throw std::invalid_argument("order of n_lam exceeds r");
    if (m.d != l.d || n.d != l.d) throw std::invalid_argument("dimension mismatch");
    weight_ = m.as_expression();
    DiffExpression w = weight_.inflate(l.r), nn = n.inflate(l.r);
    composed_ = DiffExpression::zero(l.d, l.r);
    ScalarExpr lam = ScalarExpr::lam();
    for (std::size_t j = 0; j < composed_.p.size(); ++j)
        composed_.p[j] = l.p[j] - lam * w.p[j] - nn.p[j];
    for (std::size_t j = 1; j < composed_.q.size(); ++j) {
        composed_.q[j] = l.q[j] - lam * w.q[j] - nn.q[j];
        composed_.s[j] = l.s[j] - lam * w.s[j] - nn.s[j];
    }
    composed_.prepare(l.r + 3);
    weight_.prepare(l.r + 3);
}

Mat LambdaFamily::eval_coefficient(Kind kind, int j, double t, cplx lam) const {
    return composed_.eval_coefficient(kind, j, t, lam);
}

ValidationReport LambdaFamily::validate(const std::vector<double>& ts,
                                        const std::vector<cplx>& lams) const {
    ValidationReport rep;
    rep.domination = 1e300;
    rep.nevanlinna = -1e300;
    int k = (l.r + 1) / 2;
    for (double t : ts) {
        Jets wj = weight_.jets(t, 0.0, 0).inflate(2 * k);
        Mat fm = form_matrix(wj, k);
        rep.domination = std::min(rep.domination, min_eig(fm));
        for (cplx lam : lams) {
            Jets a = composed_.jets(t, lam, 0), b = composed_.jets(t, std::conj(lam), 0);
            Jets diff = a - b.adjoint();
            for (const auto* v : {&diff.p, &diff.q, &diff.s})
                for (const auto& row : *v) rep.symmetry = std::max(rep.symmetry, row[0].norm());
            if (lam.imag() == 0.0) continue;
            Mat F = form_matrix(a.inflate(2 * k + 1), k);
            Mat imF = (F - F.adjoint()) / cplx(0.0, 2.0) / lam.imag();
            rep.nevanlinna = std::max(rep.nevanlinna, -min_eig(-imF));
            rep.domination = std::min(rep.domination, min_eig(-imF - fm));
        }
    }
    return rep;
}

}  // namespace nevres
