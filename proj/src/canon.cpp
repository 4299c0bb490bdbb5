#include "nevres/canon.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace nevres {

namespace {

const cplx I(0.0, 1.0);
const cplx HALF_I(0.0, 0.5);

using OpJet = std::vector<Mat>;

double binom(int n, int k) {
    double b = 1.0;
    for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
    return b;
}

OpJet add(const OpJet& a, const OpJet& b, cplx cb = 1.0) {
    std::size_t L = std::min(a.size(), b.size());
    OpJet out(L);
    for (std::size_t i = 0; i < L; ++i) out[i] = a[i] + cb * b[i];
    return out;
}

OpJet scale(const OpJet& a, cplx c) {
    OpJet out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return out;
}

OpJet deriv(const OpJet& a) { return a.empty() ? a : OpJet(a.begin() + 1, a.end()); }

/// Leibniz rule for (c Y)^(i).
OpJet mul(const Jets& J, Kind kind, int j, const OpJet& Y) {
    std::size_t L = std::min<std::size_t>(static_cast<std::size_t>(J.K + 1), Y.size());
    OpJet out(L);
    for (std::size_t i = 0; i < L; ++i) {
        out[i] = Mat::Zero(Y[0].rows(), Y[0].cols());
        for (std::size_t m = 0; m <= i; ++m)
            out[i] += binom(static_cast<int>(i), static_cast<int>(m)) *
                      (J.get(kind, j, static_cast<int>(m)) * Y[i - m]);
    }
    return out;
}

/// Jet of the plain derivative f^(j) as an operator on col(f, ..., f^(Kf)).
OpJet selector(int d, int Kf, int j) {
    OpJet v;
    for (int i = 0; j + i <= Kf; ++i) {
        Mat m = Mat::Zero(d, d * (Kf + 1));
        m.block(0, (j + i) * d, d, d).setIdentity();
        v.push_back(m);
    }
    return v;
}

Eigen::Block<Mat> blk(Mat& M, int d, int a, int b) { return M.block(a * d, b * d, d, d); }

Vec stack(const FuncJet& f, int Kf) {
    int d = static_cast<int>(f.at(0).size());
    if (static_cast<int>(f.size()) < Kf + 1) throw std::invalid_argument("function jet too short");
    Vec v(d * (Kf + 1));
    for (int k = 0; k <= Kf; ++k) v.segment(k * d, d) = f[k];
    return v;
}

FuncJet vmul(const Jets& J, Kind kind, int j, const FuncJet& y) {
    std::size_t L = std::min<std::size_t>(static_cast<std::size_t>(J.K + 1), y.size());
    FuncJet out(L);
    for (std::size_t i = 0; i < L; ++i) {
        out[i] = Vec::Zero(y[0].size());
        for (std::size_t m = 0; m <= i; ++m)
            out[i] += binom(static_cast<int>(i), static_cast<int>(m)) *
                      (J.get(kind, j, static_cast<int>(m)) * y[i - m]);
    }
    return out;
}

FuncJet vshift(const FuncJet& y, int k) {
    if (k >= static_cast<int>(y.size())) throw std::invalid_argument("function jet too short");
    return FuncJet(y.begin() + k, y.end());
}

Mat inv(const Mat& a) {
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw std::domain_error("singular leading coefficient");
    return lu.inverse();
}

}  // namespace

FuncJet function_jet(const MatrixExpr& f, double t, int K) {
    FuncJet out;
    MatrixExpr g = f;
    for (int k = 0; k <= K; ++k) {
        out.push_back(g.eval(t, 0.0).col(0));
        if (k < K) g = g.dt();
    }
    return out;
}

Mat QuasiTable::coeff(int k, int j, int i) const { return ops.at(k).at(i).block(0, j * d, d, d); }

Vec QuasiTable::apply(int k, const FuncJet& f, int i) const { return ops.at(k).at(i) * stack(f, Kf); }

QuasiTable quasi_table(const Jets& J, int extra) {
    QuasiTable T;
    T.d = J.d;
    T.r = J.r;
    T.Kf = J.r + extra;
    const int d = J.d, r = J.r, Kf = T.Kf, n = r / 2;
    T.ops.resize(static_cast<std::size_t>(r + 1));
    auto sel = [&](int j) { return selector(d, Kf, j); };
    if (r == 0) {
        T.ops[0] = mul(J, Kind::P, 0, sel(0));
    } else {
        for (int j = 0; j < n; ++j) T.ops[j] = sel(j);
        if (r % 2 == 0)
            T.ops[n] = add(mul(J, Kind::P, n, sel(n)), mul(J, Kind::Q, n, sel(n - 1)), -HALF_I);
        else
            T.ops[n] = scale(mul(J, Kind::Q, n + 1, sel(n)), -HALF_I);
        for (int j = (r - 1) / 2; j >= 0; --j) {
            OpJet v = add(scale(deriv(T.ops[r - j - 1]), -1.0), mul(J, Kind::P, j, sel(j)));
            v = add(v, mul(J, Kind::S, j + 1, sel(j + 1)), HALF_I);
            if (j > 0) v = add(v, mul(J, Kind::Q, j, sel(j - 1)), -HALF_I);
            T.ops[r - j] = v;
        }
    }
    for (const auto& o : T.ops)
        if (static_cast<int>(o.size()) < extra + 1)
            throw std::invalid_argument("coefficient jets too short for the quasi-derivative table");
    return T;
}

Vec apply_expression(const Jets& J, const FuncJet& f) {
    Vec out = Vec::Zero(f.at(0).size());
    cplx ik(1.0, 0.0);
    for (int k = 0; k <= J.r; ++k, ik *= I) {
        if (k % 2 == 0) {
            int j = k / 2;
            FuncJet h = vmul(J, Kind::P, j, vshift(f, j));
            out += ik * vshift(h, j)[0];
        } else {
            int j = (k + 1) / 2;
            FuncJet g = vshift(f, j - 1);
            FuncJet a = vshift(vmul(J, Kind::Q, j, g), 1);
            FuncJet b = vmul(J, Kind::S, j, vshift(g, 1));
            out += ik * 0.5 * (vshift(a, j - 1)[0] + vshift(b, j - 1)[0]);
        }
    }
    return out;
}

cplx dirichlet_density(const Jets& J, const FuncJet& f, const FuncJet& g) {
    cplx v = 0.0;
    for (int j = 0; j <= J.r / 2; ++j) v += g.at(j).dot(J.get(Kind::P, j) * f.at(j));
    for (int j = 1; j <= (J.r + 1) / 2; ++j)
        v += HALF_I * (g.at(j - 1).dot(J.get(Kind::S, j) * f.at(j)) -
                       g.at(j).dot(J.get(Kind::Q, j) * f.at(j - 1)));
    return v;
}

int system_dim(int r, int d) { return r * d; }

namespace {

Mat jblock(int n, int d) {
    Mat Jm = Mat::Zero(2 * n * d, 2 * n * d);
    Jm.block(0, n * d, n * d, n * d) = I * Mat::Identity(n * d, n * d);
    Jm.block(n * d, 0, n * d, n * d) = -I * Mat::Identity(n * d, n * d);
    return Jm;
}

Mat build_QS(const Jets& J, Kind kind) {
    int d = J.d, r = J.r, n = r / 2;
    if (r % 2 == 0) return jblock(n, d);
    Mat M = Mat::Zero(r * d, r * d);
    if (n > 0) M.topLeftCorner(2 * n * d, 2 * n * d) = jblock(n, d);
    blk(M, d, 2 * n, 2 * n) = J.get(kind, n + 1);
    return M;
}

}  // namespace

Mat build_Q(const Jets& J) { return build_QS(J, Kind::Q); }
Mat build_S(const Jets& J) { return build_QS(J, Kind::S); }

Mat build_Qprime(const Jets& J) {
    int d = J.d, r = J.r, n = r / 2;
    Mat M = Mat::Zero(r * d, r * d);
    if (r % 2 == 1) blk(M, d, 2 * n, 2 * n) = J.get(Kind::Q, n + 1, 1);
    return M;
}

Mat build_H(const Jets& J) {
    const int d = J.d, r = J.r, n = r / 2;
    auto P = [&](int j) { return J.get(Kind::P, j); };
    auto Qc = [&](int j) { return J.get(Kind::Q, j); };
    auto Sc = [&](int j) { return J.get(Kind::S, j); };
    const Mat Id = Mat::Identity(d, d);
    Mat H = Mat::Zero(r * d, r * d);
    // First order: -p_0, the sign that keeps Im H = W(l, -Im l) and the
    // canonical form of l[y] = 0 consistent with the higher orders.
    if (r == 1) return -P(0);
    for (int a = 0; a < n; ++a) {
        blk(H, d, a, a) = -P(a);
        if (a + 1 < n) {
            blk(H, d, a + 1, a) = HALF_I * Qc(a + 1);
            blk(H, d, a, a + 1) = -HALF_I * Sc(a + 1);
        }
    }
    if (r % 2 == 0) {
        Mat pinv = inv(P(n));
        blk(H, d, n - 1, n - 1) += 0.25 * Sc(n) * pinv * Qc(n);
        for (int a = 0; a + 1 < n; ++a) {
            blk(H, d, a + 1, n + a) = Id;  // h12 under its diagonal
            blk(H, d, n + a, a + 1) = Id;  // h21 over its diagonal
        }
        blk(H, d, n - 1, 2 * n - 1) = -HALF_I * Sc(n) * pinv;
        blk(H, d, 2 * n - 1, n - 1) = HALF_I * pinv * Qc(n);
        blk(H, d, 2 * n - 1, 2 * n - 1) = pinv;
    } else {
        for (int a = 1; a < n; ++a) {
            blk(H, d, a, n + a - 1) = Id;  // h12 (j, j-1)
            blk(H, d, n + a - 1, a) = Id;  // h21 (j-1, j)
        }
        blk(H, d, n - 1, 2 * n) = 0.5 * Sc(n);
        blk(H, d, 2 * n, n - 1) = 0.5 * Qc(n);
        blk(H, d, 2 * n, 2 * n - 1) = -I * Id;
        blk(H, d, 2 * n - 1, 2 * n) = I * Id;
        blk(H, d, 2 * n, 2 * n) = -P(n);
    }
    return H;
}

Mat build_C(const Jets& J) {
    const int d = J.d, r = J.r, n = r / 2;
    if (r % 2) throw std::invalid_argument("C is defined for even order only");
    QuasiTable T = quasi_table(J, 0);
    Mat C = Mat::Zero(r * d, r * d);
    // column index of f^(j) in col(f, ..., f^(n-1), f^(2n-1), ..., f^(n))
    auto col = [n](int j) { return j < n ? j : n + (2 * n - 1 - j); };
    for (int a = 0; a < n; ++a) blk(C, d, a, a).setIdentity();
    for (int a = 0; a < n; ++a) {
        int k = 2 * n - 1 - a;
        for (int j = 0; j <= k; ++j) blk(C, d, n + a, col(j)) = T.coeff(k, j);
    }
    return C;
}

Mat build_W(const Jets& l, const Jets& m) {
    const int d = l.d, r = l.r, n = r / 2;
    if (m.r % 2) throw std::invalid_argument("weight order must be even");
    if (m.r > 2 * n) throw std::invalid_argument("weight order exceeds 2[r/2]");
    Jets w = m.inflate(2 * n);
    auto P = [&](int j) { return w.get(Kind::P, j); };
    auto Qc = [&](int j) { return w.get(Kind::Q, j); };
    auto Sc = [&](int j) { return w.get(Kind::S, j); };
    Mat M = Mat::Zero(r * d, r * d);
    if (r == 1) return P(0);
    for (int a = 0; a < n; ++a) {
        blk(M, d, a, a) = P(a);
        if (a + 1 < n) {
            blk(M, d, a + 1, a) = -HALF_I * Qc(a + 1);
            blk(M, d, a, a + 1) = HALF_I * Sc(a + 1);
        }
    }
    if (r % 2 == 0) {
        blk(M, d, n - 1, 2 * n - 1) = HALF_I * Sc(n);
        blk(M, d, 2 * n - 1, n - 1) = -HALF_I * Qc(n);
        blk(M, d, 2 * n - 1, 2 * n - 1) = P(n);
        Mat Ci = inv(build_C(l));
        return Ci.adjoint() * M * Ci;
    }
    blk(M, d, n - 1, 2 * n) = -0.5 * Sc(n);
    blk(M, d, 2 * n, n - 1) = -0.5 * Qc(n);
    blk(M, d, 2 * n, 2 * n) = P(n);
    return M;
}

Vec lift_F(const Jets& l, int s, const FuncJet& f, int i) {
    const int d = l.d, r = l.r, n = r / 2;
    Vec F = Vec::Zero(r * d);
    if (r == 1) return f.at(i);
    if (r % 2 == 0 && s == r) {
        QuasiTable T = quasi_table(l, i);
        for (int j = 0; j < n; ++j) F.segment(j * d, d) = f.at(j + i);
        for (int j = 1; j <= n; ++j) F.segment((n + j - 1) * d, d) = T.apply(r - j, f, i);
        return F;
    }
    if (r % 2 == 1 && s == 2 * n) {
        for (int j = 0; j < n; ++j) F.segment(j * d, d) = f.at(j + i);
        F.segment(2 * n * d, d) = -I * f.at(n + i);
        return F;
    }
    for (int j = 0; j <= s / 2; ++j) F.segment(j * d, d) = f.at(j + i);
    return F;
}

Vec lift_solution(const Jets& l, const Jets& m, const FuncJet& y, const FuncJet& f, int i) {
    const int d = l.d, r = l.r, n = r / 2, s = m.r;
    if (r == 1) return y.at(i);
    Vec x = Vec::Zero(r * d);
    QuasiTable Tl = quasi_table(l, i), Tm = quasi_table(m, i);
    for (int j = 0; j < n; ++j) x.segment(j * d, d) = y.at(j + i);
    for (int j = 1; j <= n; ++j) {
        Vec v = Tl.apply(r - j, y, i);
        if (s - j >= s / 2) v -= Tm.apply(s - j, f, i);
        x.segment((n + j - 1) * d, d) = v;
    }
    if (r % 2) x.segment(2 * n * d, d) = -I * y.at(n + i);
    return x;
}

Vec weighted_lift_formula(const Jets& l, const Jets& m, const FuncJet& f) {
    const int d = l.d, r = l.r, n = r / 2, s = m.r;
    Vec out = Vec::Zero(r * d);
    if (s == 0) {
        out.head(d) = m.get(Kind::P, 0) * f.at(0);
        return out;
    }
    QuasiTable T = quasi_table(m, 1);
    for (int j = 0; j < s / 2; ++j)
        out.segment(j * d, d) = T.apply(s - j, f) + T.apply(s - j - 1, f, 1);
    if (s < 2 * n) {
        out.segment((s / 2) * d, d) = T.apply(s / 2, f);
    } else if (r % 2) {
        out.segment(2 * n * d, d) = -I * T.apply(n, f);
    } else {
        Vec e = Vec::Zero(r * d);
        e.segment((2 * n - 1) * d, d) = T.apply(n, f);
        out += build_H(l) * e;
    }
    return out;
}

Vec canonical_operator(const Jets& J, const Vec& x, const Vec& dx) {
    Mat Q = build_Q(J);
    return HALF_I * (build_Qprime(J) * x + Q * dx + build_S(J) * dx) - build_H(J) * x;
}

IdentityResiduals check_identities(const Jets& l, const Jets& m, const FuncJet& f, unsigned seed) {
    IdentityResiduals res;
    const int d = l.d, r = l.r;
    Jets ls = l.adjoint();
    Mat H = build_H(l);
    Mat imH = (H - H.adjoint()) / cplx(0.0, 2.0);
    Jets iml = l.imag_part();
    if (iml.r % 2 == 0 && iml.r <= 2 * (r / 2)) {
        res.im_h = (imH - build_W(l, iml * -1.0)).norm();
        res.im_h_alt = (build_W(l, iml) + imH).norm();
        res.im_h = std::max(res.im_h, (imH - build_W(ls, iml * -1.0)).norm());
    }
    res.hermitian = std::max((H.adjoint() - build_H(ls)).norm(),
                             (build_W(l, m).adjoint() - build_W(l, m.adjoint())).norm());

    QuasiTable T0 = quasi_table(l, 0);
    for (int beta : {r + 1, r + 2}) {
        QuasiTable T1 = quasi_table(l.inflate(beta), 0);
        for (int j = 0; j <= beta / 2; ++j) {
            Vec v = T1.apply(beta - j, f);
            if (j <= (r + 1) / 2) v -= T0.apply(r - j, f);
            res.padding = std::max(res.padding, v.norm());
        }
    }

    Mat W = build_W(ls, m);
    Vec F = lift_F(ls, m.r, f);
    Vec lhs = W * F;
    res.wf = (lhs - weighted_lift_formula(l, m, f)).norm();

    // Null components: indices outside the support of W.
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    Vec F2 = F;
    for (int k = 0; k < r * d; ++k)
        if (W.col(k).norm() == 0.0) F2(k) += cplx(nd(gen), nd(gen));
    res.null_free = (W * F2 - lhs).norm();
    return res;
}

}  // namespace nevres
