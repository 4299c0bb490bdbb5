#include "nevres/resolvent.hpp"

#include <Eigen/QR>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nevres {

namespace {

const cplx I(0.0, 1.0);

int jet_order(const CanonicalSystem& sys) { return sys.order() + 2; }

Jets padded(const Jets& J, int r) { return J.r == r ? J : J.inflate(r); }

}  // namespace

ResolventKernel::ResolventKernel(const CanonicalSystem& sys, const Grid& grid, cplx lam, const Mat& M, int substeps)
    : sys_(sys), M_(M) {
    if (lam.imag() == 0.0) throw std::invalid_argument("nonreal lam required");
    fs_ = integrate_fundamental(sys, lam, grid, substeps);
    fc_ = integrate_fundamental(sys, std::conj(lam), grid, substeps);
}

ResolventKernel::ResolventKernel(const CanonicalSystem& sys, FundamentalSolution fs, FundamentalSolution fs_conj,
                                 const Mat& M)
    : sys_(sys), fs_(std::move(fs)), fc_(std::move(fs_conj)), M_(M) {
    if (fs_.lam.imag() == 0.0) throw std::invalid_argument("nonreal lam required");
}

std::vector<Vec> ResolventKernel::lift_rhs(const Fn& f) const {
    const Grid& g = grid();
    std::vector<Vec> phi(g.N + 1);
    for (int k = 0; k <= g.N; ++k) phi[k] = sys_.lifted_rhs(g.t[k], lam(), f(g.t[k], jet_order(sys_)));
    return phi;
}

std::vector<Vec> ResolventKernel::lift_rhs_product(const Fn& f) const {
    const Grid& g = grid();
    const cplx lc = std::conj(lam());
    const int s = sys_.family().weight().r;
    std::vector<Vec> phi(g.N + 1);
    for (int k = 0; k <= g.N; ++k) {
        double t = g.t[k];
        Jets l = sys_.jets(t, lc);
        phi[k] = build_W(l, sys_.weight_jets(t)) * lift_F(l, s, f(t, jet_order(sys_)));
    }
    return phi;
}

std::vector<Vec> ResolventKernel::apply_canonical(const std::vector<Vec>& phi) const {
    return kernel_apply(fs_, fc_, M_, phi);
}

ResolventResult ResolventKernel::apply(const Fn& f) const {
    ResolventResult res;
    res.lam = lam();
    res.f = f;
    res.x = apply_canonical(lift_rhs(f));
    res.y1.reserve(res.x.size());
    for (const Vec& v : res.x) res.y1.push_back(v.head(sys_.d()));
    return res;
}

Mat ResolventKernel::kernel(int k, int j, int side) const {
    int sg = j > k ? 1 : (j < k ? -1 : side);
    Mat mid = M_ - 0.5 * sg * (I * fs_.G).inverse();
    return fs_.X.at(k) * mid * fc_.X.at(j).adjoint();
}

FuncJet ResolventKernel::solution_jet(const ResolventResult& res, int k) const {
    const int s = sys_.family().weight().r;
    double t = grid().t[k];
    return sys_.derivatives(t, lam(), res.x.at(k), res.f(t, jet_order(sys_)), s / 2);
}

cplx m_inner(const ResolventKernel& K, const ResolventResult& u, const Fn& v) {
    const Grid& g = K.grid();
    const DiffExpression& m = K.system().family().weight();
    cplx sum = 0.0;
    for (int k = 0; k <= g.N; ++k)
        sum += g.w[k] * dirichlet_density(m.jets(g.t[k], 0.0, 0), K.solution_jet(u, k), v(g.t[k], m.r / 2));
    return sum;
}

cplx m_inner(const ResolventKernel& K, const ResolventResult& u, const ResolventKernel& K2,
             const ResolventResult& v) {
    const Grid& g = K.grid();
    const DiffExpression& m = K.system().family().weight();
    cplx sum = 0.0;
    for (int k = 0; k <= g.N; ++k)
        sum += g.w[k] * dirichlet_density(m.jets(g.t[k], 0.0, 0), K.solution_jet(u, k), K2.solution_jet(v, k));
    return sum;
}

cplx m_inner(const CanonicalSystem& sys, const Grid& grid, const Fn& u, const Fn& v) {
    const DiffExpression& m = sys.family().weight();
    cplx sum = 0.0;
    for (int k = 0; k <= grid.N; ++k)
        sum += grid.w[k] * dirichlet_density(m.jets(grid.t[k], 0.0, 0), u(grid.t[k], m.r / 2), v(grid.t[k], m.r / 2));
    return sum;
}

OdeBcReport residuals_ode_bc(const ResolventKernel& K, const ResolventResult& res, const BoundaryPair& bp) {
    const Grid& g = K.grid();
    const CanonicalSystem& sys = K.system();
    std::vector<Vec> phi = K.lift_rhs(res.f);
    OdeBcReport rep;
    const double h = g.h();
    for (int k = 0; k <= g.N; ++k) rep.scale = std::max({rep.scale, phi[k].norm(), res.x[k].norm()});
    for (int k = 2; k + 2 <= g.N; ++k) {
        Vec dx = (res.x[k - 2] - 8.0 * res.x[k - 1] + 8.0 * res.x[k + 1] - res.x[k + 2]) / (12.0 * h);
        Vec r = canonical_operator(sys.jets(g.t[k], K.lam()), res.x[k], dx) - phi[k];
        rep.ode = std::max(rep.ode, r.norm());
    }
    const int D = sys.dim();
    Mat A(2 * D, D);
    A << bp.M_at(K.lam()), bp.N_at(K.lam());
    Vec rhs(2 * D);
    rhs << res.x.front(), res.x.back();
    Vec hsol = A.completeOrthogonalDecomposition().solve(rhs);
    rep.boundary = (A * hsol - rhs).norm();
    return rep;
}

bool SuiteReport::ok(double tol_adj, double tol_nev, double tol_norm, double tol_contour) const {
    return adjoint <= tol_adj && nevanlinna <= tol_nev && norm_slack >= -tol_norm && weighted_slack >= -tol_norm &&
           contour <= tol_contour;
}

SuiteReport property_suite(const ResolventFactory& R, const std::vector<Fn>& fs, const std::vector<cplx>& lams,
                           bool contour) {
    SuiteReport rep;
    std::vector<ResolventKernel> kernels;
    std::vector<std::vector<ResolventResult>> results;
    for (cplx lam : lams) {
        kernels.push_back(R(lam));
        std::vector<ResolventResult> row;
        for (const Fn& f : fs) row.push_back(kernels.back().apply(f));
        results.push_back(std::move(row));
    }
    auto find = [&](cplx lam) -> int {
        for (std::size_t i = 0; i < lams.size(); ++i)
            if (lams[i] == lam) return static_cast<int>(i);
        return -1;
    };
    for (std::size_t li = 0; li < lams.size(); ++li) {
        const cplx lam = lams[li];
        const ResolventKernel& K = kernels[li];
        const CanonicalSystem& sys = K.system();
        const Grid& g = K.grid();
        int lc = find(std::conj(lam));
        if (lc < 0) throw std::invalid_argument("lam list must be closed under conjugation");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const ResolventResult& Rf = results[li][i];
            for (std::size_t j = 0; j < fs.size(); ++j) {
                cplx lhs = m_inner(K, Rf, fs[j]);
                cplx rhs = std::conj(m_inner(kernels[lc], results[lc][j], fs[i]));
                rep.adjoint = std::max(rep.adjoint, std::abs(lhs - rhs));
            }
            double nrm2 = m_inner(K, Rf, K, Rf).real();
            double im = m_inner(K, Rf, fs[i]).imag() / lam.imag();
            rep.nevanlinna = std::max(rep.nevanlinna, nrm2 - im);
            rep.equality = std::max(rep.equality, std::abs(nrm2 - im));
            double fn = std::sqrt(std::max(0.0, m_inner(sys, g, fs[i], fs[i]).real()));
            rep.norm_slack = std::min(rep.norm_slack, fn / std::abs(lam.imag()) - std::sqrt(std::max(0.0, nrm2)));
        }
        // canonical-level bound with the weight W(t, l_conj, m)
        for (const Fn& F : bump_trials(sys.dim(), 2, 17, g.a, g.b)) {
            std::vector<Mat> W(g.N + 1);
            std::vector<Vec> phi(g.N + 1);
            for (int k = 0; k <= g.N; ++k) {
                W[k] = sys.weight(g.t[k], std::conj(lam));
                phi[k] = W[k] * F(g.t[k], 0)[0];
            }
            std::vector<Vec> x = K.apply_canonical(phi);
            double nx = 0.0, nF = 0.0;
            for (int k = 0; k <= g.N; ++k) {
                nx += g.w[k] * x[k].dot(W[k] * x[k]).real();
                nF += g.w[k] * F(g.t[k], 0)[0].dot(phi[k]).real();
            }
            rep.weighted_slack = std::min(rep.weighted_slack, std::sqrt(std::max(0.0, nF)) / std::abs(lam.imag()) -
                                                                  std::sqrt(std::max(0.0, nx)));
        }
        if (contour && !fs.empty()) {
            const Fn& f = fs.front();
            const Fn& gfn = fs.back();
            auto pairing = [&](cplx mu) {
                ResolventKernel Km = R(mu);
                Mat v(1, 1);
                v(0, 0) = m_inner(Km, Km.apply(f), gfn);
                return v;
            };
            rep.contour = std::max(rep.contour, contour_residual(pairing, lam));
        }
    }
    return rep;
}

GreenReport green_formula(const GreenSide& one, const GreenSide& two, const Grid& grid, int i0, int i1) {
    if (one.l.r != two.l.r || one.l.d != two.l.d) throw std::invalid_argument("Green formula needs equal orders");
    const int r = one.l.r, K = r + 2;
    std::vector<double> w = grid.weights(i0, i1);
    GreenReport rep;
    auto boundary = [&](double t) {
        Jets l1 = one.l.jets(t, one.lam, K), l2 = two.l.jets(t, two.lam, K);
        Jets m1 = one.m.jets(t, 0.0, K), m2 = two.m.jets(t, 0.0, K);
        Vec y1 = lift_solution(l1, m1, one.y(t, K), one.f(t, K));
        Vec y2 = lift_solution(l2, m2, two.y(t, K), two.f(t, K));
        Mat Qs = 0.5 * I * (build_Q(l1) + build_Q(l2).adjoint());
        return y2.dot(Qs * y1);
    };
    for (int k = i0; k <= i1; ++k) {
        if (w[k] == 0.0) continue;
        double t = grid.t[k];
        Jets l1 = one.l.jets(t, one.lam, K), l2 = two.l.jets(t, two.lam, K);
        Jets m1 = one.m.jets(t, 0.0, K), m2 = two.m.jets(t, 0.0, K);
        FuncJet f1 = one.f(t, K), y1 = one.y(t, K), f2 = two.f(t, K), y2 = two.y(t, K);
        cplx a = dirichlet_density(m1, f1, y2);
        cplx b = dirichlet_density(m2.adjoint(), y1, f2);
        cplx c = dirichlet_density(padded(l1, r) - padded(l2.adjoint(), r), y1, y2);
        rep.lhs += w[k] * (a - b - c);
        rep.scale = std::max({rep.scale, std::abs(a), std::abs(b), std::abs(c)});
    }
    rep.rhs = boundary(grid.t[i1]) - boundary(grid.t[i0]);
    rep.scale = std::max(rep.scale, std::abs(rep.rhs));
    rep.residual = std::abs(rep.lhs - rep.rhs);
    return rep;
}

GreenReport green_spectral(const LambdaFamily& fam, cplx lam1, const Fn& y1, const Fn& f1, cplx lam2, const Fn& y2,
                           const Fn& f2, const Grid& grid, int i0, int i1) {
    const DiffExpression& L = fam.composed();
    const DiffExpression& Mw = fam.weight();
    const int K = L.r + 2;
    std::vector<double> w = grid.weights(i0, i1);
    GreenReport rep;
    auto boundary = [&](double t) {
        Jets a = L.jets(t, lam1, K), b = L.jets(t, lam2, K), m = Mw.jets(t, 0.0, K);
        Vec u = lift_solution(a, m, y1(t, K), f1(t, K));
        Vec v = lift_solution(b, m, y2(t, K), f2(t, K));
        Jets l0 = L.jets(t, 0.0, 0);
        Mat R = 0.5 * (build_Q(l0) + build_S(l0));
        return I * v.dot(R * u);
    };
    for (int k = i0; k <= i1; ++k) {
        if (w[k] == 0.0) continue;
        double t = grid.t[k];
        Jets m = Mw.jets(t, 0.0, 0);
        const int s2 = Mw.r / 2;
        FuncJet F1 = f1(t, s2), Y1 = y1(t, s2), F2 = f2(t, s2), Y2 = y2(t, s2);
        cplx a = dirichlet_density(m, F1, Y2), b = dirichlet_density(m, Y1, F2), c = dirichlet_density(m, Y1, Y2);
        rep.lhs += w[k] * (a - b + (lam1 - std::conj(lam2)) * c);
        rep.scale = std::max({rep.scale, std::abs(a), std::abs(b), std::abs(lam1 - std::conj(lam2)) * std::abs(c)});
    }
    rep.rhs = boundary(grid.t[i1]) - boundary(grid.t[i0]);
    rep.scale = std::max(rep.scale, std::abs(rep.rhs));
    rep.residual = std::abs(rep.lhs - rep.rhs);
    return rep;
}

FuncJet weight_densities(const CanonicalSystem& sys, double t, const FuncJet& f) {
    const DiffExpression& Mw = sys.family().weight();
    const int s2 = Mw.r / 2;
    Jets m = Mw.jets(t, 0.0, 0);
    FuncJet out(s2 + 1);
    for (int j = 0; j <= s2; ++j) {
        out[j] = m.get(Kind::P, j) * f[j];
        if (j + 1 <= s2) out[j] += 0.5 * I * m.get(Kind::S, j + 1) * f[j + 1];
        if (j >= 1) out[j] -= 0.5 * I * m.get(Kind::Q, j) * f[j - 1];
    }
    return out;
}

std::vector<Vec> straus_split(const ResolventKernel& K, const Mat& M_conj, const Fn& f) {
    const CanonicalSystem& sys = K.system();
    const Grid& g = K.grid();
    const cplx lam = K.lam(), lc = std::conj(lam);
    const int s2 = sys.family().weight().r / 2;
    const Mat& G = K.fs().G;
    Mat iGi = (I * G).inverse();
    Mat left = char_projection(K.M(), G) * iGi;
    Mat right = (char_projection(M_conj, G) * iGi).adjoint();
    std::vector<Vec> v(g.N + 1);
    for (int k = 0; k <= g.N; ++k) {
        double t = g.t[k];
        FuncJet dens = weight_densities(sys, t, f(t, s2 + 1));
        v[k] = Vec::Zero(sys.dim());
        for (int j = 0; j <= s2; ++j) v[k] += sys.derivative_rows(t, lc, K.fs_conj().X[k], j).adjoint() * dens[j];
    }
    std::vector<Vec> J = cumulative(g, v);
    const Vec& total = J.back();
    std::vector<Vec> out(g.N + 1);
    for (int k = 0; k <= g.N; ++k) {
        Mat row = sys.derivative_rows(g.t[k], lam, K.fs().X[k], 0);
        out[k] = row * (left * J[k] + right * (total - J[k]));
    }
    return out;
}

CharOp reanchor_char_op(const CharOp& M, const CanonicalSystem& sys, double a, double c, int N, int substeps) {
    return [M, sys, a, c, N, substeps](cplx lam) {
        Grid g = Grid::uniform(a, c, N);
        Mat Xc = integrate_fundamental(sys, lam, g, substeps).X.back();
        Mat Xcc = integrate_fundamental(sys, std::conj(lam), g, substeps).X.back();
        return Mat(Xc * M(lam) * Xcc.adjoint());
    };
}

}  // namespace nevres
