#include "gradostat/ipm.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gradostat {

const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericalError: return "NumericalError";
    }
    return "Unknown";
}

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cone layout over the slack vector s (and z): nl nonnegatives, then SOCs.
struct Cone {
    int nl = 0;
    std::vector<int> start;
    std::vector<int> dim;
    int size = 0;

    int degree() const { return nl + static_cast<int>(dim.size()); }
};

double soc_residual(const Vec& u, int at, int d)
{
    return u[at] * u[at] - u.segment(at + 1, d - 1).squaredNorm();
}

// u o v
Vec jordan(const Cone& K, const Vec& u, const Vec& v)
{
    Vec w(K.size);
    w.head(K.nl) = u.head(K.nl).cwiseProduct(v.head(K.nl));
    for (size_t c = 0; c < K.dim.size(); ++c) {
        int a = K.start[c], d = K.dim[c];
        w[a] = u.segment(a, d).dot(v.segment(a, d));
        w.segment(a + 1, d - 1) = u[a] * v.segment(a + 1, d - 1) + v[a] * u.segment(a + 1, d - 1);
    }
    return w;
}

// x with lam o x = v
Vec jordan_div(const Cone& K, const Vec& lam, const Vec& v)
{
    Vec x(K.size);
    x.head(K.nl) = v.head(K.nl).cwiseQuotient(lam.head(K.nl));
    for (size_t c = 0; c < K.dim.size(); ++c) {
        int a = K.start[c], d = K.dim[c];
        double rho = soc_residual(lam, a, d);
        double nu = lam.segment(a + 1, d - 1).dot(v.segment(a + 1, d - 1));
        double x0 = (lam[a] * v[a] - nu) / rho;
        x[a] = x0;
        x.segment(a + 1, d - 1) = (v.segment(a + 1, d - 1) - x0 * lam.segment(a + 1, d - 1)) / lam[a];
    }
    return x;
}

Vec identity(const Cone& K)
{
    Vec e = Vec::Zero(K.size);
    e.head(K.nl).setOnes();
    for (int a : K.start)
        e[a] = 1.0;
    return e;
}

// largest alpha with u + alpha d in the cone (inf if unbounded)
double max_step(const Cone& K, const Vec& u, const Vec& du)
{
    double amax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K.nl; ++i)
        if (du[i] < 0.0)
            amax = std::min(amax, -u[i] / du[i]);
    for (size_t c = 0; c < K.dim.size(); ++c) {
        int a = K.start[c], d = K.dim[c];
        double qa = soc_residual(du, a, d);
        double qb = u[a] * du[a] - u.segment(a + 1, d - 1).dot(du.segment(a + 1, d - 1));
        double qc = std::max(soc_residual(u, a, d), 0.0);
        // roots of qa t^2 + 2 qb t + qc
        double disc = qb * qb - qa * qc;
        if (std::abs(qa) < 1e-300) {
            if (qb < 0.0)
                amax = std::min(amax, -qc / (2.0 * qb));
            continue;
        }
        if (disc < 0.0)
            continue;
        double sq = std::sqrt(disc);
        double q = -(qb + std::copysign(sq, qb));
        double r1 = q / qa;
        double r2 = q != 0.0 ? qc / q : std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        if (r1 > 0.0)
            best = std::min(best, r1);
        if (r2 > 0.0)
            best = std::min(best, r2);
        amax = std::min(amax, best);
    }
    return amax;
}

void bring_to_cone(const Cone& K, Vec& r)
{
    double alpha = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < K.nl; ++i)
        alpha = std::max(alpha, -r[i]);
    for (size_t c = 0; c < K.dim.size(); ++c) {
        int a = K.start[c], d = K.dim[c];
        alpha = std::max(alpha, r.segment(a + 1, d - 1).norm() - r[a]);
    }
    if (alpha >= 0.0)
        r += (1.0 + alpha) * identity(K);
}

double cone_violation(const Cone& K, const Vec& u)
{
    double v = 0.0;
    for (int i = 0; i < K.nl; ++i)
        v = std::max(v, -u[i]);
    for (size_t c = 0; c < K.dim.size(); ++c) {
        int a = K.start[c], d = K.dim[c];
        v = std::max(v, u.segment(a + 1, d - 1).norm() - u[a]);
    }
    return v;
}

Cone cone_of(const StandardForm& sf)
{
    Cone K;
    K.nl = sf.n_nonneg;
    int at = K.nl;
    for (int d : sf.soc_dims) {
        K.start.push_back(at);
        K.dim.push_back(d);
        at += d;
    }
    K.size = at;
    return K;
}

// Nesterov-Todd scaling for one iterate
struct Scaling {
    Vec lin; // sqrt(s/z)
    std::vector<double> eta;
    std::vector<Vec> wbar;
};

class Solver {
public:
    Solver(const StandardForm& sf, const SolveSettings& st) : sf_(sf), st_(st)
    {
        K_ = cone_of(sf);
        n_ = sf.cols();
        m_ = sf.rows();
        nf_ = sf.n_free;
        equilibrate();
    }

    SolveResult run();

private:
    void equilibrate();
    void build_kkt();
    bool factor(const Scaling& W);
    Vec solve_kkt(const Vec& rhs);
    Vec kkt_times(const Vec& v) const;
    Scaling nt_scaling(const Vec& s, const Vec& z, Vec& lam) const;
    Vec apply_w(const Scaling& W, const Vec& v) const;
    Vec apply_winv(const Scaling& W, const Vec& v) const;
    void finish(SolveResult& r, const Vec& x, const Vec& y, const Vec& s, const Vec& z,
                double tau) const;

    const StandardForm& sf_;
    SolveSettings st_;
    Cone K_;
    int n_ = 0, m_ = 0, nf_ = 0;
    SpMat A_;
    Vec b_, c_, dr_, dc_;

    SpMat kkt_;
    std::vector<int> w2_idx_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;
};

void Solver::equilibrate()
{
    A_ = sf_.A;
    dr_ = Vec::Ones(m_);
    dc_ = Vec::Ones(n_);
    for (int pass = 0; pass < st_.equilibrate_passes; ++pass) {
        Vec rn = Vec::Zero(m_), cn = Vec::Zero(n_);
        for (int j = 0; j < A_.outerSize(); ++j)
            for (SpMat::InnerIterator it(A_, j); it; ++it) {
                double a = std::abs(it.value());
                rn[it.row()] = std::max(rn[it.row()], a);
                cn[j] = std::max(cn[j], a);
            }
        // one factor per second-order cone keeps the cone invariant
        for (size_t c = 0; c < K_.dim.size(); ++c) {
            int a = nf_ + K_.start[c], d = K_.dim[c];
            double mx = cn.segment(a, d).maxCoeff();
            cn.segment(a, d).setConstant(mx);
        }
        Vec fr(m_), fc(n_);
        for (int i = 0; i < m_; ++i)
            fr[i] = rn[i] > 0.0 ? 1.0 / std::sqrt(rn[i]) : 1.0;
        for (int j = 0; j < n_; ++j)
            fc[j] = cn[j] > 0.0 ? 1.0 / std::sqrt(cn[j]) : 1.0;
        for (int j = 0; j < A_.outerSize(); ++j)
            for (SpMat::InnerIterator it(A_, j); it; ++it)
                it.valueRef() *= fr[it.row()] * fc[j];
        dr_ = dr_.cwiseProduct(fr);
        dc_ = dc_.cwiseProduct(fc);
    }
    b_ = dr_.cwiseProduct(sf_.b);
    c_ = dc_.cwiseProduct(sf_.c);
}

void Solver::build_kkt()
{
    const int N = n_ + m_ + K_.size;
    const double reg = st_.static_reg;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A_.nonZeros() + N + 8 * K_.size);
    for (int j = 0; j < n_; ++j)
        t.emplace_back(j, j, reg);
    for (int j = 0; j < A_.outerSize(); ++j)
        for (SpMat::InnerIterator it(A_, j); it; ++it)
            t.emplace_back(n_ + it.row(), j, it.value());
    for (int k = 0; k < K_.size; ++k)
        t.emplace_back(n_ + m_ + k, nf_ + k, -1.0);
    for (int i = 0; i < m_; ++i)
        t.emplace_back(n_ + i, n_ + i, -reg);
    const int z0 = n_ + m_;
    for (int k = 0; k < K_.nl; ++k)
        t.emplace_back(z0 + k, z0 + k, -1.0);
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int a = K_.start[c], d = K_.dim[c];
        for (int j = 0; j < d; ++j)
            for (int i = j; i < d; ++i)
                t.emplace_back(z0 + a + i, z0 + a + j, i == j ? -1.0 : 0.5);
    }
    kkt_.resize(N, N);
    kkt_.setFromTriplets(t.begin(), t.end());
    kkt_.makeCompressed();

    auto locate = [&](int r, int c) {
        const int* inner = kkt_.innerIndexPtr();
        const int* outer = kkt_.outerIndexPtr();
        const int* p = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
        return static_cast<int>(p - inner);
    };
    w2_idx_.clear();
    for (int k = 0; k < K_.nl; ++k)
        w2_idx_.push_back(locate(z0 + k, z0 + k));
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int a = K_.start[c], d = K_.dim[c];
        for (int j = 0; j < d; ++j)
            for (int i = j; i < d; ++i)
                w2_idx_.push_back(locate(z0 + a + i, z0 + a + j));
    }
}

bool Solver::factor(const Scaling& W)
{
    double* val = kkt_.valuePtr();
    const double reg = st_.static_reg;
    size_t at = 0;
    for (int k = 0; k < K_.nl; ++k)
        val[w2_idx_[at++]] = -W.lin[k] * W.lin[k] - reg;
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int d = K_.dim[c];
        const Vec& w = W.wbar[c];
        double e2 = W.eta[c] * W.eta[c];
        // W^2 = eta^2 (2 w w' - J)
        for (int j = 0; j < d; ++j)
            for (int i = j; i < d; ++i) {
                double v = 2.0 * w[i] * w[j];
                if (i == j)
                    v += (i == 0 ? -1.0 : 1.0);
                val[w2_idx_[at++]] = -e2 * v - (i == j ? reg : 0.0);
            }
    }
    if (!analyzed_) {
        ldlt_.analyzePattern(kkt_);
        analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    return ldlt_.info() == Eigen::Success;
}

Vec Solver::kkt_times(const Vec& v) const
{
    Vec r = kkt_.selfadjointView<Eigen::Lower>() * v;
    const double reg = st_.static_reg;
    r.head(n_) -= reg * v.head(n_);
    r.segment(n_, m_) += reg * v.segment(n_, m_);
    r.tail(K_.size) += reg * v.tail(K_.size);
    return r;
}

Vec Solver::solve_kkt(const Vec& rhs)
{
    Vec sol = ldlt_.solve(rhs);
    double target = 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    Vec res = rhs - kkt_times(sol);
    double err = res.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < st_.refine_steps && err > target; ++k) {
        Vec next = sol + ldlt_.solve(res);
        Vec nres = rhs - kkt_times(next);
        double nerr = nres.lpNorm<Eigen::Infinity>();
        if (nerr >= err)
            break;
        bool stalled = nerr > 0.5 * err;
        sol = std::move(next);
        res = std::move(nres);
        err = nerr;
        if (stalled)
            break;
    }
    return sol;
}

Scaling Solver::nt_scaling(const Vec& s, const Vec& z, Vec& lam) const
{
    Scaling W;
    lam.resize(K_.size);
    W.lin = (s.head(K_.nl).cwiseQuotient(z.head(K_.nl))).cwiseSqrt();
    lam.head(K_.nl) = (s.head(K_.nl).cwiseProduct(z.head(K_.nl))).cwiseSqrt();
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int a = K_.start[c], d = K_.dim[c];
        double sres = std::sqrt(std::max(soc_residual(s, a, d), 1e-300));
        double zres = std::sqrt(std::max(soc_residual(z, a, d), 1e-300));
        Vec sb = s.segment(a, d) / sres;
        Vec zb = z.segment(a, d) / zres;
        double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
        Vec w(d);
        w[0] = (sb[0] + zb[0]) / (2.0 * gamma);
        w.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
        // renormalize against drift: w'Jw = 1
        double wr = w[0] * w[0] - w.tail(d - 1).squaredNorm();
        if (wr > 0.0)
            w /= std::sqrt(wr);
        W.eta.push_back(std::sqrt(sres / zres));
        W.wbar.push_back(w);
    }
    Vec wz = apply_w(W, z);
    lam.tail(K_.size - K_.nl) = wz.tail(K_.size - K_.nl);
    return W;
}

Vec Solver::apply_w(const Scaling& W, const Vec& v) const
{
    Vec r(K_.size);
    r.head(K_.nl) = W.lin.cwiseProduct(v.head(K_.nl));
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int a = K_.start[c], d = K_.dim[c];
        const Vec& w = W.wbar[c];
        double w0 = w[0];
        auto w1 = w.tail(d - 1);
        auto v1 = v.segment(a + 1, d - 1);
        double zeta = w1.dot(v1);
        r[a] = W.eta[c] * (w0 * v[a] + zeta);
        r.segment(a + 1, d - 1) = W.eta[c] * (v1 + (v[a] + zeta / (1.0 + w0)) * w1);
    }
    return r;
}

Vec Solver::apply_winv(const Scaling& W, const Vec& v) const
{
    Vec r(K_.size);
    r.head(K_.nl) = v.head(K_.nl).cwiseQuotient(W.lin);
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        int a = K_.start[c], d = K_.dim[c];
        const Vec& w = W.wbar[c];
        double w0 = w[0];
        auto w1 = w.tail(d - 1);
        auto v1 = v.segment(a + 1, d - 1);
        double zeta = w1.dot(v1);
        r[a] = (w0 * v[a] - zeta) / W.eta[c];
        r.segment(a + 1, d - 1) = (v1 + (-v[a] + zeta / (1.0 + w0)) * w1) / W.eta[c];
    }
    return r;
}

// maps the scaled iterate to the caller's coordinates and objective values
void Solver::finish(SolveResult& r, const Vec& x, const Vec& y, const Vec& s, const Vec& z,
                    double tau) const
{
    r.x = dc_.cwiseProduct(x) / tau;
    r.y = dr_.cwiseProduct(y) / tau;
    Vec sd = Vec::Zero(n_);
    sd.tail(K_.size) = z.cwiseQuotient(dc_.tail(K_.size)) / tau;
    r.s = sd;
    (void)s;
    r.objective = sf_.c.dot(r.x) + sf_.c0;
    r.dual_objective = -sf_.b.dot(r.y) + sf_.c0;
}

SolveResult Solver::run()
{
    SolveResult res;
    const int N = n_ + m_ + K_.size;
    const int nK = K_.size;
    build_kkt();

    auto Gx = [&](const Vec& x) -> Vec { return -x.tail(nK); };
    auto GTz = [&](const Vec& z) -> Vec {
        Vec r = Vec::Zero(n_);
        r.tail(nK) = -z;
        return r;
    };

    // initial point from two regularized least-squares solves
    Scaling W;
    W.lin = Vec::Ones(K_.nl);
    for (size_t c = 0; c < K_.dim.size(); ++c) {
        Vec w = Vec::Zero(K_.dim[c]);
        w[0] = 1.0;
        W.eta.push_back(1.0);
        W.wbar.push_back(w);
    }
    if (!factor(W)) {
        res.status = SolveStatus::NumericalError;
        res.message = "initial factorization failed";
        return res;
    }
    Vec rhs = Vec::Zero(N);
    rhs.segment(n_, m_) = b_;
    Vec sol = solve_kkt(rhs);
    Vec x = sol.head(n_);
    Vec s = -sol.tail(nK);
    bring_to_cone(K_, s);
    rhs.setZero();
    rhs.head(n_) = -c_;
    sol = solve_kkt(rhs);
    Vec y = sol.segment(n_, m_);
    Vec z = sol.tail(nK);
    bring_to_cone(K_, z);
    double tau = 1.0, kap = 1.0;

    const double bnorm = sf_.b.norm(), cnorm = sf_.c.norm();
    const int D = K_.degree();
    const Vec e = identity(K_);

    struct Best {
        double merit = std::numeric_limits<double>::infinity();
        Vec x, y, s, z;
        double tau = 1.0;
        double pres = kNaN, dres = kNaN, gap = kNaN;
    } best;

    Vec lam;
    for (int it = 0; it <= st_.max_iterations; ++it) {
        res.iterations = it;
        // residuals of the embedding (scaled space)
        Vec rx = A_.transpose() * y + GTz(z) + c_ * tau;
        Vec ry = -(A_ * x) + b_ * tau;
        Vec rz = s + Gx(x);
        double rt = kap + c_.dot(x) + b_.dot(y);

        // statistics in the caller's coordinates
        Vec xu = dc_.cwiseProduct(x), yu = dr_.cwiseProduct(y);
        Vec zu = z.cwiseQuotient(dc_.tail(nK)), su = s.cwiseProduct(dc_.tail(nK));
        Vec Ax = sf_.A * xu;
        Vec ATy = sf_.A.transpose() * yu;
        double pres = std::max((Ax - sf_.b * tau).norm(), (su - xu.tail(nK)).norm()) /
                      (tau * (1.0 + bnorm));
        Vec dual = ATy + sf_.c * tau;
        dual.tail(nK) -= zu;
        double dres = dual.norm() / (tau * (1.0 + cnorm));
        double pcost = sf_.c.dot(xu) / tau;
        double dcost = -sf_.b.dot(yu) / tau;
        double gap = s.dot(z) / (tau * tau);
        double gap_tol = st_.eps_gap * (1.0 + std::abs(pcost));
        double mu = (s.dot(z) + tau * kap) / (D + 1);
        if (st_.verbose)
            fmt::print("{:3d} pcost {:+.6e} dcost {:+.6e} gap {:.2e} pres {:.2e} dres {:.2e} "
                       "k/t {:.2e} mu {:.2e}\n",
                       it, pcost, dcost, gap, pres, dres, kap / tau, mu);
        if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(mu)) {
            res.status = SolveStatus::NumericalError;
            res.message = "non-finite iterate";
            break;
        }
        double merit = std::max({pres, dres, std::abs(pcost - dcost) / (1.0 + std::abs(pcost))});
        if (merit < best.merit) {
            best = {merit, x, y, s, z, tau, pres, dres, gap};
        }

        if (pres <= st_.eps_feas && dres <= st_.eps_feas && gap <= gap_tol &&
            std::abs(pcost - dcost) <= gap_tol) {
            res.status = SolveStatus::Optimal;
            res.pres = pres;
            res.dres = dres;
            res.gap = gap;
            finish(res, x, y, s, z, tau);
            return res;
        }
        if (kap > tau) {
            double by = sf_.b.dot(yu);
            if (by < 0.0) {
                Vec cert = ATy;
                cert.tail(nK) -= zu;
                double pinf = cert.norm() / -by;
                if (pinf <= st_.eps_feas) {
                    res.status = SolveStatus::PrimalInfeasible;
                    res.ray_y = yu / -by;
                    res.message = fmt::format("infeasibility residual {:.2e}", pinf);
                    res.x = Vec::Zero(n_);
                    res.y = res.ray_y;
                    return res;
                }
            }
            double cx = sf_.c.dot(xu);
            if (cx < 0.0) {
                double dinf = std::max(Ax.norm(), (su - xu.tail(nK)).norm()) / -cx;
                if (dinf <= st_.eps_feas) {
                    res.status = SolveStatus::DualInfeasible;
                    res.ray_x = xu / -cx;
                    res.message = fmt::format("unboundedness residual {:.2e}", dinf);
                    res.x = res.ray_x;
                    return res;
                }
            }
        }
        if (it == st_.max_iterations) {
            res.status = SolveStatus::IterationLimit;
            break;
        }

        W = nt_scaling(s, z, lam);
        if (!factor(W)) {
            res.status = SolveStatus::NumericalError;
            res.message = "factorization failed";
            break;
        }
        rhs.setZero();
        rhs.head(n_) = -c_;
        rhs.segment(n_, m_) = b_;
        Vec d1 = solve_kkt(rhs);
        double denom = c_.dot(d1.head(n_)) + b_.dot(d1.segment(n_, m_)) - kap / tau;

        // solves for one right hand side of the complementarity block
        auto direction = [&](double sig, const Vec& xi, double dkap_rhs, Vec& dx, Vec& dy,
                             Vec& dz, Vec& ds, double& dtau, double& dkap) {
            Vec r(N);
            r.head(n_) = -(1.0 - sig) * rx;
            r.segment(n_, m_) = (1.0 - sig) * ry;
            r.tail(nK) = -(1.0 - sig) * rz + apply_w(W, xi);
            Vec d0 = solve_kkt(r);
            dtau = (-(1.0 - sig) * rt + dkap_rhs / tau -
                    (c_.dot(d0.head(n_)) + b_.dot(d0.segment(n_, m_)))) /
                   denom;
            Vec d = d0 + dtau * d1;
            dx = d.head(n_);
            dy = d.segment(n_, m_);
            dz = d.tail(nK);
            ds = -apply_w(W, xi + apply_w(W, dz));
            dkap = -(dkap_rhs + kap * dtau) / tau;
        };

        Vec dx, dy, dz, ds;
        double dtau, dkap;
        // predictor
        direction(0.0, lam, kap * tau, dx, dy, dz, ds, dtau, dkap);
        double amax = std::min(max_step(K_, s, ds), max_step(K_, z, dz));
        if (dtau < 0.0)
            amax = std::min(amax, -tau / dtau);
        if (dkap < 0.0)
            amax = std::min(amax, -kap / dkap);
        double aaff = std::min(1.0, amax);
        double sigma = std::clamp(std::pow(1.0 - aaff, 3), 1e-4, 1.0);

        // corrector
        Vec corr = jordan(K_, apply_winv(W, ds), apply_w(W, dz));
        Vec xi = jordan_div(K_, lam, jordan(K_, lam, lam) + corr - sigma * mu * e);
        double dkap_rhs = kap * tau + dkap * dtau - sigma * mu;
        direction(sigma, xi, dkap_rhs, dx, dy, dz, ds, dtau, dkap);
        amax = std::min(max_step(K_, s, ds), max_step(K_, z, dz));
        if (dtau < 0.0)
            amax = std::min(amax, -tau / dtau);
        if (dkap < 0.0)
            amax = std::min(amax, -kap / dkap);
        double alpha = std::min(1.0, st_.step * amax);
        if (!(alpha > 1e-12)) {
            res.status = SolveStatus::NumericalError;
            res.message = "step length collapsed";
            break;
        }
        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kap += alpha * dkap;
    }

    // best iterate seen, with an honest status
    res.pres = best.pres;
    res.dres = best.dres;
    res.gap = best.gap;
    if (best.x.size() == n_)
        finish(res, best.x, best.y, best.s, best.z, best.tau);
    else {
        res.x = Vec::Zero(n_);
        res.y = Vec::Zero(m_);
        res.s = Vec::Zero(n_);
    }
    if (res.message.empty())
        res.message = fmt::format("best merit {:.2e}", best.merit);
    return res;
}

} // namespace

SolveResult solve(const StandardForm& sf, const SolveSettings& settings)
{
    if (sf.presolve_infeasible) {
        SolveResult r;
        r.status = SolveStatus::PrimalInfeasible;
        r.message = "presolve";
        r.x = Eigen::VectorXd::Zero(sf.cols());
        return r;
    }
    Solver s(sf, settings);
    return s.run();
}

SolveResult solve_named(const ConicProgram& p, const SolveSettings& settings)
{
    StandardFormOptions opt;
    opt.presolve = settings.presolve;
    StandardForm sf = to_standard_form(p, opt);
    SolveResult r = solve(sf, settings);
    r.values = sf.recover(r.x);
    r.row_duals.assign(p.linear_rows().size(), kNaN);
    if (r.y.size() == sf.rows()) {
        for (size_t i = 0; i < r.row_duals.size(); ++i)
            if (sf.row_map[i] >= 0)
                r.row_duals[i] = r.y[sf.row_map[i]] / sf.row_sign[i];
    }
    if (r.status == SolveStatus::Optimal || r.status == SolveStatus::IterationLimit ||
        r.status == SolveStatus::NumericalError) {
        double f = p.objective_value(r.values);
        double dual = -(r.dual_objective);
        if (!p.maximize())
            dual = r.dual_objective;
        r.objective = f;
        r.dual_objective = dual;
    }
    return r;
}

std::vector<double> group_duals(const ConicProgram& p, const SolveResult& r,
                                const std::string& group)
{
    std::vector<double> out;
    for (size_t i = 0; i < p.linear_rows().size(); ++i)
        if (p.linear_rows()[i].group == group)
            out.push_back(i < r.row_duals.size() ? r.row_duals[i] : kNaN);
    return out;
}

double primal_infeasibility_residual(const StandardForm& sf, const Eigen::VectorXd& ray_y)
{
    if (ray_y.size() != sf.rows())
        return std::numeric_limits<double>::infinity();
    Cone K = cone_of(sf);
    Vec v = sf.A.transpose() * ray_y;
    double r = std::abs(sf.b.dot(ray_y) + 1.0);
    if (sf.n_free > 0)
        r = std::max(r, v.head(sf.n_free).lpNorm<Eigen::Infinity>());
    return std::max(r, cone_violation(K, v.tail(K.size)));
}

double dual_infeasibility_residual(const StandardForm& sf, const Eigen::VectorXd& ray_x)
{
    if (ray_x.size() != sf.cols())
        return std::numeric_limits<double>::infinity();
    Cone K = cone_of(sf);
    double r = std::abs(sf.c.dot(ray_x) + 1.0);
    if (sf.rows() > 0)
        r = std::max(r, (sf.A * ray_x).lpNorm<Eigen::Infinity>());
    return std::max(r, cone_violation(K, ray_x.tail(K.size)));
}

} // namespace gradostat
