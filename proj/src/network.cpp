#include "gradostat/network.hpp"

#include <fmt/format.h>

#include <Eigen/LU>

#include <cmath>
#include <deque>

namespace gradostat {

std::vector<int> GradostatNetwork::candidates() const
{
    std::vector<int> out;
    for (size_t k = 0; k < pipes.size(); ++k)
        if (pipes[k].candidate)
            out.push_back(static_cast<int>(k));
    return out;
}

Eigen::VectorXd GradostatNetwork::volumes() const
{
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i)
        v[i] = tanks[i].volume;
    return v;
}

Eigen::VectorXd GradostatNetwork::s_in() const
{
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i)
        v[i] = tanks[i].s_in;
    return v;
}

Eigen::VectorXd GradostatNetwork::x_in() const
{
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i)
        v[i] = tanks[i].x_in;
    return v;
}

void GradostatNetwork::validate() const
{
    const int n = size();
    if (n == 0)
        throw Error(ErrorCode::BadInput, "network has no tanks");
    for (int i = 0; i < n; ++i) {
        const auto& t = tanks[i];
        if (!(t.volume > 0.0))
            throw Error(ErrorCode::BadInput, fmt::format("tank {} volume must be positive", i + 1));
        if ((t.q_out && *t.q_out < 0.0) || (t.q_in && *t.q_in < 0.0) || t.s_in < 0.0 ||
            t.x_in < 0.0)
            throw Error(ErrorCode::BadInput,
                        fmt::format("tank {} has a negative flow or concentration", i + 1));
        if (!t.q_out && !t.q_in)
            throw Error(ErrorCode::BadInput,
                        fmt::format("tank {} needs an inflow or an outflow rate", i + 1));
    }
    for (size_t k = 0; k < pipes.size(); ++k) {
        const auto& p = pipes[k];
        if (p.from < 0 || p.from >= n || p.to < 0 || p.to >= n)
            throw Error(ErrorCode::BadInput, fmt::format("pipe {} references a missing tank", k + 1));
        if (p.from == p.to)
            throw Error(ErrorCode::BadInput, fmt::format("pipe {} is a self loop", k + 1));
        if (p.q0 < 0.0 || p.q1 < 0.0 || p.d0 < 0.0 || p.d1 < 0.0 || p.cost < 0.0)
            throw Error(ErrorCode::BadInput, fmt::format("pipe {} has a negative rate", k + 1));
    }
}

SystemMatrices assemble_matrices(const GradostatNetwork& net, const std::vector<double>& activation)
{
    net.validate();
    const int n = net.size();
    const auto cand = net.candidates();
    if (!activation.empty() && activation.size() != cand.size())
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("activation has {} entries for {} candidate pipes",
                                activation.size(), cand.size()));
    std::vector<double> act(net.pipes.size(), 0.0);
    for (size_t k = 0; k < cand.size(); ++k)
        act[cand[k]] = activation.empty() ? 0.0 : activation[k];

    SystemMatrices m;
    m.Q = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (size_t k = 0; k < net.pipes.size(); ++k) {
        const auto& p = net.pipes[k];
        // parallel pipes on one arc add up
        m.Q(p.from, p.to) += p.q0 + act[k] * p.q1;
        d(p.from, p.to) += p.d0 + act[k] * p.d1;
    }
    m.D = d + d.transpose();
    m.D.diagonal().setZero();

    Eigen::VectorXd out_pipes = m.Q.rowwise().sum();
    Eigen::VectorXd in_pipes = m.Q.colwise().sum().transpose();
    m.q_in.resize(n);
    m.q_out.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& t = net.tanks[i];
        double scale = 1.0 + out_pipes[i] + in_pipes[i];
        if (t.q_out && t.q_in) {
            double bal = *t.q_in + in_pipes[i] - *t.q_out - out_pipes[i];
            if (std::abs(bal) > 1e-8 * scale)
                throw Error(ErrorCode::BadInput,
                            fmt::format("tank {} violates water balance by {:.3g}", i + 1, bal));
            m.q_in[i] = *t.q_in;
            m.q_out[i] = *t.q_out;
        } else if (t.q_out) {
            double q = *t.q_out + out_pipes[i] - in_pipes[i];
            if (q < -1e-12 * scale)
                throw Error(ErrorCode::NegativeInflow,
                            fmt::format("tank {} would need inflow {:.6g}", i + 1, q));
            m.q_out[i] = *t.q_out;
            m.q_in[i] = std::max(q, 0.0);
        } else {
            double q = *t.q_in + in_pipes[i] - out_pipes[i];
            if (q < -1e-12 * scale)
                throw Error(ErrorCode::NegativeInflow,
                            fmt::format("tank {} would need outflow {:.6g}", i + 1, q));
            m.q_in[i] = *t.q_in;
            m.q_out[i] = std::max(q, 0.0);
        }
    }

    m.M = m.Q.transpose();
    for (int i = 0; i < n; ++i)
        m.M(i, i) = -m.q_out[i] - out_pipes[i];
    m.L = m.D;
    for (int i = 0; i < n; ++i)
        m.L(i, i) = -m.D.row(i).sum();
    m.C = m.q_in.asDiagonal();
    m.G = m.q_out.asDiagonal();
    return m;
}

namespace {

// nodes reachable from the seeds, following edges src -> dst
std::vector<char> reach(const std::vector<std::vector<int>>& adj, const std::vector<int>& seeds)
{
    std::vector<char> seen(adj.size(), 0);
    std::deque<int> q;
    for (int s : seeds) {
        seen[s] = 1;
        q.push_back(s);
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                q.push_back(v);
            }
    }
    return seen;
}

} // namespace

bool is_outflow_connected(const SystemMatrices& m)
{
    const int n = m.size();
    // reverse edges: from j back to i whenever water moves i -> j (M_ji > 0)
    std::vector<std::vector<int>> rev(n);
    std::vector<int> sinks;
    for (int i = 0; i < n; ++i) {
        if (m.G(i, i) > 0.0)
            sinks.push_back(i);
        for (int j = 0; j < n; ++j)
            if (i != j && m.M(j, i) > 0.0)
                rev[j].push_back(i);
    }
    auto seen = reach(rev, sinks);
    for (char c : seen)
        if (!c)
            return false;
    return true;
}

bool is_irreducible(const SystemMatrices& m)
{
    const int n = m.size();
    if (n <= 1)
        return true;
    Eigen::MatrixXd a = m.M + m.L;
    std::vector<std::vector<int>> fwd(n), bwd(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a(i, j) != 0.0) {
                fwd[j].push_back(i);
                bwd[i].push_back(j);
            }
    for (const auto& g : {fwd, bwd}) {
        auto seen = reach(g, {0});
        for (char c : seen)
            if (!c)
                return false;
    }
    return true;
}

bool is_fully_fed(const GradostatNetwork& net, const std::vector<double>& activation)
{
    SystemMatrices m = assemble_matrices(net, activation);
    Eigen::MatrixXd a = m.M + m.L;
    for (int i = 0; i < net.size(); ++i) {
        bool receives = false;
        for (int j = 0; j < net.size(); ++j)
            if (j != i && a(i, j) > 0.0)
                receives = true;
        if (receives)
            continue;
        const auto& t = net.tanks[i];
        if (!(m.q_in[i] > 0.0 && t.s_in > 0.0 && t.x_in > 0.0))
            return false;
    }
    return true;
}

bool is_numerically_invertible(const Eigen::MatrixXd& a, double rel_tol)
{
    if (a.size() == 0)
        return true;
    double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a / scale);
    lu.setThreshold(rel_tol);
    return lu.isInvertible();
}

Equilibrium equilibrium_z(const SystemMatrices& m, const Eigen::VectorXd& s_in,
                          const Eigen::VectorXd& x_in, double y)
{
    Eigen::MatrixXd a = m.M + m.L;
    if (s_in.size() != m.size() || x_in.size() != m.size())
        throw Error(ErrorCode::DimensionMismatch, "inflow vectors do not match the network");
    if (!is_numerically_invertible(a))
        throw Error(ErrorCode::SingularSystem, "M + L is singular (network not outflow connected)");
    Equilibrium e;
    e.z = -a.fullPivLu().solve(m.C * (x_in + y * s_in));
    e.positive = (e.z.array() > 0.0).all();
    return e;
}

} // namespace gradostat
