#include "gradostat/bnb.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace gradostat {

const char* to_string(BnbStatus s)
{
    switch (s) {
    case BnbStatus::Optimal: return "Optimal";
    case BnbStatus::Infeasible: return "Infeasible";
    case BnbStatus::NodeLimit: return "NodeLimit";
    case BnbStatus::SolverFailure: return "SolverFailure";
    }
    return "Unknown";
}

ConicProgram fix_binaries(const ConicProgram& p, const std::vector<double>& assignment)
{
    ConicProgram q = p;
    auto bins = p.binaries();
    if (assignment.size() != bins.size())
        throw Error(ErrorCode::DimensionMismatch, "assignment does not match binaries");
    for (size_t k = 0; k < bins.size(); ++k)
        q.set_bounds(bins[k], assignment[k], assignment[k]);
    return q;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Node {
    long id;
    int depth;
    double bound; // parent's relaxation value (maximization score)
    std::vector<double> lo, hi;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const
    {
        if (a.bound != b.bound)
            return a.bound < b.bound;
        return a.id > b.id;
    }
};

class Search {
public:
    Search(const ConicProgram& p, const BnbSettings& s)
        : p_(p), st_(s), bins_(p.binaries()), sgn_(p.maximize() ? 1.0 : -1.0)
    {
    }

    BnbResult run();

private:
    bool close_enough(double bound) const
    {
        if (!have_inc_)
            return false;
        double tol = std::max(st_.abs_gap, st_.rel_gap * std::max(1.0, std::abs(inc_score_)));
        return bound - inc_score_ <= tol;
    }
    void try_incumbent(const std::vector<double>& assign);
    SolveResult solve_with(const std::vector<double>& lo, const std::vector<double>& hi);

    const ConicProgram& p_;
    BnbSettings st_;
    std::vector<int> bins_;
    double sgn_;
    bool have_inc_ = false;
    double inc_score_ = kNegInf;
    BnbResult res_;
    std::set<std::vector<double>> tried_;
};

SolveResult Search::solve_with(const std::vector<double>& lo, const std::vector<double>& hi)
{
    ConicProgram q = p_;
    for (size_t k = 0; k < bins_.size(); ++k)
        q.set_bounds(bins_[k], lo[k], hi[k]);
    return solve_named(q, st_.ipm);
}

void Search::try_incumbent(const std::vector<double>& assign)
{
    if (!tried_.insert(assign).second)
        return;
    SolveResult r = solve_with(assign, assign);
    if (r.status != SolveStatus::Optimal)
        return;
    double score = sgn_ * r.objective;
    if (!have_inc_ || score > inc_score_) {
        have_inc_ = true;
        inc_score_ = score;
        res_.assignment = assign;
        res_.values = r.values;
        res_.objective = r.objective;
        res_.solve = std::move(r);
    }
}

BnbResult Search::run()
{
    const size_t nb = bins_.size();
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    Node root{0, 0, std::numeric_limits<double>::infinity(), {}, {}};
    for (int j : bins_) {
        root.lo.push_back(std::max(0.0, p_.variables()[j].lo));
        root.hi.push_back(std::min(1.0, p_.variables()[j].hi));
    }
    open.push(root);
    long next_id = 1;
    bool hit_limit = false;

    while (!open.empty()) {
        if (res_.nodes >= st_.node_limit) {
            hit_limit = true;
            break;
        }
        Node node = open.top();
        open.pop();
        if (close_enough(node.bound))
            continue;
        ++res_.nodes;

        SolveResult r = solve_with(node.lo, node.hi);
        double score = sgn_ * r.objective;
        bool solved = r.status == SolveStatus::Optimal;
        if (r.status == SolveStatus::PrimalInfeasible) {
            res_.log.push_back({node.id, node.depth, kNegInf, have_inc_ ? inc_score_ : kNegInf});
        } else if (r.status == SolveStatus::DualInfeasible) {
            res_.status = BnbStatus::SolverFailure;
            res_.solve = r;
            return res_;
        } else {
            if (!solved)
                score = node.bound; // keep the parent's bound, cannot prune
            res_.log.push_back({node.id, node.depth, score, have_inc_ ? inc_score_ : kNegInf});
            if (!close_enough(score)) {
                // most fractional binary, lowest index on ties
                int pick = -1;
                double best_frac = -1.0;
                std::vector<double> rounded(nb);
                for (size_t k = 0; k < nb; ++k) {
                    double lo = node.lo[k], hi = node.hi[k];
                    double v = solved ? r.values[bins_[k]] : 0.5 * (lo + hi);
                    rounded[k] = std::round(std::clamp(v, lo, hi));
                    if (lo == hi)
                        continue;
                    double frac = std::min(v - std::floor(v), std::ceil(v) - v);
                    if (!solved)
                        frac = 0.5;
                    if (frac > st_.int_tol && frac > best_frac + 1e-12) {
                        best_frac = frac;
                        pick = static_cast<int>(k);
                    }
                }
                if (solved && (pick < 0 || st_.rounding))
                    try_incumbent(rounded);
                if (pick < 0 && !solved) {
                    // every binary is fixed yet the solve failed
                    ++res_.unresolved;
                } else if (pick >= 0) {
                    for (double val : {0.0, 1.0}) {
                        Node child{next_id++, node.depth + 1, score, node.lo, node.hi};
                        child.lo[pick] = child.hi[pick] = val;
                        open.push(std::move(child));
                    }
                }
            }
        }
        double top = open.empty() ? kNegInf : open.top().bound;
        res_.bound_trace.push_back(std::max(top, have_inc_ ? inc_score_ : kNegInf));
    }

    double open_bound = kNegInf;
    if (hit_limit) {
        auto copy = open;
        while (!copy.empty()) {
            open_bound = std::max(open_bound, copy.top().bound);
            copy.pop();
        }
    }
    if (!have_inc_) {
        res_.status = hit_limit ? BnbStatus::NodeLimit
                                : (res_.unresolved > 0 ? BnbStatus::SolverFailure
                                                       : BnbStatus::Infeasible);
        return res_;
    }
    double bound_score = std::max(inc_score_, open_bound);
    res_.bound = sgn_ * bound_score;
    res_.gap = (bound_score - inc_score_) / std::max(1.0, std::abs(inc_score_));
    if (hit_limit)
        res_.status = BnbStatus::NodeLimit;
    else if (res_.unresolved > 0)
        res_.status = BnbStatus::SolverFailure;
    else
        res_.status = BnbStatus::Optimal;
    return res_;
}

} // namespace

BnbResult solve_mixed(const ConicProgram& p, const BnbSettings& settings)
{
    Search s(p, settings);
    return s.run();
}

BnbResult enumerate_exhaustive(const ConicProgram& p, int limit, const BnbSettings& settings)
{
    auto bins = p.binaries();
    const int nb = static_cast<int>(bins.size());
    if (nb > limit || nb > 20)
        throw Error(ErrorCode::TooLarge, fmt::format("{} binaries exceed the enumeration limit", nb));
    const double sgn = p.maximize() ? 1.0 : -1.0;
    BnbResult res;
    bool have = false;
    double best = kNegInf;
    for (long mask = 0; mask < (1L << nb); ++mask) {
        std::vector<double> assign(nb);
        bool ok = true;
        for (int k = 0; k < nb; ++k) {
            assign[k] = (mask >> k) & 1 ? 1.0 : 0.0;
            const auto& v = p.variables()[bins[k]];
            if (assign[k] < v.lo || assign[k] > v.hi)
                ok = false;
        }
        if (!ok)
            continue;
        ++res.nodes;
        SolveResult r = solve_named(fix_binaries(p, assign), settings.ipm);
        if (r.status == SolveStatus::Optimal) {
            double score = sgn * r.objective;
            if (!have || score > best) {
                have = true;
                best = score;
                res.assignment = assign;
                res.values = r.values;
                res.objective = r.objective;
                res.solve = std::move(r);
            }
        } else if (r.status != SolveStatus::PrimalInfeasible) {
            ++res.unresolved;
        }
    }
    if (!have) {
        res.status = res.unresolved ? BnbStatus::SolverFailure : BnbStatus::Infeasible;
        return res;
    }
    res.bound = res.objective;
    res.status = res.unresolved ? BnbStatus::SolverFailure : BnbStatus::Optimal;
    return res;
}

std::string format_log(const BnbResult& r)
{
    std::string out;
    for (const auto& n : r.log)
        out += fmt::format("node {} depth {} bound {:.10g} incumbent {:.10g}\n", n.id, n.depth,
                           n.bound, n.incumbent);
    return out;
}

} // namespace gradostat
