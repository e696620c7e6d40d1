#include "gradostat/conic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace gradostat {

namespace {

constexpr double kTol = 1e-9;

bool fixed(const Variable& v)
{
    return std::isfinite(v.lo) && std::isfinite(v.hi) &&
           v.hi - v.lo <= 1e-12 * (1.0 + std::abs(v.lo));
}

// Expression with fixed variables folded into the constant.
AffineExpr reduce(const AffineExpr& e, const std::vector<Variable>& vars)
{
    AffineExpr r;
    r.constant = e.constant;
    for (const auto& t : e.terms) {
        const auto& v = vars[t.var];
        if (fixed(v))
            r.constant += t.coef * 0.5 * (v.lo + v.hi);
        else
            r.terms.push_back(t);
    }
    return r;
}

bool constant_ok(double c, Sense s)
{
    double tol = kTol * (1.0 + std::abs(c));
    switch (s) {
    case Sense::Eq: return std::abs(c) <= tol;
    case Sense::Le: return c <= tol;
    case Sense::Ge: return c >= -tol;
    }
    return false;
}

} // namespace

PresolveResult presolve(const ConicProgram& p)
{
    PresolveResult out;
    const auto& rows = p.linear_rows();
    const size_t nr = rows.size();
    std::vector<Variable> vars = p.variables();
    std::vector<char> alive(nr, 1);

    auto fail = [&](const std::string& why) {
        out.infeasible = true;
        out.reason = why;
    };

    // singleton and empty rows, iterated to a fixed point
    bool changed = true;
    while (changed && !out.infeasible) {
        changed = false;
        for (size_t i = 0; i < nr && !out.infeasible; ++i) {
            if (!alive[i])
                continue;
            AffineExpr e = reduce(rows[i].expr, vars);
            if (e.terms.empty()) {
                if (!constant_ok(e.constant, rows[i].sense))
                    fail(fmt::format("row '{}' reduces to an infeasible constant", rows[i].name));
                alive[i] = 0;
                changed = true;
                continue;
            }
            if (e.terms.size() != 1)
                continue;
            const Term t = e.terms[0];
            auto& v = vars[t.var];
            double val = -e.constant / t.coef;
            Sense s = rows[i].sense;
            if (t.coef < 0.0 && s != Sense::Eq)
                s = s == Sense::Le ? Sense::Ge : Sense::Le;
            double lo = v.lo, hi = v.hi;
            if (s == Sense::Eq) {
                lo = std::max(lo, val);
                hi = std::min(hi, val);
            } else if (s == Sense::Le) {
                hi = std::min(hi, val);
            } else {
                lo = std::max(lo, val);
            }
            if (v.binary) {
                lo = std::ceil(lo - 1e-9);
                hi = std::floor(hi + 1e-9);
            }
            double tol = kTol * (1.0 + std::abs(val));
            if (lo > hi + tol) {
                fail(fmt::format("bounds of '{}' become empty", v.name));
                break;
            }
            if (lo > hi)
                lo = hi = 0.5 * (lo + hi);
            if (hi - lo <= tol)
                lo = hi = (s == Sense::Eq ? std::clamp(val, lo, hi) : 0.5 * (lo + hi));
            v.lo = lo;
            v.hi = hi;
            alive[i] = 0;
            changed = true;
        }
    }

    // parallel rows: same normalized coefficient pattern
    struct Interval {
        double lo = -kInf, hi = kInf;
        int lo_row = -1, hi_row = -1;
    };
    using Key = std::vector<std::pair<int, double>>;
    std::map<Key, Interval> groups;
    std::vector<Key> keys(nr);
    std::vector<double> norm(nr, 1.0);
    std::vector<AffineExpr> reduced(nr);
    for (size_t i = 0; i < nr && !out.infeasible; ++i) {
        if (!alive[i])
            continue;
        AffineExpr e = reduce(rows[i].expr, vars);
        e.compact();
        reduced[i] = e;
        double f = e.terms[0].coef;
        Key k;
        for (const auto& t : e.terms)
            k.emplace_back(t.var, t.coef / f);
        keys[i] = k;
        norm[i] = f;
        // normalized row: k.x + c/f (sense flips when f < 0)
        double bound = -e.constant / f;
        Sense s = rows[i].sense;
        if (f < 0.0 && s != Sense::Eq)
            s = s == Sense::Le ? Sense::Ge : Sense::Le;
        auto& g = groups[k];
        if (s != Sense::Ge && bound < g.hi) {
            g.hi = bound;
            g.hi_row = static_cast<int>(i);
        }
        if (s != Sense::Le && bound > g.lo) {
            g.lo = bound;
            g.lo_row = static_cast<int>(i);
        }
    }

    ConicProgram q;
    for (const auto& v : vars)
        q.add_variable(v.name, v.lo, v.hi, v.binary);
    out.row_target.assign(nr, -1);
    out.row_scale.assign(nr, 1.0);

    if (!out.infeasible) {
        // emit one or two rows per group, in order of first appearance
        std::map<Key, std::pair<int, int>> emitted;
        for (size_t i = 0; i < nr; ++i) {
            if (!alive[i])
                continue;
            const Key& k = keys[i];
            auto& g = groups[k];
            double tol = kTol * (1.0 + std::max(std::isfinite(g.lo) ? std::abs(g.lo) : 0.0,
                                                std::isfinite(g.hi) ? std::abs(g.hi) : 0.0));
            if (g.lo > g.hi + tol) {
                fail(fmt::format("rows '{}' and '{}' contradict", rows[g.lo_row].name,
                                 rows[g.hi_row].name));
                break;
            }
            auto it = emitted.find(k);
            if (it == emitted.end()) {
                // kept rows reuse the scale of their representative original
                int eq = -1, le = -1, ge = -1;
                auto make = [&](int origin, Sense s, double bound) {
                    double f = norm[origin];
                    AffineExpr e;
                    for (const auto& [var, c] : k)
                        e.terms.push_back({var, c * f});
                    e.constant = -bound * f;
                    if (f < 0.0 && s != Sense::Eq)
                        s = s == Sense::Le ? Sense::Ge : Sense::Le;
                    return q.add_linear(e, s, AffineExpr(), rows[origin].name,
                                        rows[origin].group);
                };
                if (std::isfinite(g.lo) && std::isfinite(g.hi) && g.hi - g.lo <= tol) {
                    int origin = g.hi_row;
                    if (rows[g.lo_row].sense == Sense::Eq)
                        origin = g.lo_row;
                    eq = make(origin, Sense::Eq, rows[origin].sense == Sense::Eq ? g.lo : g.hi);
                } else {
                    if (std::isfinite(g.hi))
                        le = make(g.hi_row, Sense::Le, g.hi);
                    if (std::isfinite(g.lo))
                        ge = make(g.lo_row, Sense::Ge, g.lo);
                }
                it = emitted.emplace(k, std::make_pair(eq >= 0 ? eq : le, eq >= 0 ? eq : ge)).first;
            }
            // map this original onto the kept row on its side
            Sense s = rows[i].sense;
            if (norm[i] < 0.0 && s != Sense::Eq)
                s = s == Sense::Le ? Sense::Ge : Sense::Le;
            int target = s == Sense::Ge ? it->second.second : it->second.first;
            if (target < 0)
                target = s == Sense::Ge ? it->second.first : it->second.second;
            out.row_target[i] = target;
            if (target >= 0) {
                // original = (norm_i / norm_kept) * kept
                const auto& kept = q.linear_rows()[target];
                double kf = kept.expr.terms.empty() ? 1.0 : kept.expr.terms[0].coef;
                out.row_scale[i] = norm[i] / kf;
            }
        }
    }

    for (const auto& s : p.soc_rows())
        q.add_soc(s.t, s.u, s.name, s.group);
    for (const auto& s : p.rotated_rows())
        q.add_rotated_soc(s.v, s.w, s.u, s.name, s.group);
    q.set_objective(p.objective(), p.maximize());
    out.program = std::move(q);
    return out;
}

} // namespace gradostat
