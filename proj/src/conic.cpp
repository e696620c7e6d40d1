#include "gradostat/conic.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gradostat {

AffineExpr AffineExpr::of(int var, double coef)
{
    AffineExpr e;
    e.terms.push_back({var, coef});
    return e;
}

AffineExpr& AffineExpr::add(int var, double coef)
{
    terms.push_back({var, coef});
    return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o)
{
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o)
{
    for (const auto& t : o.terms)
        terms.push_back({t.var, -t.coef});
    constant -= o.constant;
    return *this;
}

AffineExpr& AffineExpr::operator*=(double a)
{
    for (auto& t : terms)
        t.coef *= a;
    constant *= a;
    return *this;
}

double AffineExpr::eval(const Eigen::VectorXd& x) const
{
    double v = constant;
    for (const auto& t : terms)
        v += t.coef * x[t.var];
    return v;
}

void AffineExpr::compact()
{
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> out;
    for (const auto& t : terms) {
        if (!out.empty() && out.back().var == t.var)
            out.back().coef += t.coef;
        else
            out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return t.coef == 0.0; }),
              out.end());
    terms = std::move(out);
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator*(AffineExpr a, double s) { return a *= s; }

int ConicProgram::add_variable(const std::string& name, double lo, double hi, bool binary)
{
    if (by_name_.count(name))
        throw Error(ErrorCode::DuplicateName, "duplicate variable " + name);
    if (binary) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
    }
    int id = static_cast<int>(vars_.size());
    vars_.push_back({name, lo, hi, binary});
    by_name_.emplace(name, id);
    return id;
}

int ConicProgram::ensure_variable(const std::string& name, double lo, double hi, bool binary)
{
    auto it = by_name_.find(name);
    if (it == by_name_.end())
        return add_variable(name, lo, hi, binary);
    auto& v = vars_[it->second];
    v.lo = std::max(v.lo, lo);
    v.hi = std::min(v.hi, hi);
    v.binary = v.binary || binary;
    return it->second;
}

int ConicProgram::index(const std::string& name) const
{
    auto it = by_name_.find(name);
    if (it == by_name_.end())
        throw Error(ErrorCode::UnknownVariable, "unknown variable " + name);
    return it->second;
}

bool ConicProgram::has(const std::string& name) const { return by_name_.count(name) > 0; }

void ConicProgram::check_expr(const AffineExpr& e) const
{
    for (const auto& t : e.terms)
        if (t.var < 0 || t.var >= num_variables())
            throw Error(ErrorCode::UnknownVariable,
                        fmt::format("variable index {} out of range", t.var));
}

int ConicProgram::add_linear(AffineExpr lhs, Sense sense, const AffineExpr& rhs,
                             std::string name, std::string group)
{
    lhs -= rhs;
    lhs.compact();
    check_expr(lhs);
    rows_.push_back({std::move(lhs), sense, std::move(name), std::move(group)});
    return static_cast<int>(rows_.size()) - 1;
}

int ConicProgram::add_soc(AffineExpr t, std::vector<AffineExpr> u, std::string name,
                          std::string group)
{
    t.compact();
    check_expr(t);
    for (auto& e : u) {
        e.compact();
        check_expr(e);
    }
    socs_.push_back({std::move(t), std::move(u), std::move(name), std::move(group)});
    return static_cast<int>(socs_.size()) - 1;
}

int ConicProgram::add_rotated_soc(AffineExpr v, AffineExpr w, std::vector<AffineExpr> u,
                                  std::string name, std::string group)
{
    v.compact();
    w.compact();
    check_expr(v);
    check_expr(w);
    for (auto& e : u) {
        e.compact();
        check_expr(e);
    }
    rsocs_.push_back({std::move(v), std::move(w), std::move(u), std::move(name),
                      std::move(group)});
    return static_cast<int>(rsocs_.size()) - 1;
}

int ConicProgram::add_hyperbolic(std::vector<AffineExpr> u, AffineExpr z, AffineExpr w,
                                 std::string name, std::string group)
{
    // |u|^2 <= z w  <=>  |(2u, z - w)| <= z + w
    std::vector<AffineExpr> entries;
    for (auto& e : u)
        entries.push_back(2.0 * e);
    entries.push_back(z - w);
    return add_soc(z + w, std::move(entries), std::move(name), std::move(group));
}

void ConicProgram::set_objective(AffineExpr obj, bool maximize)
{
    obj.compact();
    check_expr(obj);
    obj_ = std::move(obj);
    maximize_ = maximize;
}

void ConicProgram::set_bounds(int var, double lo, double hi)
{
    vars_.at(var).lo = lo;
    vars_.at(var).hi = hi;
}

AffineExpr ConicProgram::remap(const AffineExpr& e, const std::vector<int>& map) const
{
    AffineExpr r;
    r.constant = e.constant;
    for (const auto& t : e.terms)
        r.terms.push_back({map[t.var], t.coef});
    return r;
}

void ConicProgram::absorb(const ConicProgram& other)
{
    std::vector<int> map(other.vars_.size());
    for (size_t j = 0; j < other.vars_.size(); ++j) {
        const auto& v = other.vars_[j];
        map[j] = ensure_variable(v.name, v.lo, v.hi, v.binary);
    }
    for (const auto& r : other.rows_)
        rows_.push_back({remap(r.expr, map), r.sense, r.name, r.group});
    for (const auto& s : other.socs_) {
        SocRow c{remap(s.t, map), {}, s.name, s.group};
        for (const auto& e : s.u)
            c.u.push_back(remap(e, map));
        socs_.push_back(std::move(c));
    }
    for (const auto& s : other.rsocs_) {
        RotatedSocRow c{remap(s.v, map), remap(s.w, map), {}, s.name, s.group};
        for (const auto& e : s.u)
            c.u.push_back(remap(e, map));
        rsocs_.push_back(std::move(c));
    }
    if (!other.obj_.terms.empty() || other.obj_.constant != 0.0) {
        obj_ += remap(other.obj_, map);
        obj_.compact();
    }
}

std::vector<int> ConicProgram::binaries() const
{
    std::vector<int> out;
    for (int j = 0; j < num_variables(); ++j)
        if (vars_[j].binary)
            out.push_back(j);
    return out;
}

int ConicProgram::find_row(const std::string& name) const
{
    for (size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].name == name)
            return static_cast<int>(i);
    return -1;
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const { return obj_.eval(x); }

double ConicProgram::max_violation(const Eigen::VectorXd& x) const
{
    if (x.size() != num_variables())
        throw Error(ErrorCode::DimensionMismatch, "point has wrong dimension");
    double worst = 0.0;
    for (int j = 0; j < num_variables(); ++j) {
        worst = std::max(worst, vars_[j].lo - x[j]);
        worst = std::max(worst, x[j] - vars_[j].hi);
    }
    for (const auto& r : rows_) {
        double v = r.expr.eval(x);
        switch (r.sense) {
        case Sense::Eq: worst = std::max(worst, std::abs(v)); break;
        case Sense::Le: worst = std::max(worst, v); break;
        case Sense::Ge: worst = std::max(worst, -v); break;
        }
    }
    for (const auto& s : socs_) {
        double n2 = 0.0;
        for (const auto& e : s.u) {
            double v = e.eval(x);
            n2 += v * v;
        }
        worst = std::max(worst, std::sqrt(n2) - s.t.eval(x));
    }
    for (const auto& s : rsocs_) {
        double v = s.v.eval(x), w = s.w.eval(x);
        double n2 = 0.0;
        for (const auto& e : s.u) {
            double a = e.eval(x);
            n2 += a * a;
        }
        // same geometry as the lifted cone
        double lhs = std::sqrt((v - w) * (v - w) + 2.0 * n2);
        worst = std::max(worst, lhs - (v + w));
    }
    return worst;
}

bool ConicProgram::is_feasible(const Eigen::VectorXd& x, double tol) const
{
    return max_violation(x) <= tol;
}

Eigen::VectorXd StandardForm::recover(const Eigen::VectorXd& x) const
{
    Eigen::VectorXd out(var_col.size());
    for (size_t j = 0; j < var_col.size(); ++j)
        out[j] = var_col[j] < 0 ? var_offset[j] : var_offset[j] + var_coef[j] * x[var_col[j]];
    return out;
}

bool StandardForm::in_cone(const Eigen::VectorXd& x, double tol) const
{
    for (int k = n_free; k < n_free + n_nonneg; ++k)
        if (x[k] < -tol)
            return false;
    int at = n_free + n_nonneg;
    for (int d : soc_dims) {
        if (x.segment(at + 1, d - 1).norm() - x[at] > tol)
            return false;
        at += d;
    }
    return true;
}

void StandardForm::dump(std::ostream& os) const
{
    fmt::print(os, "# rows {} cols {} free {} nonneg {} soc", rows(), cols(), n_free, n_nonneg);
    for (int d : soc_dims)
        fmt::print(os, " {}", d);
    fmt::print(os, "\n# A\n");
    for (int j = 0; j < A.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
            fmt::print(os, "{} {} {:.17g}\n", it.row(), it.col(), it.value());
    fmt::print(os, "# b\n");
    for (int i = 0; i < b.size(); ++i)
        if (b[i] != 0.0)
            fmt::print(os, "{} {:.17g}\n", i, b[i]);
    fmt::print(os, "# c\n");
    for (int i = 0; i < c.size(); ++i)
        if (c[i] != 0.0)
            fmt::print(os, "{} {:.17g}\n", i, c[i]);
}

namespace {

enum class ColKind { Free, Nonneg, Cone };

struct Builder {
    std::vector<ColKind> kind;
    std::vector<int> cone_of; // cone id for cone columns
    std::vector<AffineExpr> value; // column value as a function of original variables
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> rhs;
    std::vector<double> cost;

    int col(ColKind k, AffineExpr v, int cone = -1)
    {
        kind.push_back(k);
        cone_of.push_back(cone);
        value.push_back(std::move(v));
        cost.push_back(0.0);
        return static_cast<int>(kind.size()) - 1;
    }
    int row(double b)
    {
        rhs.push_back(b);
        return static_cast<int>(rhs.size()) - 1;
    }
};

bool is_fixed(const Variable& v)
{
    return std::isfinite(v.lo) && std::isfinite(v.hi) &&
           v.hi - v.lo <= 1e-12 * (1.0 + std::abs(v.lo));
}

} // namespace

StandardForm to_standard_form(const ConicProgram& input, const StandardFormOptions& opt)
{
    if (input.num_variables() == 0)
        throw Error(ErrorCode::EmptyProgram, "program has no variables");

    PresolveResult pre;
    const ConicProgram* pp = &input;
    std::vector<int> row_target(input.linear_rows().size());
    std::vector<double> row_scale(input.linear_rows().size(), 1.0);
    for (size_t i = 0; i < row_target.size(); ++i)
        row_target[i] = static_cast<int>(i);
    if (opt.presolve) {
        pre = presolve(input);
        pp = &pre.program;
        row_target = pre.row_target;
        row_scale = pre.row_scale;
    }
    const ConicProgram& p = *pp;

    StandardForm sf;
    sf.maximize = p.maximize();
    sf.presolve_infeasible = pre.infeasible;
    const int nv = p.num_variables();
    sf.var_col.assign(nv, -1);
    sf.var_offset.assign(nv, 0.0);
    sf.var_coef.assign(nv, 1.0);

    Builder B;
    struct Bound {
        int col;
        double span;
        int var;
    };
    std::vector<Bound> boxes;
    for (int j = 0; j < nv; ++j) {
        const auto& v = p.variables()[j];
        if (is_fixed(v)) {
            sf.var_offset[j] = 0.5 * (v.lo + v.hi);
            continue;
        }
        bool flo = std::isfinite(v.lo), fhi = std::isfinite(v.hi);
        AffineExpr xv = AffineExpr::of(j);
        if (!flo && !fhi) {
            sf.var_col[j] = B.col(ColKind::Free, xv);
        } else if (flo) {
            sf.var_offset[j] = v.lo;
            sf.var_col[j] = B.col(ColKind::Nonneg, xv - AffineExpr(v.lo));
            if (fhi)
                boxes.push_back({sf.var_col[j], v.hi - v.lo, j});
        } else {
            sf.var_offset[j] = v.hi;
            sf.var_coef[j] = -1.0;
            sf.var_col[j] = B.col(ColKind::Nonneg, AffineExpr(v.hi) - xv);
        }
    }

    // adds sum_k a_k x_k (x original) to row r; returns the constant part
    auto emit = [&](int r, const AffineExpr& e, double scale) {
        double cst = scale * e.constant;
        for (const auto& t : e.terms) {
            int c = sf.var_col[t.var];
            cst += scale * t.coef * sf.var_offset[t.var];
            if (c >= 0)
                B.trip.emplace_back(r, c, scale * t.coef * sf.var_coef[t.var]);
        }
        return cst;
    };

    for (const auto& bx : boxes) {
        int r = B.row(bx.span);
        B.trip.emplace_back(r, bx.col, 1.0);
        const auto& v = p.variables()[bx.var];
        int s = B.col(ColKind::Nonneg, AffineExpr(v.hi) - AffineExpr::of(bx.var));
        B.trip.emplace_back(r, s, 1.0);
    }

    std::vector<int> kept_row_std(p.linear_rows().size(), -1);
    for (size_t i = 0; i < p.linear_rows().size(); ++i) {
        const auto& lr = p.linear_rows()[i];
        int r = B.row(0.0);
        kept_row_std[i] = r;
        double cst = emit(r, lr.expr, 1.0);
        B.rhs[r] = -cst;
        if (lr.sense == Sense::Le) {
            int s = B.col(ColKind::Nonneg, -lr.expr);
            B.trip.emplace_back(r, s, 1.0);
        } else if (lr.sense == Sense::Ge) {
            int s = B.col(ColKind::Nonneg, lr.expr);
            B.trip.emplace_back(r, s, -1.0);
        }
    }

    int cone_id = 0;
    // each cone entry is a weighted sum of affine expressions
    using Combo = std::vector<std::vector<std::pair<const AffineExpr*, double>>>;
    auto add_cone = [&](const Combo& combo) {
        std::vector<int> cols;
        for (size_t k = 0; k < combo.size(); ++k) {
            AffineExpr val;
            for (const auto& [e, w] : combo[k])
                val += w * (*e);
            cols.push_back(B.col(ColKind::Cone, val, cone_id));
        }
        for (size_t k = 0; k < combo.size(); ++k) {
            int r = B.row(0.0);
            B.trip.emplace_back(r, cols[k], 1.0);
            double cst = 0.0;
            for (const auto& [e, w] : combo[k])
                cst += emit(r, *e, -w);
            B.rhs[r] = -cst;
        }
        sf.soc_dims.push_back(static_cast<int>(combo.size()));
        return cone_id++;
    };

    for (const auto& s : p.soc_rows()) {
        Combo combo;
        combo.push_back({{&s.t, 1.0}});
        for (const auto& e : s.u)
            combo.push_back({{&e, 1.0}});
        sf.soc_map.push_back(add_cone(combo));
    }
    const double r2 = std::sqrt(2.0);
    for (const auto& s : p.rotated_rows()) {
        Combo combo;
        combo.push_back({{&s.v, 1.0}, {&s.w, 1.0}});
        combo.push_back({{&s.v, 1.0}, {&s.w, -1.0}});
        for (const auto& e : s.u)
            combo.push_back({{&e, r2}});
        sf.rsoc_map.push_back(add_cone(combo));
    }

    // objective, as a minimization
    double sgn = p.maximize() ? -1.0 : 1.0;
    double c0 = sgn * p.objective().constant;
    for (const auto& t : p.objective().terms) {
        int c = sf.var_col[t.var];
        c0 += sgn * t.coef * sf.var_offset[t.var];
        if (c >= 0)
            B.cost[c] += sgn * t.coef * sf.var_coef[t.var];
    }

    // order columns: free, nonneg, cones in creation order
    const int ncol = static_cast<int>(B.kind.size());
    std::vector<int> perm(ncol);
    int at = 0;
    for (int k = 0; k < ncol; ++k)
        if (B.kind[k] == ColKind::Free)
            perm[k] = at++;
    sf.n_free = at;
    for (int k = 0; k < ncol; ++k)
        if (B.kind[k] == ColKind::Nonneg)
            perm[k] = at++;
    sf.n_nonneg = at - sf.n_free;
    for (int k = 0; k < ncol; ++k)
        if (B.kind[k] == ColKind::Cone)
            perm[k] = at++; // cones were created contiguously

    sf.c = Eigen::VectorXd::Zero(ncol);
    for (int k = 0; k < ncol; ++k)
        sf.c[perm[k]] = B.cost[k];
    sf.c0 = c0;
    for (auto& t : B.trip)
        t = Eigen::Triplet<double>(t.row(), perm[t.col()], t.value());
    sf.A.resize(static_cast<int>(B.rhs.size()), ncol);
    sf.A.setFromTriplets(B.trip.begin(), B.trip.end());
    sf.A.makeCompressed();
    sf.b = Eigen::Map<Eigen::VectorXd>(B.rhs.data(), static_cast<int>(B.rhs.size()));
    for (int j = 0; j < nv; ++j)
        if (sf.var_col[j] >= 0)
            sf.var_col[j] = perm[sf.var_col[j]];

    sf.col_value.resize(ncol);
    for (int k = 0; k < ncol; ++k)
        sf.col_value[perm[k]] = std::move(B.value[k]);

    sf.row_map.assign(input.linear_rows().size(), -1);
    sf.row_sign.assign(input.linear_rows().size(), 1.0);
    for (size_t i = 0; i < row_target.size(); ++i) {
        if (row_target[i] >= 0) {
            sf.row_map[i] = kept_row_std[row_target[i]];
            sf.row_sign[i] = row_scale[i];
        }
    }
    return sf;
}

Eigen::VectorXd StandardForm::lift(const Eigen::VectorXd& orig) const
{
    Eigen::VectorXd x(cols());
    for (int k = 0; k < cols(); ++k)
        x[k] = col_value[k].eval(orig);
    return x;
}

} // namespace gradostat
