#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradostat/error.hpp"

namespace gradostat {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
    int var;
    double coef;
};

// Linear form over variable indices of one ConicProgram plus a constant.
struct AffineExpr {
    std::vector<Term> terms;
    double constant = 0.0;

    AffineExpr() = default;
    AffineExpr(double c) : constant(c) {}

    static AffineExpr of(int var, double coef = 1.0);

    AffineExpr& add(int var, double coef);
    AffineExpr& operator+=(const AffineExpr& o);
    AffineExpr& operator-=(const AffineExpr& o);
    AffineExpr& operator*=(double a);

    double eval(const Eigen::VectorXd& x) const;
    // sum duplicate indices and drop zeros
    void compact();
    bool is_constant() const { return terms.empty(); }
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator*(AffineExpr a, double s);

struct Variable {
    std::string name;
    double lo = 0.0;
    double hi = kInf;
    bool binary = false;
};

enum class Sense { Eq, Le, Ge };

// expr (sense) 0
struct LinearRow {
    AffineExpr expr;
    Sense sense = Sense::Eq;
    std::string name;
    std::string group;
};

// ||u|| <= t
struct SocRow {
    AffineExpr t;
    std::vector<AffineExpr> u;
    std::string name;
    std::string group;
};

// 2 v w >= ||u||^2, v >= 0, w >= 0
struct RotatedSocRow {
    AffineExpr v;
    AffineExpr w;
    std::vector<AffineExpr> u;
    std::string name;
    std::string group;
};

class ConicProgram {
public:
    // Returns the index. Re-adding an existing name throws DuplicateName.
    int add_variable(const std::string& name, double lo = 0.0, double hi = kInf,
                     bool binary = false);
    // Declares the variable if missing, otherwise intersects its bounds.
    int ensure_variable(const std::string& name, double lo = 0.0, double hi = kInf,
                        bool binary = false);

    int index(const std::string& name) const;
    bool has(const std::string& name) const;
    AffineExpr v(const std::string& name) const { return AffineExpr::of(index(name)); }

    int add_linear(AffineExpr lhs, Sense sense, const AffineExpr& rhs,
                   std::string name = {}, std::string group = {});
    int add_soc(AffineExpr t, std::vector<AffineExpr> u, std::string name = {},
                std::string group = {});
    int add_rotated_soc(AffineExpr v, AffineExpr w, std::vector<AffineExpr> u,
                        std::string name = {}, std::string group = {});
    // ||u||^2 <= z w with z, w >= 0, stored as a standard cone
    int add_hyperbolic(std::vector<AffineExpr> u, AffineExpr z, AffineExpr w,
                       std::string name = {}, std::string group = {});

    void set_objective(AffineExpr obj, bool maximize = true);

    // Merges another fragment; variables are matched by name.
    void absorb(const ConicProgram& other);

    void set_bounds(int var, double lo, double hi);

    const std::vector<Variable>& variables() const { return vars_; }
    std::vector<Variable>& variables() { return vars_; }
    const std::vector<LinearRow>& linear_rows() const { return rows_; }
    const std::vector<SocRow>& soc_rows() const { return socs_; }
    const std::vector<RotatedSocRow>& rotated_rows() const { return rsocs_; }
    const AffineExpr& objective() const { return obj_; }
    bool maximize() const { return maximize_; }

    int num_variables() const { return static_cast<int>(vars_.size()); }
    std::vector<int> binaries() const;
    int find_row(const std::string& name) const;

    double objective_value(const Eigen::VectorXd& x) const;
    // Largest violation over bounds, rows and cones (absolute).
    double max_violation(const Eigen::VectorXd& x) const;
    bool is_feasible(const Eigen::VectorXd& x, double tol) const;

private:
    void check_expr(const AffineExpr& e) const;
    AffineExpr remap(const AffineExpr& e, const std::vector<int>& map) const;

    std::vector<Variable> vars_;
    std::unordered_map<std::string, int> by_name_;
    std::vector<LinearRow> rows_;
    std::vector<SocRow> socs_;
    std::vector<RotatedSocRow> rsocs_;
    AffineExpr obj_;
    bool maximize_ = true;
};

// A fragment of constraints over named variables, merged with absorb().
using ConeBlock = ConicProgram;

// minimize c'x + c0  s.t.  A x = b,  x in free^nf x R+^nl x SOC(d1) x ...
struct StandardForm {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double c0 = 0.0;
    int n_free = 0;
    int n_nonneg = 0;
    std::vector<int> soc_dims;

    // original variable j = var_offset[j] + var_coef[j] * x[var_col[j]]
    // (var_col[j] < 0 means fixed at var_offset[j])
    std::vector<int> var_col;
    std::vector<double> var_offset;
    std::vector<double> var_coef;
    // standard row carrying each original linear row (-1 if removed);
    // original expr = row_sign * standard row, so its multiplier is y / row_sign
    std::vector<int> row_map;
    std::vector<double> row_sign;
    std::vector<int> soc_map;
    std::vector<int> rsoc_map;
    // value of every standard column as a function of the original variables
    std::vector<AffineExpr> col_value;
    bool maximize = true;
    bool presolve_infeasible = false;

    int cols() const { return static_cast<int>(c.size()); }
    int rows() const { return static_cast<int>(b.size()); }
    int cone_start() const { return n_free; }

    Eigen::VectorXd recover(const Eigen::VectorXd& x) const;
    // lifts an original point into standard-form coordinates
    Eigen::VectorXd lift(const Eigen::VectorXd& orig) const;
    bool in_cone(const Eigen::VectorXd& x, double tol) const;
    void dump(std::ostream& os) const;
};

struct StandardFormOptions {
    bool presolve = true;
};

StandardForm to_standard_form(const ConicProgram& p, const StandardFormOptions& opt = {});

// Tightened copy of p with the same variables: fixed variables substituted,
// singleton rows turned into bounds, parallel rows merged.
struct PresolveResult {
    ConicProgram program;
    // per original row: kept row index (-1 if removed) and the factor with
    // original expr = scale * kept expr
    std::vector<int> row_target;
    std::vector<double> row_scale;
    bool infeasible = false;
    std::string reason;
};

PresolveResult presolve(const ConicProgram& p);

} // namespace gradostat
