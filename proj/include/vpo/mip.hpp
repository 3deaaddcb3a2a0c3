#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpo/linalg.hpp"

namespace vpo {

struct MipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kInf = 1e30;

// Sparse linear expression over model columns plus a constant offset.
class LinExpr {
public:
    LinExpr() = default;
    explicit LinExpr(double c) : constant_(c) {}

    LinExpr& add(int var, double coef) {
        if (coef != 0.0) terms_[var] += coef;
        return *this;
    }
    LinExpr& add_const(double c) {
        constant_ += c;
        return *this;
    }
    LinExpr& add_scaled(const LinExpr& other, double s) {
        for (const auto& [v, c] : other.terms_) add(v, s * c);
        constant_ += s * other.constant_;
        return *this;
    }
    double constant() const { return constant_; }
    const std::map<int, double>& terms() const { return terms_; }

private:
    std::map<int, double> terms_;
    double constant_ = 0.0;
};

enum class RowSense { LE, GE, EQ };

class MipModel {
public:
    struct Col {
        std::string name;
        double lb = 0.0, ub = kInf;
        double obj = 0.0;
        bool binary = false;
    };
    struct Row {
        std::string name;
        std::vector<std::pair<int, double>> terms;  // sorted by column
        RowSense sense = RowSense::LE;
        double rhs = 0.0;
    };

    int add_col(const std::string& name, double lb, double ub, double obj = 0.0);
    int add_binary(const std::string& name, double obj = 0.0);
    // Adds `expr (sense) rhs`; the expression's constant moves to the rhs.
    void add_row(const std::string& name, const LinExpr& expr, RowSense sense, double rhs);
    void set_obj(int col, double coef);

    int num_cols() const { return static_cast<int>(cols_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    int num_binaries() const;
    const Col& col(int j) const { return cols_[static_cast<std::size_t>(j)]; }
    const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
    const std::vector<Col>& cols() const { return cols_; }
    const std::vector<Row>& rows() const { return rows_; }

    void validate() const;  // finite binary bounds, no NaN coefficients, index sanity
    std::string dump_lp() const;  // LP text format for external cross-checks

private:
    std::vector<Col> cols_;
    std::vector<Row> rows_;
};

struct LpResult {
    enum class Status { Optimal, Infeasible, Unbounded, Stalled };
    Status status = Status::Stalled;
    Vec x;             // structural columns
    double objective = 0.0;
    Vec dual;          // one multiplier per row, from the final basis
    Vec reduced_cost;  // per structural column
    long iterations = 0;
};

struct SimplexOptions {
    int pivot_limit = 0;  // 0: derived from model size
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
};

// Bounded-variable two-phase primal simplex over the LP relaxation, with the
// given bound overrides (used by branch-and-bound to fix binaries).
LpResult solve_lp(const MipModel& model, const Vec* lb_override = nullptr,
                  const Vec* ub_override = nullptr, const SimplexOptions& opts = {});

struct MipSolution {
    enum class Status { Optimal, Infeasible, GapLimit, IterationLimit };
    Status status = Status::Infeasible;
    Vec x;
    double objective = 0.0;
    double gap = 0.0;        // (incumbent - bound) / max(|incumbent|, eps)
    double best_bound = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
    double wall_ms = 0.0;
};

struct MipOptions {
    double gap_limit = 1e-4;
    long node_limit = 200000;
    SimplexOptions lp;
};

MipSolution solve_mip(const MipModel& model, const MipOptions& opts = {});

// Secant piecewise-linear over-estimator of var^2: adds an epigraph column e
// with e >= every chord of x^2 over [lb, ub] (`segments` of them), objective
// coefficient 1 on e. Exact at the breakpoints, over-estimates in between.
int add_epigraph_quadratic(MipModel& model, int var, int segments);

// Same chord construction with an arbitrary objective coefficient (use 0 for
// epigraphs consumed by other constraints rather than the objective).
int add_secant_epigraph(MipModel& model, int var, int segments, double obj_coef);

}  // namespace vpo
