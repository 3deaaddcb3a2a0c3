#include "vpo/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace vpo {

int MipModel::add_col(const std::string& name, double lb, double ub, double obj) {
    if (std::isnan(lb) || std::isnan(ub) || std::isnan(obj)) throw MipError("NaN in column definition");
    if (lb > ub) throw MipError("column '" + name + "' has lb > ub");
    cols_.push_back({name, lb, ub, obj, false});
    return static_cast<int>(cols_.size()) - 1;
}

int MipModel::add_binary(const std::string& name, double obj) {
    cols_.push_back({name, 0.0, 1.0, obj, true});
    return static_cast<int>(cols_.size()) - 1;
}

void MipModel::add_row(const std::string& name, const LinExpr& expr, RowSense sense, double rhs) {
    Row r;
    r.name = name;
    r.sense = sense;
    r.rhs = rhs - expr.constant();
    if (std::isnan(r.rhs)) throw MipError("NaN in row rhs");
    r.terms.reserve(expr.terms().size());
    for (const auto& [v, c] : expr.terms()) {
        if (v < 0 || v >= num_cols()) throw MipError("row '" + name + "' references unknown column");
        if (std::isnan(c)) throw MipError("NaN coefficient in row '" + name + "'");
        if (c != 0.0) r.terms.push_back({v, c});
    }
    rows_.push_back(std::move(r));
}

void MipModel::set_obj(int col, double coef) {
    if (std::isnan(coef)) throw MipError("NaN objective coefficient");
    cols_[static_cast<std::size_t>(col)].obj = coef;
}

int MipModel::num_binaries() const {
    int nb = 0;
    for (const auto& c : cols_)
        if (c.binary) ++nb;
    return nb;
}

void MipModel::validate() const {
    for (const auto& c : cols_) {
        if (c.binary && (c.lb < -1e-12 || c.ub > 1.0 + 1e-12))
            throw MipError("binary column '" + c.name + "' with non-unit bounds");
        if (std::isnan(c.lb) || std::isnan(c.ub) || std::isnan(c.obj))
            throw MipError("NaN in column '" + c.name + "'");
    }
    for (const auto& r : rows_)
        for (const auto& [v, c] : r.terms)
            if (std::isnan(c)) throw MipError("NaN in row '" + r.name + "'");
}

std::string MipModel::dump_lp() const {
    std::ostringstream os;
    os.precision(17);
    os << "\\ " << num_cols() << " columns, " << num_rows() << " rows\nMinimize\n obj:";
    bool any = false;
    for (int j = 0; j < num_cols(); ++j) {
        const auto& c = cols_[static_cast<std::size_t>(j)];
        if (c.obj == 0.0) continue;
        os << (c.obj >= 0 ? " + " : " - ") << std::fabs(c.obj) << " " << c.name;
        any = true;
    }
    if (!any) os << " 0";
    os << "\nSubject To\n";
    for (const auto& r : rows_) {
        os << " " << r.name << ":";
        for (const auto& [v, c] : r.terms)
            os << (c >= 0 ? " + " : " - ") << std::fabs(c) << " " << cols_[static_cast<std::size_t>(v)].name;
        switch (r.sense) {
            case RowSense::LE: os << " <= "; break;
            case RowSense::GE: os << " >= "; break;
            case RowSense::EQ: os << " = "; break;
        }
        os << r.rhs << "\n";
    }
    os << "Bounds\n";
    for (const auto& c : cols_) {
        if (c.lb <= -kInf && c.ub >= kInf)
            os << " " << c.name << " free\n";
        else if (c.lb <= -kInf)
            os << " -inf <= " << c.name << " <= " << c.ub << "\n";
        else if (c.ub >= kInf)
            os << " " << c.name << " >= " << c.lb << "\n";
        else
            os << " " << c.lb << " <= " << c.name << " <= " << c.ub << "\n";
    }
    bool any_bin = false;
    for (const auto& c : cols_) any_bin = any_bin || c.binary;
    if (any_bin) {
        os << "Binaries\n";
        for (const auto& c : cols_)
            if (c.binary) os << " " << c.name << "\n";
    }
    os << "End\n";
    return os.str();
}

namespace {

constexpr double kPivotTol = 1e-9;

enum class VarState : uint8_t { Basic, AtLower, AtUpper, FreeNB };

// Bounded-variable two-phase primal simplex with a dense explicit basis
// inverse. Columns are [structural | slack | artificial].
class Simplex {
public:
    Simplex(const MipModel& model, const Vec* lb_override, const Vec* ub_override,
            const SimplexOptions& opts)
        : model_(model), opts_(opts) {
        nc_ = model.num_cols();
        m_ = model.num_rows();
        total_ = nc_ + 2 * m_;

        lb_.assign(static_cast<std::size_t>(total_), 0.0);
        ub_.assign(static_cast<std::size_t>(total_), 0.0);
        for (int j = 0; j < nc_; ++j) {
            lb_[static_cast<std::size_t>(j)] = lb_override ? (*lb_override)[static_cast<std::size_t>(j)]
                                                           : model.col(j).lb;
            ub_[static_cast<std::size_t>(j)] = ub_override ? (*ub_override)[static_cast<std::size_t>(j)]
                                                           : model.col(j).ub;
            if (lb_[static_cast<std::size_t>(j)] > ub_[static_cast<std::size_t>(j)] + 1e-12)
                infeasible_by_bounds_ = true;
        }
        for (int i = 0; i < m_; ++i) {
            const std::size_t sj = static_cast<std::size_t>(nc_ + i);
            switch (model.row(i).sense) {
                case RowSense::LE: lb_[sj] = 0.0; ub_[sj] = kInf; break;
                case RowSense::GE: lb_[sj] = -kInf; ub_[sj] = 0.0; break;
                case RowSense::EQ: lb_[sj] = 0.0; ub_[sj] = 0.0; break;
            }
            const std::size_t aj = static_cast<std::size_t>(nc_ + m_ + i);
            lb_[aj] = 0.0;
            ub_[aj] = 0.0;  // opened only if the row starts infeasible
        }

        // Structural columns in sparse form.
        col_rows_.resize(static_cast<std::size_t>(nc_));
        for (int i = 0; i < m_; ++i)
            for (const auto& [v, c] : model.row(i).terms)
                col_rows_[static_cast<std::size_t>(v)].push_back({i, c});

        art_sign_.assign(static_cast<std::size_t>(m_), 1.0);
    }

    LpResult run() {
        LpResult res;
        if (infeasible_by_bounds_) {
            res.status = LpResult::Status::Infeasible;
            return res;
        }
        init_basis();

        if (need_phase1_) {
            phase_ = 1;
            const auto st = iterate();
            if (st != LpResult::Status::Optimal) {
                res.status = st == LpResult::Status::Unbounded ? LpResult::Status::Stalled : st;
                res.iterations = iterations_;
                return res;
            }
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i) {
                const int aj = nc_ + m_ + i;
                infeas += x_[static_cast<std::size_t>(aj)];
            }
            if (infeas > 1e-7) {
                res.status = LpResult::Status::Infeasible;
                res.iterations = iterations_;
                return res;
            }
            for (int i = 0; i < m_; ++i) ub_[static_cast<std::size_t>(nc_ + m_ + i)] = 0.0;
        }

        phase_ = 2;
        const auto st = iterate();
        res.status = st;
        res.iterations = iterations_;
        if (st != LpResult::Status::Optimal) return res;

        // Guard against accumulated update drift: re-derive the basic values
        // and verify the original rows before reporting success.
        refresh_basics();
        if (max_row_violation() > 1e-6) {
            res.status = LpResult::Status::Stalled;
            return res;
        }

        res.x.assign(static_cast<std::size_t>(nc_), 0.0);
        for (int j = 0; j < nc_; ++j) res.x[static_cast<std::size_t>(j)] = x_[static_cast<std::size_t>(j)];
        res.objective = 0.0;
        for (int j = 0; j < nc_; ++j) res.objective += model_.col(j).obj * res.x[static_cast<std::size_t>(j)];

        // Duals and reduced costs from the final basis.
        Vec y = btran_costs();
        res.dual = y;
        res.reduced_cost.assign(static_cast<std::size_t>(nc_), 0.0);
        for (int j = 0; j < nc_; ++j)
            res.reduced_cost[static_cast<std::size_t>(j)] =
                state_[static_cast<std::size_t>(j)] == VarState::Basic ? 0.0 : cost(j) - dot_col(y, j);
        return res;
    }

private:
    double cost(int j) const {
        if (phase_ == 1) return j >= nc_ + m_ ? 1.0 : 0.0;
        return j < nc_ ? model_.col(j).obj : 0.0;
    }

    // Sparse column entries of variable j as (row, coef) pairs.
    template <typename Fn>
    void for_col(int j, Fn&& fn) const {
        if (j < nc_) {
            for (const auto& [r, c] : col_rows_[static_cast<std::size_t>(j)]) fn(r, c);
        } else if (j < nc_ + m_) {
            fn(j - nc_, 1.0);
        } else {
            fn(j - nc_ - m_, art_sign_[static_cast<std::size_t>(j - nc_ - m_)]);
        }
    }

    double dot_col(const Vec& y, int j) const {
        double s = 0.0;
        for_col(j, [&](int r, double c) { s += y[static_cast<std::size_t>(r)] * c; });
        return s;
    }

    Vec btran_costs() const {
        // y = c_B' * Binv
        Vec y(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            const double cb = cost(basis_[static_cast<std::size_t>(i)]);
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) y[static_cast<std::size_t>(k)] += cb * row[k];
        }
        return y;
    }

    void init_basis() {
        x_.assign(static_cast<std::size_t>(total_), 0.0);
        state_.assign(static_cast<std::size_t>(total_), VarState::AtLower);
        for (int j = 0; j < total_; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (lb_[js] <= -kInf && ub_[js] >= kInf) {
                state_[js] = VarState::FreeNB;
                x_[js] = 0.0;
            } else if (lb_[js] <= -kInf) {
                state_[js] = VarState::AtUpper;
                x_[js] = ub_[js];
            } else {
                state_[js] = VarState::AtLower;
                x_[js] = lb_[js];
            }
        }

        Vec act(static_cast<std::size_t>(m_), 0.0);
        for (int j = 0; j < nc_; ++j) {
            const double xj = x_[static_cast<std::size_t>(j)];
            if (xj == 0.0) continue;
            for (const auto& [r, c] : col_rows_[static_cast<std::size_t>(j)])
                act[static_cast<std::size_t>(r)] += c * xj;
        }

        basis_.assign(static_cast<std::size_t>(m_), 0);
        binv_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0.0);
        need_phase1_ = false;
        for (int i = 0; i < m_; ++i) {
            const std::size_t is = static_cast<std::size_t>(i);
            const int sj = nc_ + i;
            const int aj = nc_ + m_ + i;
            const double s_val = model_.row(i).rhs - act[is];
            double diag = 1.0;
            if (s_val >= lb_[static_cast<std::size_t>(sj)] - opts_.feas_tol &&
                s_val <= ub_[static_cast<std::size_t>(sj)] + opts_.feas_tol) {
                basis_[is] = sj;
                state_[static_cast<std::size_t>(sj)] = VarState::Basic;
                x_[static_cast<std::size_t>(sj)] = s_val;
            } else {
                // Park the slack at its nearest bound and open an artificial.
                const double sb = s_val < lb_[static_cast<std::size_t>(sj)] ? lb_[static_cast<std::size_t>(sj)]
                                                                            : ub_[static_cast<std::size_t>(sj)];
                state_[static_cast<std::size_t>(sj)] = sb == lb_[static_cast<std::size_t>(sj)]
                                                           ? VarState::AtLower
                                                           : VarState::AtUpper;
                x_[static_cast<std::size_t>(sj)] = sb;
                const double resid = s_val - sb;
                art_sign_[is] = resid >= 0 ? 1.0 : -1.0;
                ub_[static_cast<std::size_t>(aj)] = kInf;
                basis_[is] = aj;
                state_[static_cast<std::size_t>(aj)] = VarState::Basic;
                x_[static_cast<std::size_t>(aj)] = std::fabs(resid);
                diag = art_sign_[is];  // basis column is sign * e_i
                need_phase1_ = true;
            }
            binv_[is * static_cast<std::size_t>(m_) + is] = diag;  // inverse of +-1 is itself
        }
    }

    LpResult::Status iterate() {
        const int pivot_limit =
            opts_.pivot_limit > 0 ? opts_.pivot_limit : 20000 + 200 * m_;
        int stall = 0;
        bool bland = false;
        double last_obj = current_obj();
        for (;;) {
            if (iterations_ >= pivot_limit) return LpResult::Status::Stalled;

            Vec y = btran_costs();
            int enter = -1;
            double best_score = 0.0;
            int dir = +1;
            for (int j = 0; j < total_; ++j) {
                const std::size_t js = static_cast<std::size_t>(j);
                if (state_[js] == VarState::Basic) continue;
                if (lb_[js] == ub_[js]) continue;  // fixed
                if (phase_ == 2 && j >= nc_ + m_) continue;  // artificials are done
                const double d = cost(j) - dot_col(y, j);
                int cand_dir = 0;
                double score = 0.0;
                if (state_[js] == VarState::AtLower && d < -opts_.opt_tol) {
                    cand_dir = +1;
                    score = -d;
                } else if (state_[js] == VarState::AtUpper && d > opts_.opt_tol) {
                    cand_dir = -1;
                    score = d;
                } else if (state_[js] == VarState::FreeNB && std::fabs(d) > opts_.opt_tol) {
                    cand_dir = d < 0 ? +1 : -1;
                    score = std::fabs(d);
                }
                if (cand_dir == 0) continue;
                if (bland) {
                    enter = j;
                    dir = cand_dir;
                    break;
                }
                if (score > best_score + 1e-15) {
                    best_score = score;
                    enter = j;
                    dir = cand_dir;
                }
            }
            if (enter < 0) return LpResult::Status::Optimal;

            // FTRAN: w = Binv * A_enter.
            Vec w(static_cast<std::size_t>(m_), 0.0);
            for_col(enter, [&](int r, double c) {
                const std::size_t rs = static_cast<std::size_t>(r);
                for (int i = 0; i < m_; ++i)
                    w[static_cast<std::size_t>(i)] +=
                        binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + rs] * c;
            });

            // Ratio test. Entering moves by dir * t, t >= 0; basics move by -w * dir * t.
            const std::size_t es = static_cast<std::size_t>(enter);
            double t_limit = kInf;
            if (lb_[es] > -kInf && ub_[es] < kInf) t_limit = ub_[es] - lb_[es];  // bound flip
            int leave_pos = -1;
            double t_best = t_limit;
            double best_pivot_mag = 0.0;
            for (int i = 0; i < m_; ++i) {
                const std::size_t is = static_cast<std::size_t>(i);
                const double coef = dir * w[is];
                if (std::fabs(coef) <= kPivotTol) continue;
                const int bj = basis_[is];
                const std::size_t bjs = static_cast<std::size_t>(bj);
                double t_i = kInf;
                if (coef > 0 && lb_[bjs] > -kInf)
                    t_i = (x_[bjs] - lb_[bjs]) / coef;
                else if (coef < 0 && ub_[bjs] < kInf)
                    t_i = (ub_[bjs] - x_[bjs]) / (-coef);
                if (t_i >= kInf) continue;
                t_i = std::max(t_i, 0.0);
                if (leave_pos < 0 || t_i < t_best - 1e-10) {
                    t_best = t_i;
                    leave_pos = i;
                    best_pivot_mag = std::fabs(w[is]);
                } else if (t_i < t_best + 1e-10 && std::fabs(w[is]) > best_pivot_mag + 1e-12) {
                    // Near-tie: take the larger pivot for stability; the
                    // ascending scan keeps ties deterministic.
                    t_best = std::min(t_best, t_i);
                    leave_pos = i;
                    best_pivot_mag = std::fabs(w[is]);
                }
            }

            if (leave_pos < 0 && t_limit >= kInf)
                return phase_ == 1 ? LpResult::Status::Stalled : LpResult::Status::Unbounded;

            ++iterations_;
            const double t = leave_pos >= 0 ? std::min(t_best, t_limit) : t_limit;
            const bool flip = leave_pos < 0 || t_limit <= t_best;

            // Apply the step.
            x_[es] += dir * t;
            if (t != 0.0)
                for (int i = 0; i < m_; ++i) {
                    const std::size_t bjs = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
                    x_[bjs] -= dir * t * w[static_cast<std::size_t>(i)];
                }

            if (flip) {
                state_[es] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
                x_[es] = dir > 0 ? ub_[es] : lb_[es];
            } else {
                const std::size_t ls = static_cast<std::size_t>(leave_pos);
                const int bj = basis_[ls];
                const std::size_t bjs = static_cast<std::size_t>(bj);
                const double coef = dir * w[ls];
                if (coef > 0) {
                    state_[bjs] = VarState::AtLower;
                    x_[bjs] = lb_[bjs];
                } else {
                    state_[bjs] = VarState::AtUpper;
                    x_[bjs] = ub_[bjs];
                }
                basis_[ls] = enter;
                state_[es] = VarState::Basic;
                update_binv(w, leave_pos);
            }

            // Anti-cycling: switch to Bland's rule during long degenerate runs.
            const double obj = current_obj();
            if (obj < last_obj - 1e-13) {
                stall = 0;
                bland = false;
            } else if (++stall > 600) {
                bland = true;
            }
            last_obj = obj;

            if (iterations_ % 1024 == 0) refresh_basics();
        }
    }

    double current_obj() const {
        double s = 0.0;
        for (int j = 0; j < total_; ++j) {
            const double c = cost(j);
            if (c != 0.0) s += c * x_[static_cast<std::size_t>(j)];
        }
        return s;
    }

    void update_binv(const Vec& w, int r) {
        const std::size_t rs = static_cast<std::size_t>(r);
        const double pivot = w[rs];
        double* prow = &binv_[rs * static_cast<std::size_t>(m_)];
        const double inv_p = 1.0 / pivot;
        for (int k = 0; k < m_; ++k) prow[k] *= inv_p;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = w[static_cast<std::size_t>(i)];
            if (f == 0.0) continue;
            double* irow = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
        }
    }

    // Max violation of the original constraint rows at the current point,
    // computed from the model data rather than the factorized basis.
    double max_row_violation() const {
        double worst = 0.0;
        Vec act(static_cast<std::size_t>(m_), 0.0);
        for (int j = 0; j < nc_; ++j) {
            const double xj = x_[static_cast<std::size_t>(j)];
            if (xj == 0.0) continue;
            for (const auto& [r, c] : col_rows_[static_cast<std::size_t>(j)])
                act[static_cast<std::size_t>(r)] += c * xj;
        }
        for (int i = 0; i < m_; ++i) {
            const double gap = act[static_cast<std::size_t>(i)] - model_.row(i).rhs;
            switch (model_.row(i).sense) {
                case RowSense::LE: worst = std::max(worst, gap); break;
                case RowSense::GE: worst = std::max(worst, -gap); break;
                case RowSense::EQ: worst = std::max(worst, std::fabs(gap)); break;
            }
        }
        for (int j = 0; j < nc_; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (lb_[js] > -kInf) worst = std::max(worst, lb_[js] - x_[js]);
            if (ub_[js] < kInf) worst = std::max(worst, x_[js] - ub_[js]);
        }
        return worst;
    }

    // Recompute basic values from the bound values of nonbasics; curbs drift
    // from the running x updates.
    void refresh_basics() {
        Vec rhs(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) rhs[static_cast<std::size_t>(i)] = model_.row(i).rhs;
        for (int j = 0; j < total_; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (state_[js] == VarState::Basic) continue;
            const double xj = x_[js];
            if (xj == 0.0) continue;
            for_col(j, [&](int r, double c) { rhs[static_cast<std::size_t>(r)] -= c * xj; });
        }
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) s += row[k] * rhs[static_cast<std::size_t>(k)];
            x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = s;
        }
    }

    const MipModel& model_;
    SimplexOptions opts_;
    int nc_ = 0, m_ = 0, total_ = 0;
    bool infeasible_by_bounds_ = false;
    std::vector<std::vector<std::pair<int, double>>> col_rows_;
    Vec lb_, ub_, x_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    Vec binv_;  // dense m x m, row-major
    Vec art_sign_;
    bool need_phase1_ = false;
    int phase_ = 1;
    long iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const MipModel& model, const Vec* lb_override, const Vec* ub_override,
                  const SimplexOptions& opts) {
    model.validate();
    Simplex s(model, lb_override, ub_override, opts);
    return s.run();
}

namespace {

struct BnbNode {
    double bound = 0.0;
    long seq = 0;
    Vec lb, ub;
};

struct NodeOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        return a.seq > b.seq;
    }
};

// Implication lists from two-variable binary precedence rows (x_b <= x_a).
struct Implications {
    std::vector<std::vector<int>> up;    // fixing j to 1 forces these to 1
    std::vector<std::vector<int>> down;  // fixing j to 0 forces these to 0

    static Implications build(const MipModel& model) {
        Implications imp;
        imp.up.resize(static_cast<std::size_t>(model.num_cols()));
        imp.down.resize(static_cast<std::size_t>(model.num_cols()));
        for (int i = 0; i < model.num_rows(); ++i) {
            const auto& r = model.row(i);
            if (r.terms.size() != 2 || r.rhs != 0.0 || r.sense == RowSense::EQ) continue;
            const auto [v1, c1] = r.terms[0];
            const auto [v2, c2] = r.terms[1];
            if (!model.col(v1).binary || !model.col(v2).binary) continue;
            int hi = -1, lo = -1;
            if (r.sense == RowSense::GE && c1 == 1.0 && c2 == -1.0) {
                hi = v1; lo = v2;  // v1 - v2 >= 0
            } else if (r.sense == RowSense::GE && c1 == -1.0 && c2 == 1.0) {
                hi = v2; lo = v1;
            } else if (r.sense == RowSense::LE && c1 == 1.0 && c2 == -1.0) {
                hi = v2; lo = v1;  // v1 <= v2
            } else if (r.sense == RowSense::LE && c1 == -1.0 && c2 == 1.0) {
                hi = v1; lo = v2;
            }
            if (hi >= 0) {
                imp.up[static_cast<std::size_t>(lo)].push_back(hi);
                imp.down[static_cast<std::size_t>(hi)].push_back(lo);
            }
        }
        return imp;
    }

    // Returns false on a contradiction (a variable forced both ways).
    bool fix(int j, int value, Vec& lb, Vec& ub) const {
        std::vector<int> stack{j};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            const std::size_t vs = static_cast<std::size_t>(v);
            if (value == 1) {
                if (ub[vs] < 0.5) return false;
                if (lb[vs] > 0.5) continue;
                lb[vs] = 1.0;
                for (int nxt : up[vs]) stack.push_back(nxt);
            } else {
                if (lb[vs] > 0.5) return false;
                if (ub[vs] < 0.5) continue;
                ub[vs] = 0.0;
                for (int nxt : down[vs]) stack.push_back(nxt);
            }
        }
        return true;
    }
};

}  // namespace

MipSolution solve_mip(const MipModel& model, const MipOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    model.validate();
    if (opts.gap_limit < 0) throw MipError("gap limit must be non-negative");

    MipSolution sol;
    std::vector<int> bin_cols;
    for (int j = 0; j < model.num_cols(); ++j)
        if (model.col(j).binary) bin_cols.push_back(j);

    const Implications imp = Implications::build(model);

    Vec lb0(static_cast<std::size_t>(model.num_cols()));
    Vec ub0(static_cast<std::size_t>(model.num_cols()));
    for (int j = 0; j < model.num_cols(); ++j) {
        lb0[static_cast<std::size_t>(j)] = model.col(j).lb;
        ub0[static_cast<std::size_t>(j)] = model.col(j).ub;
    }

    double incumbent = std::numeric_limits<double>::infinity();
    Vec best_x;
    long nodes = 0, lp_iters = 0, seq = 0;

    auto integral = [&](const Vec& x) {
        for (int j : bin_cols) {
            const double v = x[static_cast<std::size_t>(j)];
            if (std::fabs(v - std::round(v)) > 1e-6) return false;
        }
        return true;
    };

    std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
    open.push({-std::numeric_limits<double>::infinity(), seq++, lb0, ub0});
    bool root_done = false;
    bool any_lp_ran = false;

    const double int_round_tol = 1e-6;
    auto finish = [&](MipSolution::Status st, double best_bound) {
        sol.status = st;
        sol.nodes = nodes;
        sol.lp_iterations = lp_iters;
        sol.best_bound = best_bound;
        if (std::isfinite(incumbent)) {
            sol.objective = incumbent;
            sol.x = best_x;
            // Snap binaries exactly.
            for (int j : bin_cols)
                sol.x[static_cast<std::size_t>(j)] = std::round(sol.x[static_cast<std::size_t>(j)]);
            sol.gap = std::fabs(incumbent - best_bound) / std::max(std::fabs(incumbent), 1e-10);
            if (st == MipSolution::Status::Optimal) sol.gap = 0.0;
        }
        sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return sol;
    };

    while (!open.empty()) {
        const double best_open_bound = open.top().bound;
        if (std::isfinite(incumbent)) {
            if (best_open_bound >= incumbent - 1e-12)
                return finish(MipSolution::Status::Optimal, incumbent);
            const double gap =
                std::fabs(incumbent - std::max(best_open_bound, -1e300)) / std::max(std::fabs(incumbent), 1e-10);
            if (best_open_bound > -std::numeric_limits<double>::infinity() && gap <= opts.gap_limit && root_done)
                return finish(MipSolution::Status::GapLimit, best_open_bound);
        }
        if (nodes >= opts.node_limit)
            return finish(MipSolution::Status::IterationLimit,
                          std::min(best_open_bound, incumbent));

        BnbNode node = open.top();
        open.pop();
        ++nodes;

        LpResult lp = solve_lp(model, &node.lb, &node.ub, opts.lp);
        lp_iters += lp.iterations;
        any_lp_ran = true;
        if (lp.status == LpResult::Status::Stalled) throw MipError("simplex stalled at pivot limit");
        if (lp.status == LpResult::Status::Unbounded) throw MipError("relaxation is unbounded");
        if (lp.status == LpResult::Status::Infeasible) continue;

        const double bound = std::max(lp.objective, node.bound);
        if (std::isfinite(incumbent) && bound >= incumbent - 1e-12) continue;

        if (integral(lp.x)) {
            if (lp.objective < incumbent - 1e-12) {
                incumbent = lp.objective;
                best_x = lp.x;
            }
            continue;
        }

        // Root dive: round the relaxation and repair implications for an
        // early incumbent; keeps the best-first tree small.
        if (!root_done) {
            root_done = true;
            Vec dl = node.lb, du = node.ub;
            bool ok = true;
            for (int j : bin_cols) {
                const double v = lp.x[static_cast<std::size_t>(j)];
                if (dl[static_cast<std::size_t>(j)] > 0.5 || du[static_cast<std::size_t>(j)] < 0.5) continue;
                ok = imp.fix(j, v >= 0.5 ? 1 : 0, dl, du) && ok;
                if (!ok) break;
            }
            if (ok) {
                LpResult dive = solve_lp(model, &dl, &du, opts.lp);
                lp_iters += dive.iterations;
                if (dive.status == LpResult::Status::Optimal && integral(dive.x) &&
                    dive.objective < incumbent - 1e-12) {
                    incumbent = dive.objective;
                    best_x = dive.x;
                }
            }
        }

        // Branch on the binary closest to one half; ties break on the lowest
        // column index for determinism.
        int frac_col = -1;
        double frac_score = 2.0;
        for (int j : bin_cols) {
            const double v = lp.x[static_cast<std::size_t>(j)];
            const double f = std::fabs(v - std::round(v));
            if (f <= int_round_tol) continue;
            const double score = std::fabs(v - 0.5);
            if (score < frac_score - 1e-15) {
                frac_score = score;
                frac_col = j;
            }
        }
        if (frac_col < 0) continue;  // defensive: integral after all

        for (int branch_val : {0, 1}) {
            BnbNode child;
            child.bound = bound;
            child.seq = seq++;
            child.lb = node.lb;
            child.ub = node.ub;
            if (!imp.fix(frac_col, branch_val, child.lb, child.ub)) continue;
            open.push(std::move(child));
        }
    }

    if (!std::isfinite(incumbent)) {
        (void)any_lp_ran;
        return finish(MipSolution::Status::Infeasible, 0.0);
    }
    return finish(MipSolution::Status::Optimal, incumbent);
}

int add_epigraph_quadratic(MipModel& model, int var, int segments) {
    return add_secant_epigraph(model, var, segments, 1.0);
}

int add_secant_epigraph(MipModel& model, int var, int segments, double obj_coef) {
    if (segments < 2) throw MipError("need at least two secant segments");
    const std::string name = model.col(var).name;
    const double lo = model.col(var).lb, hi = model.col(var).ub;
    if (lo <= -kInf || hi >= kInf)
        throw MipError("secant epigraph needs finite bounds on '" + name + "'");
    const int e = model.add_col(name + "_sq", 0.0, std::max(lo * lo, hi * hi), obj_coef);
    if (hi <= lo) {
        // Degenerate fixed variable: epigraph pinned by a single chord.
        LinExpr ex;
        ex.add(e, 1.0).add(var, -2.0 * lo);
        model.add_row(name + "_sq_fix", ex, RowSense::GE, -lo * lo);
        return e;
    }
    for (int s = 0; s < segments; ++s) {
        const double x0 = lo + (hi - lo) * s / segments;
        const double x1 = lo + (hi - lo) * (s + 1) / segments;
        // Chord through (x0, x0^2) and (x1, x1^2): y = (x0 + x1) x - x0 x1.
        LinExpr ex;
        ex.add(e, 1.0).add(var, -(x0 + x1));
        model.add_row(name + "_sq_" + std::to_string(s), ex, RowSense::GE, -x0 * x1);
    }
    return e;
}

}  // namespace vpo
