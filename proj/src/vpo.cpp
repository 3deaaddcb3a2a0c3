#include "vpo/vpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace vpo {

namespace {


double start_objective(const Feeder& feeder, const Vec& qg_cum, const Vec& v) {
    double f = 0.0;
    for (double q : qg_cum) f += q * q;
    for (int i = 0; i < feeder.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        f += feeder.alpha[k] *
             (std::max(0.0, feeder.v_lo[k] - v[k]) + std::max(0.0, v[k] - feeder.v_hi[k]));
    }
    return f;
}

int log_level() {
    const char* env = std::getenv("VPO_LOG");
    return env ? std::atoi(env) : 0;
}

}  // namespace

VpoModel assemble_vpo_model(const Feeder& feeder, const DistFlowMatrices& m,
                            const HCertificate& cert, const TaylorData& taylor,
                            const EnvelopeBounds& env, const OperatingPoint& base_op,
                            const Vec& q_load, const VpoOptions& opts) {
    if (!cert.pass) throw VpoError("H certificate failed; the inner approximation is not valid");
    const int n = feeder.n;
    if (static_cast<int>(taylor.branch.size()) != n || static_cast<int>(env.branch.size()) != n)
        throw VpoError("envelope data does not match feeder size");

    VpoModel vmod;
    MipModel& mod = vmod.model;

    // DER dispatch variables (absolute, cumulative across refinement steps)
    // with their secant objective epigraphs.
    vmod.yg.resize(feeder.ders.size());
    vmod.yg_sq.resize(feeder.ders.size());
    for (std::size_t d = 0; d < feeder.ders.size(); ++d) {
        const auto& der = feeder.ders[d];
        vmod.yg[d] = mod.add_col("qg_n" + std::to_string(feeder.id_of(der.node)), der.q_min, der.q_max);
        vmod.yg_sq[d] = add_epigraph_quadratic(mod, vmod.yg[d], opts.pwl_segments);
    }

    vmod.vp.resize(static_cast<std::size_t>(n));
    vmod.vm.resize(static_cast<std::size_t>(n));
    vmod.svp.resize(static_cast<std::size_t>(n));
    vmod.svm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const std::string id = std::to_string(feeder.id_of(i + 1));
        vmod.vp[k] = mod.add_col("vp_n" + id, -kInf, feeder.v_max[k]);
        vmod.vm[k] = mod.add_col("vm_n" + id, feeder.v_min[k], kInf);
        vmod.svp[k] = mod.add_col("svp_n" + id, 0.0, kInf, feeder.alpha[k]);
        vmod.svm[k] = mod.add_col("svm_n" + id, 0.0, kInf, feeder.alpha[k]);
    }

    vmod.lmin.resize(static_cast<std::size_t>(n));
    vmod.tmax.resize(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
        const std::size_t k = static_cast<std::size_t>(b);
        vmod.lmin[k] = mod.add_col("lmin_b" + std::to_string(b), -kInf, kInf);
        const double tmax_lb = opts.quad_mode == QuadMode::Constant ? env.branch[k].quad_bound : 0.0;
        vmod.tmax[k] = mod.add_col("tmax_b" + std::to_string(b), tmax_lb, kInf);
    }

    // Device encodings. Capacitor pieces ride on the upper voltage copy; tap
    // products are duplicated per copy so both envelopes shift together.
    for (const auto& o : feeder.oltcs) {
        const int child = o.branch + 1;
        const int up = feeder.parent[static_cast<std::size_t>(child)];
        std::vector<int> v_up_vars;
        double v_up_const = feeder.v0;
        double v_bar = feeder.v0;
        if (up != 0) {
            v_up_vars = {vmod.vp[static_cast<std::size_t>(up - 1)], vmod.vm[static_cast<std::size_t>(up - 1)]};
            v_bar = feeder.v_max[static_cast<std::size_t>(up - 1)];
        }
        vmod.oltc_enc.push_back(
            encode_oltc(mod, o, v_up_vars, v_up_const, v_bar, "oltc_b" + std::to_string(o.branch)));
    }
    if (opts.use_caps) {
        for (const auto& c : feeder.caps) {
            const std::size_t k = static_cast<std::size_t>(c.node - 1);
            vmod.cap_enc.push_back(encode_cap(mod, c, vmod.vp[k], feeder.v_max[k],
                                              "cap_n" + std::to_string(feeder.id_of(c.node))));
        }
    }

    // Injection deviations relative to the base point, nonzero only at device
    // nodes: dq_j = (-QL_j + yg_j + Qcp_j) - qbase_j.
    std::vector<LinExpr> dq(static_cast<std::size_t>(n));
    std::vector<bool> dq_used(static_cast<std::size_t>(n), false);
    for (std::size_t d = 0; d < feeder.ders.size(); ++d) {
        const std::size_t k = static_cast<std::size_t>(feeder.ders[d].node - 1);
        dq[k].add(vmod.yg[d], 1.0);
        dq_used[k] = true;
    }
    for (const auto& enc : vmod.cap_enc) {
        const std::size_t k = static_cast<std::size_t>(enc.node - 1);
        dq[k].add_scaled(enc.q_cp, 1.0);
        dq_used[k] = true;
    }
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        if (!dq_used[k]) continue;
        dq[k].add_const(-q_load[k] - base_op.q[k]);
    }

    auto oltc_boost = [&](std::size_t oi, int copy) -> const LinExpr& {
        const auto& enc = vmod.oltc_enc[oi];
        return enc.boost.size() > 1 ? enc.boost[static_cast<std::size_t>(copy)] : enc.boost[0];
    };

    // Branch-flow deviation (C dq)_b for each branch.
    std::vector<LinExpr> c_dq(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
        for (int j = 0; j < n; ++j) {
            if (!dq_used[static_cast<std::size_t>(j)]) continue;
            const double coef = m.C(static_cast<std::size_t>(b), static_cast<std::size_t>(j));
            if (coef != 0.0) c_dq[static_cast<std::size_t>(b)].add_scaled(dq[static_cast<std::size_t>(j)], coef);
        }
    }

    const Vec mp_p = m.M_p * base_op.p;
    const Vec mq_qbase = m.M_q * base_op.q;
    const Vec h_l0 = m.H * base_op.l;

    // Current underbound: lmin_b = l0 + Jq (C dq)_b + Jv (vp_child - vbase).
    for (int b = 0; b < n; ++b) {
        const std::size_t k = static_cast<std::size_t>(b);
        const auto& t = taylor.branch[k];
        LinExpr row;
        row.add(vmod.lmin[k], 1.0);
        row.add_scaled(c_dq[k], -t.jac[1]);
        row.add(vmod.vp[k], -t.jac[2]);
        mod.add_row("lmin_b" + std::to_string(b), row, RowSense::EQ, t.l0 - t.jac[2] * t.v0);
    }

    // Overbound epigraph: tmax >= +-2 (Jq (C dq) + Jv (vp_child - vbase)), and
    // in Pwl mode tmax also dominates the eigen-split quadratic estimate. The
    // upper voltage copy carries the deviation so the base point maps to
    // d = 0 exactly and tmax collapses onto the quadratic bound there.
    for (int b = 0; b < n; ++b) {
        const std::size_t k = static_cast<std::size_t>(b);
        const auto& t = taylor.branch[k];
        LinExpr lin;
        lin.add_scaled(c_dq[k], t.jac[1]);
        lin.add(vmod.vp[k], t.jac[2]);
        lin.add_const(-t.jac[2] * t.v0);
        LinExpr pos;
        pos.add(vmod.tmax[k], 1.0).add_scaled(lin, -2.0);
        mod.add_row("tmax_pos_b" + std::to_string(b), pos, RowSense::GE, 0.0);
        LinExpr neg;
        neg.add(vmod.tmax[k], 1.0).add_scaled(lin, 2.0);
        mod.add_row("tmax_neg_b" + std::to_string(b), neg, RowSense::GE, 0.0);

        if (opts.quad_mode == QuadMode::Pwl) {
            const auto& e = env.branch[k];
            LinExpr quad;
            for (int dir = 0; dir < 3; ++dir) {
                const double lambda = e.eigenvalues[static_cast<std::size_t>(dir)];
                if (lambda <= 1e-14) continue;
                // w = eigvec . (dP=0, dQ, dv); range from the box.
                const double ev_q = e.eigenvectors[1][static_cast<std::size_t>(dir)];
                const double ev_v = e.eigenvectors[2][static_cast<std::size_t>(dir)];
                const double ev_p = e.eigenvectors[0][static_cast<std::size_t>(dir)];
                Interval range{0.0, 0.0};
                for (int c = 0; c < 3; ++c) {
                    const double evc = e.eigenvectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(dir)];
                    const Interval& bi = e.box[static_cast<std::size_t>(c)];
                    const double a = evc * bi.lo, bvl = evc * bi.hi;
                    range.lo += std::min(a, bvl);
                    range.hi += std::max(a, bvl);
                }
                (void)ev_p;
                const std::string wname = "w_b" + std::to_string(b) + "_d" + std::to_string(dir);
                const int w = mod.add_col(wname, range.lo - 1e-9, range.hi + 1e-9);
                LinExpr tie;
                tie.add(w, 1.0);
                tie.add_scaled(c_dq[k], -ev_q);
                tie.add(vmod.vp[k], -ev_v);
                mod.add_row(wname + "_def", tie, RowSense::EQ, -ev_v * t.v0);
                const int wsq = add_secant_epigraph(mod, w, opts.quad_segments, 0.0);
                quad.add(wsq, lambda);
            }
            LinExpr dom;
            dom.add(vmod.tmax[k], 1.0).add_scaled(quad, -1.0);
            mod.add_row("tmax_quad_b" + std::to_string(b), dom, RowSense::GE, 0.0);
        }
    }

    // Voltage copies: the branch-flow voltage relation with l replaced by the
    // underbound (upper copy) and the overbound (lower copy), plus tap boosts.
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double const0 = feeder.v0 + mp_p[k] + mq_qbase[k];

        LinExpr up;
        up.add(vmod.vp[k], 1.0);
        LinExpr dn;
        dn.add(vmod.vm[k], 1.0);
        for (int j = 0; j < n; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (dq_used[js]) {
                const double mq = m.M_q(k, js);
                if (mq != 0.0) {
                    up.add_scaled(dq[js], -mq);
                    dn.add_scaled(dq[js], -mq);
                }
            }
            const double h = m.H(k, js);
            if (h != 0.0) {
                up.add(vmod.lmin[js], h);
                dn.add(vmod.tmax[js], h);
            }
        }
        for (std::size_t oi = 0; oi < vmod.oltc_enc.size(); ++oi) {
            const std::size_t ob = static_cast<std::size_t>(vmod.oltc_enc[oi].branch);
            const double coef = m.C(ob, k);
            if (coef == 0.0) continue;
            up.add_scaled(oltc_boost(oi, 0), -coef);
            dn.add_scaled(oltc_boost(oi, 1), -coef);
        }
        const std::string id = std::to_string(feeder.id_of(i + 1));
        mod.add_row("vup_n" + id, up, RowSense::EQ, const0);
        mod.add_row("vdn_n" + id, dn, RowSense::EQ, const0 - h_l0[k]);

        // Tight positioning bounds with penalized slacks.
        LinExpr lo;
        lo.add(vmod.vm[k], 1.0).add(vmod.svm[k], 1.0);
        mod.add_row("tight_lo_n" + id, lo, RowSense::GE, feeder.v_lo[k]);
        LinExpr hi;
        hi.add(vmod.vp[k], 1.0).add(vmod.svp[k], -1.0);
        mod.add_row("tight_hi_n" + id, hi, RowSense::LE, feeder.v_hi[k]);
    }

    vmod.rows = mod.num_rows();
    vmod.cols = mod.num_cols();
    vmod.binaries = mod.num_binaries();
    return vmod;
}

namespace {

struct StepOutcome {
    MipSolution sol;
    Vec yg;
    std::vector<int> taps;
    std::vector<int> units;
    Vec vplus, vminus;
    double slack_total = 0.0;
};

StepOutcome solve_step(const Feeder& feeder, const VpoModel& vmod, const VpoOptions& opts) {
    MipOptions mo;
    mo.gap_limit = opts.gap_limit;
    mo.node_limit = opts.node_limit;
    StepOutcome out;
    out.sol = solve_mip(vmod.model, mo);
    if (out.sol.status == MipSolution::Status::Infeasible)
        throw VpoError("inner problem infeasible; the base point should always remain feasible");
    if (out.sol.status == MipSolution::Status::IterationLimit)
        throw VpoError("inner problem hit the node limit before reaching the gap target");
    const Vec& x = out.sol.x;
    out.yg.resize(vmod.yg.size());
    for (std::size_t d = 0; d < vmod.yg.size(); ++d) out.yg[d] = x[static_cast<std::size_t>(vmod.yg[d])];
    for (const auto& enc : vmod.oltc_enc) out.taps.push_back(enc.recover_tap(x));
    if (opts.use_caps)
        for (const auto& enc : vmod.cap_enc) out.units.push_back(enc.recover_units(x));
    else
        out.units.assign(feeder.caps.size(), 0);
    out.vplus.resize(vmod.vp.size());
    out.vminus.resize(vmod.vm.size());
    for (std::size_t k = 0; k < vmod.vp.size(); ++k) {
        out.vplus[k] = x[static_cast<std::size_t>(vmod.vp[k])];
        out.vminus[k] = x[static_cast<std::size_t>(vmod.vm[k])];
    }
    for (std::size_t k = 0; k < vmod.svp.size(); ++k)
        out.slack_total += x[static_cast<std::size_t>(vmod.svp[k])] + x[static_cast<std::size_t>(vmod.svm[k])];
    return out;
}

}  // namespace

VpoRun run_refinement(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                      const VpoOptions& opts) {
    if (!(opts.epsilon > 0)) throw VpoError("epsilon must be positive");
    const DistFlowMatrices m = build_matrices(feeder);
    const HCertificate cert = certify_h_nonneg(m);

    Vec p(p_load.size()), q_unc(q_load.size());
    for (std::size_t i = 0; i < p_load.size(); ++i) p[i] = -p_load[i];
    for (std::size_t i = 0; i < q_load.size(); ++i) q_unc[i] = -q_load[i];

    VpoRun run;
    DeviceSetting setting = DeviceSetting::neutral(feeder);
    if (!opts.use_caps) setting.cap_units.assign(feeder.caps.size(), 0);
    Vec qg_cum(feeder.ders.size(), 0.0);

    OperatingPoint op = solve_loadflow(feeder, p, q_unc, setting, opts.lf_tol, opts.lf_max_iter);
    run.op0 = op;
    run.f0 = start_objective(feeder, qg_cum, op.V);
    double f_prev = run.f0;

    for (int k = 1; k <= opts.max_iters; ++k) {
        const TaylorData taylor = taylor_at(op);
        const DeltaBox box = delta_box(feeder, m, op, setting);
        const EnvelopeBounds env = build_envelopes(taylor, box);
        const VpoModel vmod = assemble_vpo_model(feeder, m, cert, taylor, env, op, q_load, opts);
        StepOutcome out = solve_step(feeder, vmod, opts);

        Iterate it;
        it.k = k;
        it.objective = out.sol.objective;
        it.qg_step.resize(qg_cum.size());
        for (std::size_t d = 0; d < qg_cum.size(); ++d) {
            it.qg_step[d] = out.yg[d] - qg_cum[d];
            qg_cum[d] = out.yg[d];
        }
        it.qg_cum = qg_cum;
        it.taps = out.taps;
        it.cap_units = out.units;
        it.mip_gap = out.sol.gap;
        it.nodes = out.sol.nodes;
        it.solve_ms = out.sol.wall_ms;
        it.vplus = out.vplus;
        it.vminus = out.vminus;
        it.slack_total = out.slack_total;

        setting.q_g = qg_cum;
        setting.taps = out.taps;
        setting.cap_units = out.units;
        op = solve_loadflow(feeder, p, q_unc, setting, opts.lf_tol, opts.lf_max_iter);
        it.op = op;
        it.feas = feasibility_report(feeder, op);
        for (std::size_t c = 0; c < feeder.caps.size(); ++c)
            it.cap_q_realized += op.V[static_cast<std::size_t>(feeder.caps[c].node - 1)] *
                                 feeder.caps[c].admittance_of(out.units[c]);
        it.error = std::fabs(it.objective - f_prev);
        f_prev = it.objective;
        run.all_hard_feasible = run.all_hard_feasible && it.feas.hard_feasible;
        if (it.k >= 2 && !run.iterates.empty() &&
            it.objective > run.iterates.back().objective + 1e-9)
            run.monotone = false;

        if (log_level() >= 1)
            std::fprintf(stderr, "[vpo] k=%d f=%.9g err=%.3g tap=%s nodes=%ld\n", k, it.objective,
                         it.error, it.taps.empty() ? "-" : std::to_string(it.taps[0]).c_str(),
                         it.nodes);

        run.iterates.push_back(std::move(it));
        if (run.iterates.back().error < opts.epsilon) {
            run.converged = true;
            break;
        }
    }

    if (!run.iterates.empty()) {
        const Iterate& last = run.iterates.back();
        run.qg_final = last.qg_cum;
        run.taps_final = last.taps;
        run.caps_final = last.cap_units;
        run.cap_q_final = last.cap_q_realized;
    }
    return run;
}

ScheduleResult schedule_horizon(const Feeder& feeder, const LoadProfile& profile,
                                const VpoOptions& opts) {
    ScheduleResult res;
    for (int t = 0; t < profile.horizon; ++t) {
        PeriodSummary ps;
        ps.period = t;
        try {
            const VpoRun run = run_refinement(feeder, profile.p_load[static_cast<std::size_t>(t)],
                                              profile.q_load[static_cast<std::size_t>(t)], opts);
            ps.ok = true;
            const Iterate& last = run.iterates.back();
            ps.objective = last.objective;
            for (double qg : run.qg_final) ps.qg_abs_total += std::fabs(qg);
            ps.slack_total = last.slack_total;
            ps.taps = run.taps_final;
            ps.cap_units = run.caps_final;
            for (std::size_t c = 0; c < feeder.caps.size(); ++c)
                ps.cap_q_nominal += feeder.caps[c].admittance_of(run.caps_final[c]);
            for (double ql : profile.q_load[static_cast<std::size_t>(t)]) ps.load_q_total += ql;
            ps.iterations = static_cast<int>(run.iterates.size());
            ps.monotone = run.monotone;
            ps.hard_feasible = run.all_hard_feasible;
        } catch (const std::exception& e) {
            ps.ok = false;
            ps.error = e.what();
            res.all_ok = false;
        }
        res.periods.push_back(std::move(ps));
    }
    return res;
}

std::vector<SweepPoint> sweep_alpha(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                    const Vec& alphas, const VpoOptions& opts) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0)) throw VpoError("alphas must be positive");
        if (i > 0 && alphas[i] < alphas[i - 1]) throw VpoError("alphas must be sorted ascending");
    }
    std::vector<SweepPoint> out;
    for (double a : alphas) {
        const Feeder fa = feeder.with_uniform_alpha(a);
        const VpoRun run = run_refinement(fa, p_load, q_load, opts);
        SweepPoint pt;
        pt.alpha = a;
        pt.objective = run.iterates.back().objective;
        pt.slack_total = run.iterates.back().slack_total;
        for (double qg : run.qg_final) pt.qg_abs_total += std::fabs(qg);
        out.push_back(pt);
    }
    return out;
}

std::vector<ScalePoint> scale_study(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                    const std::vector<int>& cap_counts, const VpoOptions& opts) {
    std::vector<ScalePoint> out;
    for (int count : cap_counts) {
        if (count < 0 || count > static_cast<int>(feeder.caps.size()))
            throw VpoError("cap count outside the available sites");
        const Feeder f = feeder.with_cap_count(count);
        const DistFlowMatrices m = build_matrices(f);
        const HCertificate cert = certify_h_nonneg(m);

        Vec p(p_load.size()), q_unc(q_load.size());
        for (std::size_t i = 0; i < p_load.size(); ++i) p[i] = -p_load[i];
        for (std::size_t i = 0; i < q_load.size(); ++i) q_unc[i] = -q_load[i];
        const DeviceSetting setting = DeviceSetting::neutral(f);
        const OperatingPoint op = solve_loadflow(f, p, q_unc, setting, opts.lf_tol, opts.lf_max_iter);
        const TaylorData taylor = taylor_at(op);
        const DeltaBox box = delta_box(f, m, op, setting);
        const EnvelopeBounds env = build_envelopes(taylor, box);
        const VpoModel vmod = assemble_vpo_model(f, m, cert, taylor, env, op, q_load, opts);
        MipOptions mo;
        mo.gap_limit = opts.gap_limit;
        mo.node_limit = opts.node_limit;
        const MipSolution sol = solve_mip(vmod.model, mo);
        ScalePoint pt;
        pt.cap_count = count;
        pt.wall_ms = sol.wall_ms;
        pt.nodes = sol.nodes;
        pt.lp_iterations = sol.lp_iterations;
        pt.rows = vmod.rows;
        pt.cols = vmod.cols;
        pt.binaries = vmod.binaries;
        pt.objective = sol.objective;
        out.push_back(pt);
    }
    return out;
}

}  // namespace vpo
