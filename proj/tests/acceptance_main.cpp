// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "vpo/devices.hpp"
#include "vpo/verify.hpp"
#include "vpo/vpo.hpp"

using namespace vpo;

namespace {

const std::string kFixtures = FIXTURE_DIR;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::pair<Vec, Vec> loads_at(const Feeder& f, const std::string& csv, int period) {
    const LoadProfile prof = parse_profile_file(kFixtures + csv, f);
    return {prof.p_load[static_cast<std::size_t>(period)],
            prof.q_load[static_cast<std::size_t>(period)]};
}

// ---------------------------------------------------------------------------
// 1. Non-negativity certificate on the shipped feeders and random trees.
void criterion1() {
    const double t0 = now_ms();
    bool ok = true;
    double worst_hmin = 0.0;
    for (const char* name : {"/ieee13.json", "/ieee37.json"}) {
        const HCertificate cert = certify_h_nonneg(build_matrices(parse_feeder_file(kFixtures + name)));
        ok = ok && cert.pass && cert.h_min >= -1e-12;
        worst_hmin = std::min(worst_hmin, cert.h_min);
    }
    Rng rng(20240817);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + rng.uniform_int(0, 38);
        const Feeder f = random_inductive_tree(n, rng);
        const HCertificate cert = certify_h_nonneg(build_matrices(f));
        ok = ok && cert.pass && cert.h_min >= -1e-12;
        worst_hmin = std::min(worst_hmin, cert.h_min);
    }
    const double ms = now_ms() - t0;
    ok = ok && ms < 5000.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "min(H) >= -1e-12 on 102 feeders, worst %.3g, %.0f ms", worst_hmin, ms);
    report(1, ok, "operator-matrix non-negativity certificate", buf);
}

// ---------------------------------------------------------------------------
// 2. Load-flow oracle satisfies the nonlinear and linear relations.
void criterion2() {
    bool ok = true;
    double worst_current = 0.0, worst_voltage = 0.0, worst_ms = 0.0;
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"/onebranch.json", "/onebranch.csv"},
        {"/threenode.json", "/threenode.csv"},
        {"/oltc_toy.json", "/oltc_toy.csv"},
        {"/ieee13.json", "/ieee13_day.csv"},
        {"/ieee37.json", "/ieee37_day.csv"},
    };
    for (const auto& [fx, csv] : cases) {
        const Feeder f = parse_feeder_file(kFixtures + fx);
        const DistFlowMatrices m = build_matrices(f);
        const LoadProfile prof = parse_profile_file(kFixtures + csv, f);
        for (int t : {0, prof.horizon / 2, prof.horizon - 1}) {
            Vec p(prof.p_load[static_cast<std::size_t>(t)]);
            Vec q(prof.q_load[static_cast<std::size_t>(t)]);
            for (auto& v : p) v = -v;
            for (auto& v : q) v = -v;
            const double t0 = now_ms();
            const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
            const double ms = now_ms() - t0;
            const ResidualReport rep = residuals(m, op);
            worst_current = std::max(worst_current, rep.current);
            worst_voltage = std::max(worst_voltage, rep.voltage);
            worst_ms = std::max(worst_ms, ms);
            ok = ok && rep.current <= 1e-8 && rep.voltage <= 1e-8 && ms < 1000.0;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "current res %.2g, voltage res %.2g, slowest %.1f ms",
                  worst_current, worst_voltage, worst_ms);
    report(2, ok, "load-flow oracle residuals on all fixtures", buf);
}

// ---------------------------------------------------------------------------
// 3. Envelope sandwich over 1000 seeded device settings.
void criterion3() {
    const double t0 = now_ms();
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    auto [pl, ql] = loads_at(f, "/ieee13_day.csv", 18);
    const SandwichReport rep = check_sandwich(f, pl, ql, 1000, 7);
    const double ms = now_ms() - t0;
    const bool ok = rep.loadflow_failures == 0 && rep.l_violations == 0 && rep.v_violations == 0 &&
                    ms < 60000.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "1000 samples: v-excess %.2g (tol 1e-8), l-excess %.2g (tol 1e-10), %.0f ms",
                  rep.worst_v_excess, rep.worst_l_excess, ms);
    report(3, ok, "voltage/current envelope sandwich", buf);
}

// ---------------------------------------------------------------------------
// 4. Tangent-plane underestimate along dense DER sweeps.
void criterion4() {
    bool ok = true;
    double worst = 0.0;
    for (const char* fx : {"/onebranch", "/threenode"}) {
        const Feeder f = parse_feeder_file(kFixtures + fx + std::string(".json"));
        auto [pl, ql] = loads_at(f, fx + std::string(".csv"), 0);
        const UnderboundReport rep = check_underbound(f, pl, ql, 101);
        ok = ok && rep.violations == 0 && rep.points == 101;
        worst = std::max(worst, rep.worst_excess);
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "2 x 101 grid points, worst excess %.2g (tol 1e-10)", worst);
    report(4, ok, "linear underestimate of branch currents", buf);
}

// ---------------------------------------------------------------------------
// 5. Exact device encodings + optimizer agreement with enumeration.
void criterion5() {
    bool ok = true;
    std::string detail;

    {  // Tap ladder: all 33 patterns reproduce the squared ratio products.
        OltcSite site;
        site.branch = 0;
        site.tau = 0.00625;
        site.n_min = -16;
        site.n_max = 16;
        MipModel model;
        const int vj = model.add_col("vj", 1.0, 1.0, 0.0);
        const int vi = model.add_col("vi", -kInf, kInf, 0.0);
        OltcEncoding enc = encode_oltc(model, site, {vj}, 0.0, 1.21, "t");
        LinExpr tie;
        tie.add(vi, 1.0).add_scaled(enc.boost[0], -1.0).add(vj, -1.0);
        model.add_row("tie", tie, RowSense::EQ, 0.0);
        double worst = 0.0;
        for (int k = 0; k <= 32; ++k) {
            Vec lb(static_cast<std::size_t>(model.num_cols())), ub(lb);
            for (int j = 0; j < model.num_cols(); ++j) {
                lb[static_cast<std::size_t>(j)] = model.col(j).lb;
                ub[static_cast<std::size_t>(j)] = model.col(j).ub;
            }
            for (int p = 0; p < 32; ++p)
                lb[static_cast<std::size_t>(enc.s[static_cast<std::size_t>(p)])] =
                    ub[static_cast<std::size_t>(enc.s[static_cast<std::size_t>(p)])] = p < k ? 1.0 : 0.0;
            const LpResult r = solve_lp(model, &lb, &ub);
            if (r.status != LpResult::Status::Optimal) {
                ok = false;
                continue;
            }
            const double t = 1.0 + site.tau * (site.n_min + k);
            worst = std::max(worst, std::fabs(r.x[static_cast<std::size_t>(vi)] - t * t));
        }
        ok = ok && worst <= 1e-9;
        detail += "tap products " + std::to_string(worst);
    }

    {  // Capacitor ladder: 11 unit counts at a pinned voltage.
        CapSite site;
        site.node = 1;
        site.y_unit = 0.01;
        site.n_min = 0;
        site.n_max = 10;
        MipModel model;
        const double v_fixed = 1.0;
        const int vi = model.add_col("vi", v_fixed, v_fixed, 0.0);
        CapEncoding enc = encode_cap(model, site, vi, 1.21, "c");
        double worst = 0.0;
        for (int k = 0; k <= 10; ++k) {
            Vec lb(static_cast<std::size_t>(model.num_cols())), ub(lb);
            for (int j = 0; j < model.num_cols(); ++j) {
                lb[static_cast<std::size_t>(j)] = model.col(j).lb;
                ub[static_cast<std::size_t>(j)] = model.col(j).ub;
            }
            for (int p = 0; p < 10; ++p)
                lb[static_cast<std::size_t>(enc.u[static_cast<std::size_t>(p)])] =
                    ub[static_cast<std::size_t>(enc.u[static_cast<std::size_t>(p)])] = p < k ? 1.0 : 0.0;
            const LpResult r = solve_lp(model, &lb, &ub);
            if (r.status != LpResult::Status::Optimal) {
                ok = false;
                continue;
            }
            double total = 0.0;
            for (int qs : enc.qs) total += r.x[static_cast<std::size_t>(qs)];
            worst = std::max(worst, std::fabs(total - v_fixed * site.y_unit * k));
        }
        ok = ok && worst <= 1e-9;
        char b[48];
        std::snprintf(b, sizeof b, ", cap products %.2g", worst);
        detail += b;
    }

    // Optimizer vs enumeration on the single-device inner problems.
    auto enumerate_vs_solver = [&](const std::string& fx, const std::string& csv,
                                   auto&& fix_pattern, int patterns) {
        const Feeder f = parse_feeder_file(kFixtures + fx);
        auto [pl, ql] = loads_at(f, csv, 0);
        const DistFlowMatrices m = build_matrices(f);
        const HCertificate cert = certify_h_nonneg(m);
        Vec p(pl), q(ql);
        for (auto& v : p) v = -v;
        for (auto& v : q) v = -v;
        const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
        const TaylorData taylor = taylor_at(op);
        const DeltaBox box = delta_box(f, m, op, DeviceSetting::neutral(f));
        const EnvelopeBounds env = build_envelopes(taylor, box);
        const VpoModel vm =
            assemble_vpo_model(f, m, cert, taylor, env, op, ql, VpoOptions{});
        double best = 1e300;
        for (int k = 0; k < patterns; ++k) {
            Vec lb(static_cast<std::size_t>(vm.model.num_cols())), ub(lb);
            for (int j = 0; j < vm.model.num_cols(); ++j) {
                lb[static_cast<std::size_t>(j)] = vm.model.col(j).lb;
                ub[static_cast<std::size_t>(j)] = vm.model.col(j).ub;
            }
            fix_pattern(vm, k, lb, ub);
            const LpResult r = solve_lp(vm.model, &lb, &ub);
            if (r.status == LpResult::Status::Optimal) best = std::min(best, r.objective);
        }
        const MipSolution sol = solve_mip(vm.model);
        return std::fabs(sol.objective - best);
    };

    const double gap_oltc = enumerate_vs_solver(
        "/oltc_toy.json", "/oltc_toy.csv",
        [](const VpoModel& vm, int k, Vec& lb, Vec& ub) {
            const auto& s = vm.oltc_enc[0].s;
            for (std::size_t p = 0; p < s.size(); ++p)
                lb[static_cast<std::size_t>(s[p])] = ub[static_cast<std::size_t>(s[p])] =
                    static_cast<int>(p) < k ? 1.0 : 0.0;
        },
        33);
    const double gap_cap = enumerate_vs_solver(
        "/threenode.json", "/threenode.csv",
        [](const VpoModel& vm, int k, Vec& lb, Vec& ub) {
            const auto& u = vm.cap_enc[0].u;
            for (std::size_t p = 0; p < u.size(); ++p)
                lb[static_cast<std::size_t>(u[p])] = ub[static_cast<std::size_t>(u[p])] =
                    static_cast<int>(p) < k ? 1.0 : 0.0;
        },
        4);
    ok = ok && gap_oltc <= 1e-6 && gap_cap <= 1e-6;
    char b[96];
    std::snprintf(b, sizeof b, ", optimizer vs enumeration %.2g / %.2g", gap_oltc, gap_cap);
    detail += b;
    report(5, ok, "exact tap and capacitor encodings", detail);
}

// ---------------------------------------------------------------------------
// 6. Branch-and-bound equals brute force on random mixed-integer programs.
void criterion6() {
    const double t0 = now_ms();
    Rng rng(4242);
    bool ok = true;
    int solved = 0, infeasible = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int ncont = 2 + rng.uniform_int(0, 4);
        const int nbin = 2 + rng.uniform_int(0, 10);  // up to 12 binaries
        MipModel m;
        Vec x0;
        for (int j = 0; j < ncont; ++j) {
            const double lo = rng.uniform(-2.0, 0.0);
            const double hi = lo + rng.uniform(0.5, 3.0);
            m.add_col("x" + std::to_string(j), lo, hi, rng.uniform(-1.0, 1.0));
            x0.push_back(rng.uniform(lo, hi));
        }
        for (int j = 0; j < nbin; ++j) {
            m.add_binary("b" + std::to_string(j), rng.uniform(-1.0, 1.0));
            x0.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
        }
        const int nrows = 3 + rng.uniform_int(0, 6);
        for (int i = 0; i < nrows; ++i) {
            LinExpr e;
            double act = 0.0;
            for (int j = 0; j < ncont + nbin; ++j) {
                if (rng.uniform() < 0.4) continue;
                const double c = rng.uniform(-2.0, 2.0);
                e.add(j, c);
                act += c * x0[static_cast<std::size_t>(j)];
            }
            if (rng.uniform() < 0.5)
                m.add_row("r" + std::to_string(i), e, RowSense::LE, act + rng.uniform(0.0, 1.0));
            else
                m.add_row("r" + std::to_string(i), e, RowSense::GE, act - rng.uniform(0.0, 1.0));
        }

        // Brute force over every binary pattern.
        double want = 1e300;
        bool feasible = false;
        std::vector<int> bins;
        for (int j = 0; j < m.num_cols(); ++j)
            if (m.col(j).binary) bins.push_back(j);
        for (long mask = 0; mask < (1L << bins.size()); ++mask) {
            Vec lb(static_cast<std::size_t>(m.num_cols())), ub(lb);
            for (int j = 0; j < m.num_cols(); ++j) {
                lb[static_cast<std::size_t>(j)] = m.col(j).lb;
                ub[static_cast<std::size_t>(j)] = m.col(j).ub;
            }
            for (std::size_t b = 0; b < bins.size(); ++b)
                lb[static_cast<std::size_t>(bins[b])] = ub[static_cast<std::size_t>(bins[b])] =
                    (mask >> b) & 1 ? 1.0 : 0.0;
            const LpResult lp = solve_lp(m, &lb, &ub);
            if (lp.status == LpResult::Status::Optimal) {
                feasible = true;
                want = std::min(want, lp.objective);
            }
        }

        const MipSolution got = solve_mip(m);
        if (!feasible) {
            ++infeasible;
            ok = ok && got.status == MipSolution::Status::Infeasible;
            continue;
        }
        ++solved;
        if (got.status == MipSolution::Status::Infeasible) {
            ok = false;
            continue;
        }
        worst = std::max(worst, std::fabs(got.objective - want));
        ok = ok && std::fabs(got.objective - want) <= 1e-6;
        // Gap semantics: a finished tree reports a zero gap; a gap-limited
        // stop stays below the configured 1e-4.
        if (got.status == MipSolution::Status::Optimal) ok = ok && got.gap == 0.0;
        if (got.status == MipSolution::Status::GapLimit) ok = ok && got.gap <= 1e-4;
    }
    const double ms = now_ms() - t0;
    ok = ok && ms < 120000.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d solved + %d infeasible, worst deviation %.2g, %.0f ms",
                  solved, infeasible, worst, ms);
    report(6, ok, "branch-and-bound equals exhaustive enumeration", buf);
}

// ---------------------------------------------------------------------------
// 7. Refinement-loop contract on both feeders.
void criterion7() {
    bool ok = true;
    std::string detail;
    const std::vector<std::tuple<std::string, std::string, bool>> runs = {
        {"/ieee13.json", "/ieee13_day.csv", true},   // tap stability enforced here
        {"/ieee37.json", "/ieee37_day.csv", false},
    };
    for (const auto& [fx, csv, check_tap] : runs) {
        const Feeder f = parse_feeder_file(kFixtures + fx);
        auto [pl, ql] = loads_at(f, csv, 18);
        const VpoRun run = run_refinement(f, pl, ql, VpoOptions{});
        bool feas = run.all_hard_feasible;
        for (const auto& it : run.iterates)
            for (std::size_t k = 0; k < it.op.V.size(); ++k)
                feas = feas && it.op.V[k] >= f.v_min[k] - 1e-6 && it.op.V[k] <= f.v_max[k] + 1e-6;
        bool mono = true;
        for (std::size_t i = 1; i < run.iterates.size(); ++i)
            mono = mono && run.iterates[i].objective <= run.iterates[i - 1].objective + 1e-9;
        const bool conv = run.converged && run.iterates.back().error < 1e-6 &&
                          run.iterates.size() <= 20;
        bool hard_target = true;
        if (check_tap && run.iterates.size() >= 2) {
            hard_target = run.iterates[1].objective < run.iterates[0].objective - 1e-12 &&
                          run.iterates[0].taps == run.iterates[1].taps;
        }
        ok = ok && feas && mono && conv && hard_target;
        char b[200];
        std::snprintf(b, sizeof b, "%s: iters=%zu f1=%.4g f_last=%.4g feas=%d mono=%d tap0=%d; ",
                      f.name.c_str(), run.iterates.size(), run.iterates.front().objective,
                      run.iterates.back().objective, feas, mono,
                      run.taps_final.empty() ? -99 : run.taps_final[0]);
        detail += b;
    }
    report(7, ok, "feasible, monotone, convergent refinement", detail);
}

// ---------------------------------------------------------------------------
// 8. Trade-off weight sweep trends.
void criterion8() {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    auto [pl, ql] = loads_at(f, "/ieee13_day.csv", 18);
    const Vec alphas{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    const auto pts = sweep_alpha(f, pl, ql, alphas, VpoOptions{});
    bool slack_dec = true, qg_inc = true;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        slack_dec = slack_dec && pts[i].slack_total <= pts[i - 1].slack_total + 1e-9;
        qg_inc = qg_inc && pts[i].qg_abs_total >= pts[i - 1].qg_abs_total - 1e-9;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "slack %.3g..%.3g (dec=%d), |qg| %.3g..%.3g (inc=%d)",
                  pts.front().slack_total, pts.back().slack_total, slack_dec,
                  pts.front().qg_abs_total, pts.back().qg_abs_total, qg_inc);
    report(8, slack_dec && qg_inc, "weight sweep is rank-monotone", buf);
}

// ---------------------------------------------------------------------------
// 9. Capacitor banks offload DER reactive duty across the horizon.
void criterion9() {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    const ScheduleResult with = schedule_horizon(f, prof, VpoOptions{});
    VpoOptions nocaps;
    nocaps.use_caps = false;
    const ScheduleResult without = schedule_horizon(f.with_cap_count(0), prof, nocaps);
    bool ok = with.all_ok && without.all_ok && with.periods.size() == 24;
    int violations = 0;
    for (std::size_t t = 0; t < with.periods.size() && ok; ++t)
        if (with.periods[t].qg_abs_total > without.periods[t].qg_abs_total + 1e-9) ++violations;
    ok = ok && violations == 0;

    // Dispatch should track load: concordant load/cap-pair ordering dominates.
    long concordant = 0, discordant = 0;
    for (std::size_t a = 0; a < with.periods.size(); ++a)
        for (std::size_t b = a + 1; b < with.periods.size(); ++b) {
            const double dl = with.periods[a].load_q_total - with.periods[b].load_q_total;
            const double dc = with.periods[a].cap_q_nominal - with.periods[b].cap_q_nominal;
            if (dl * dc > 0) ++concordant;
            if (dl * dc < 0) ++discordant;
        }
    ok = ok && concordant > discordant;
    char buf[160];
    std::snprintf(buf, sizeof buf, "24 periods, DER-duty violations %d, cap/load pairs %ld/%ld",
                  violations, concordant, discordant);
    report(9, ok, "with-caps DER duty never exceeds no-caps duty", buf);
}

// ---------------------------------------------------------------------------
// 10. Reverse power flow stays admissible.
void criterion10() {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_pv.csv", f);
    bool ok = true;
    int reverse_periods = 0;
    for (int t = 0; t < prof.horizon; ++t) {
        for (double v : prof.p_load[static_cast<std::size_t>(t)])
            if (v < 0) {
                ++reverse_periods;
                break;
            }
    }
    ok = ok && reverse_periods >= 6;  // the profile genuinely reverses
    const ScheduleResult sched = schedule_horizon(f, prof, VpoOptions{});
    ok = ok && sched.all_ok;
    int infeasible = 0;
    for (const auto& ps : sched.periods)
        if (!ps.hard_feasible) ++infeasible;
    ok = ok && infeasible == 0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d reverse periods, %d hard-infeasible iterate sets",
                  reverse_periods, infeasible);
    report(10, ok, "high-PV profile keeps every iterate admissible", buf);
}

// ---------------------------------------------------------------------------
// 11. Solve-time scaling in the capacitor count.
void criterion11() {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee37.json");
    auto [pl, ql] = loads_at(f, "/ieee37_day.csv", 18);
    const std::vector<int> counts{1, 2, 3, 4, 5, 6};
    // Medians over three repeats to tame timer noise; the deterministic
    // workload indicators back the trend up exactly.
    std::vector<std::vector<double>> times(counts.size());
    std::vector<ScalePoint> last;
    bool deterministic = true;
    for (int rep = 0; rep < 3; ++rep) {
        const auto pts = scale_study(f, pl, ql, counts, VpoOptions{});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            times[i].push_back(pts[i].wall_ms);
            if (rep > 0)
                deterministic = deterministic && pts[i].nodes == last[i].nodes &&
                                pts[i].lp_iterations == last[i].lp_iterations;
        }
        last = pts;
    }
    Vec median(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::sort(times[i].begin(), times[i].end());
        median[i] = times[i][1];
    }
    bool ok = true;
    for (std::size_t i = 0; i < counts.size(); ++i) ok = ok && median[i] < 60000.0;
    bool weakly_increasing = true;
    for (std::size_t i = 1; i < counts.size(); ++i)
        weakly_increasing = weakly_increasing && median[i] >= median[i - 1] * 0.90 - 25.0;
    bool work_increasing = true;
    for (std::size_t i = 1; i < last.size(); ++i)
        work_increasing = work_increasing && last[i].rows > last[i - 1].rows &&
                          last[i].lp_iterations >= last[i - 1].lp_iterations;
    ok = ok && weakly_increasing && work_increasing && deterministic;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "medians %.0f..%.0f ms, weak trend=%d, workload trend=%d, replay=%d",
                  median.front(), median.back(), weakly_increasing, work_increasing,
                  deterministic);
    report(11, ok, "inner-problem solve time scales with device count", buf);
}

}  // namespace

int main() {
    const double t0 = now_ms();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    std::printf("acceptance: %s (%d failure%s, %.1f s)\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures, g_failures == 1 ? "" : "s", (now_ms() - t0) / 1000.0);
    return g_failures == 0 ? 0 : 1;
}
