// Command-line front end: feeder analytics, exact load flow, voltage
// positioning runs, schedules, sweeps, verification and scaling studies.
// Every subcommand prints one JSON document on stdout; --out additionally
// writes plot-ready CSV files. Timing lives under "timing" keys so outputs
// are otherwise byte-reproducible for identical inputs.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpo/verify.hpp"
#include "vpo/vpo.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string feeder_path;
    std::string profile_path;
    int period = 0;
    double epsilon = 1e-6;
    double gap = 1e-4;
    int segments = 16;
    std::string quad_mode = "const";
    std::string out_dir;
    std::uint64_t seed = 1;
    double tol = 1e-8;
    bool no_caps = false;
    bool dump_lp = false;
};

vpo::VpoOptions to_options(const CommonArgs& a) {
    vpo::VpoOptions o;
    o.epsilon = a.epsilon;
    o.gap_limit = a.gap;
    o.pwl_segments = a.segments;
    o.quad_mode = a.quad_mode == "pwl" ? vpo::QuadMode::Pwl : vpo::QuadMode::Constant;
    o.lf_tol = a.tol;
    o.use_caps = !a.no_caps;
    return o;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    std::ofstream out(dir + "/" + name);
    out << body;
}

std::string matrix_csv(const vpo::Matrix& m) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << m(i, j);
        }
        os << "\n";
    }
    return os.str();
}

json vec_json(const vpo::Vec& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

json certificate_json(const vpo::HCertificate& c) {
    json j;
    j["pass"] = c.pass;
    j["z_matrix_ok"] = c.z_matrix_ok;
    j["unit_spectrum_ok"] = c.unit_spectrum_ok;
    j["det_i_minus_a"] = c.det_i_minus_a;
    j["h_min"] = c.h_min;
    j["c_min"] = c.c_min;
    j["line_class"] = c.line_class;
    return j;
}

json feasibility_json(const vpo::Feeder& f, const vpo::FeasibilityReport& rep) {
    json j;
    j["hard_feasible"] = rep.hard_feasible;
    j["tight_feasible"] = rep.tight_feasible;
    j["worst_node"] = f.id_of(rep.worst_node);
    j["worst_margin_pu2"] = rep.worst_margin;
    j["margin_lo_hard"] = vec_json(rep.margin_lo_hard);
    j["margin_hi_hard"] = vec_json(rep.margin_hi_hard);
    j["margin_lo_tight"] = vec_json(rep.margin_lo_tight);
    j["margin_hi_tight"] = vec_json(rep.margin_hi_tight);
    return j;
}

std::pair<vpo::Vec, vpo::Vec> period_loads(const vpo::LoadProfile& prof, int period) {
    if (period < 0 || period >= prof.horizon)
        throw vpo::FeederError("period " + std::to_string(period) + " outside horizon " +
                               std::to_string(prof.horizon));
    return {prof.p_load[static_cast<std::size_t>(period)],
            prof.q_load[static_cast<std::size_t>(period)]};
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

json iterate_json(const vpo::Feeder& f, const vpo::Iterate& it) {
    json j;
    j["k"] = it.k;
    j["objective"] = it.objective;
    j["error"] = it.error;
    j["taps"] = it.taps;
    j["cap_units"] = it.cap_units;
    j["qg_step_pu"] = vec_json(it.qg_step);
    j["qg_cum_pu"] = vec_json(it.qg_cum);
    j["cap_q_realized_pu"] = it.cap_q_realized;
    j["slack_total_pu2"] = it.slack_total;
    j["mip_gap"] = it.mip_gap;
    j["nodes"] = it.nodes;
    j["voltages_pu2"] = vec_json(it.op.V);
    j["v_plus_pu2"] = vec_json(it.vplus);
    j["v_minus_pu2"] = vec_json(it.vminus);
    j["feasibility"] = feasibility_json(f, it.feas);
    j["timing"] = {{"solve_ms", it.solve_ms}};
    return j;
}

json run_json(const vpo::Feeder& f, const vpo::VpoRun& run) {
    json j;
    j["f0"] = run.f0;
    j["converged"] = run.converged;
    j["monotone"] = run.monotone;
    j["all_hard_feasible"] = run.all_hard_feasible;
    j["iterations"] = run.iterates.size();
    j["qg_final_pu"] = vec_json(run.qg_final);
    json kvar = json::array();
    for (double q : run.qg_final) kvar.push_back(f.q_to_kvar(q));
    j["qg_final_kvar"] = kvar;
    j["taps_final"] = run.taps_final;
    j["caps_final"] = run.caps_final;
    j["cap_q_final_pu"] = run.cap_q_final;
    json iters = json::array();
    for (const auto& it : run.iterates) iters.push_back(iterate_json(f, it));
    j["iterates"] = iters;
    return j;
}

std::string run_voltage_csv(const vpo::Feeder& f, const vpo::VpoRun& run) {
    std::ostringstream os;
    os.precision(12);
    os << "node";
    for (const auto& it : run.iterates)
        os << ",v_iter" << it.k << ",v_plus_iter" << it.k << ",v_minus_iter" << it.k;
    os << "\n";
    for (int i = 0; i < f.n; ++i) {
        os << f.id_of(i + 1);
        for (const auto& it : run.iterates) {
            const std::size_t k = static_cast<std::size_t>(i);
            os << "," << it.op.V[k] << "," << it.vplus[k] << "," << it.vminus[k];
        }
        os << "\n";
    }
    return os.str();
}

int cmd_matrices(const CommonArgs& a) {
    const vpo::Feeder f = vpo::parse_feeder_file(a.feeder_path);
    const vpo::DistFlowMatrices m = vpo::build_matrices(f);
    const vpo::HCertificate cert = vpo::certify_h_nonneg(m);
    write_file(a.out_dir, "B.csv", matrix_csv(m.B));
    write_file(a.out_dir, "Bn.csv", matrix_csv(m.Bn));
    write_file(a.out_dir, "A.csv", matrix_csv(m.A));
    write_file(a.out_dir, "C.csv", matrix_csv(m.C));
    write_file(a.out_dir, "D_R.csv", matrix_csv(m.D_R));
    write_file(a.out_dir, "D_X.csv", matrix_csv(m.D_X));
    write_file(a.out_dir, "M_p.csv", matrix_csv(m.M_p));
    write_file(a.out_dir, "M_q.csv", matrix_csv(m.M_q));
    write_file(a.out_dir, "H.csv", matrix_csv(m.H));
    json j;
    j["command"] = "matrices";
    j["feeder"] = f.name;
    j["nodes"] = f.n;
    j["certificate"] = certificate_json(cert);
    if (!a.out_dir.empty()) j["csv_dir"] = a.out_dir;
    std::cout << j.dump(1) << "\n";
    return cert.pass ? 0 : 3;
}

int cmd_acpf(const CommonArgs& a, const std::string& taps_s, const std::string& caps_s,
             const std::string& qg_s) {
    const vpo::Feeder f = vpo::parse_feeder_file(a.feeder_path);
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    auto [pl, ql] = period_loads(prof, a.period);
    vpo::Vec p(pl), q(ql);
    for (auto& v : p) v = -v;
    for (auto& v : q) v = -v;

    vpo::DeviceSetting s = vpo::DeviceSetting::neutral(f);
    const auto taps = parse_int_list(taps_s);
    const auto caps = parse_int_list(caps_s);
    const auto qg = parse_double_list(qg_s);
    if (!taps.empty()) s.taps = taps;
    if (!caps.empty()) s.cap_units = caps;
    if (!qg.empty()) s.q_g = qg;

    const vpo::OperatingPoint op = vpo::solve_loadflow(f, p, q, s, a.tol);
    const vpo::FeasibilityReport rep = vpo::feasibility_report(f, op);
    const vpo::ResidualReport res = vpo::residuals(vpo::build_matrices(f), op);

    std::ostringstream csv;
    csv.precision(12);
    csv << "node,branch_from,v_pu2,P_pu,Q_pu,l_pu,p_pu,q_pu\n";
    for (int i = 0; i < f.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        csv << f.id_of(i + 1) << "," << f.id_of(f.parent[static_cast<std::size_t>(i + 1)]) << ","
            << op.V[k] << "," << op.P[k] << "," << op.Q[k] << "," << op.l[k] << "," << op.p[k]
            << "," << op.q[k] << "\n";
    }
    write_file(a.out_dir, "operating_point.csv", csv.str());

    json j;
    j["command"] = "acpf";
    j["feeder"] = f.name;
    j["period"] = a.period;
    j["residuals"] = {{"flow_p", res.flow_p},
                      {"flow_q", res.flow_q},
                      {"voltage", res.voltage},
                      {"current", res.current}};
    j["feasibility"] = feasibility_json(f, rep);
    j["voltages_pu2"] = vec_json(op.V);
    if (a.out_dir.empty()) j["operating_point_csv"] = csv.str();
    std::cout << j.dump(1) << "\n";
    return 0;
}

int cmd_solve(const CommonArgs& a) {
    const vpo::Feeder base = vpo::parse_feeder_file(a.feeder_path);
    const vpo::Feeder f = a.no_caps ? base.with_cap_count(0) : base;
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    auto [pl, ql] = period_loads(prof, a.period);
    const auto t0 = std::chrono::steady_clock::now();
    const vpo::VpoRun run = vpo::run_refinement(f, pl, ql, to_options(a));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (a.dump_lp && !a.out_dir.empty()) {
        // Re-assemble the final model for the dump.
        const vpo::DistFlowMatrices m = vpo::build_matrices(f);
        const vpo::HCertificate cert = vpo::certify_h_nonneg(m);
        const vpo::Iterate& last = run.iterates.back();
        const vpo::TaylorData taylor = vpo::taylor_at(last.op);
        vpo::DeviceSetting setting = vpo::DeviceSetting::neutral(f);
        setting.q_g = last.qg_cum;
        setting.taps = last.taps;
        setting.cap_units = last.cap_units;
        const vpo::DeltaBox box = vpo::delta_box(f, m, last.op, setting);
        const vpo::EnvelopeBounds env = vpo::build_envelopes(taylor, box);
        const vpo::VpoModel vm = vpo::assemble_vpo_model(f, m, cert, taylor, env, last.op,
                                                         ql, to_options(a));
        write_file(a.out_dir, "model.lp", vm.model.dump_lp());
    }
    write_file(a.out_dir, "voltages.csv", run_voltage_csv(f, run));

    json j;
    j["command"] = "solve";
    j["feeder"] = f.name;
    j["period"] = a.period;
    j["tight_bounds_defaulted"] = f.tight_bounds_defaulted;
    j["run"] = run_json(f, run);
    j["timing"] = {{"total_ms", ms}};
    std::cout << j.dump(1) << "\n";
    return run.converged ? 0 : 3;
}

int cmd_schedule(const CommonArgs& a) {
    const vpo::Feeder base = vpo::parse_feeder_file(a.feeder_path);
    const vpo::Feeder f = a.no_caps ? base.with_cap_count(0) : base;
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    const auto t0 = std::chrono::steady_clock::now();
    const vpo::ScheduleResult sched = vpo::schedule_horizon(f, prof, to_options(a));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    csv.precision(12);
    csv << "t,objective,qg_abs_total_pu,slack_total_pu2,cap_q_nominal_pu,load_q_total_pu";
    for (std::size_t o = 0; o < f.oltcs.size(); ++o) csv << ",tap" << o;
    for (std::size_t c = 0; c < f.caps.size(); ++c) csv << ",cap" << c;
    csv << "\n";
    json periods = json::array();
    for (const auto& ps : sched.periods) {
        json pj;
        pj["t"] = ps.period;
        pj["ok"] = ps.ok;
        if (!ps.ok) pj["error"] = ps.error;
        pj["objective"] = ps.objective;
        pj["qg_abs_total_pu"] = ps.qg_abs_total;
        pj["slack_total_pu2"] = ps.slack_total;
        pj["cap_q_nominal_pu"] = ps.cap_q_nominal;
        pj["taps"] = ps.taps;
        pj["cap_units"] = ps.cap_units;
        pj["iterations"] = ps.iterations;
        pj["monotone"] = ps.monotone;
        pj["hard_feasible"] = ps.hard_feasible;
        periods.push_back(pj);
        csv << ps.period << "," << ps.objective << "," << ps.qg_abs_total << ","
            << ps.slack_total << "," << ps.cap_q_nominal << "," << ps.load_q_total;
        for (int tp : ps.taps) csv << "," << tp;
        for (int cu : ps.cap_units) csv << "," << cu;
        csv << "\n";
    }
    write_file(a.out_dir, "schedule.csv", csv.str());

    json j;
    j["command"] = "schedule";
    j["feeder"] = f.name;
    j["caps_enabled"] = !a.no_caps;
    j["all_ok"] = sched.all_ok;
    j["periods"] = periods;
    j["timing"] = {{"total_ms", ms}};
    std::cout << j.dump(1) << "\n";
    return sched.all_ok ? 0 : 3;
}

int cmd_sweep(const CommonArgs& a, const std::string& alphas_s) {
    const vpo::Feeder f = vpo::parse_feeder_file(a.feeder_path);
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    auto [pl, ql] = period_loads(prof, a.period);
    vpo::Vec alphas = parse_double_list(alphas_s);
    if (alphas.empty()) alphas = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    const auto pts = vpo::sweep_alpha(f, pl, ql, alphas, to_options(a));

    std::ostringstream csv;
    csv.precision(12);
    csv << "alpha,qg_abs_total_pu,slack_total_pu2,objective\n";
    json arr = json::array();
    for (const auto& pt : pts) {
        json pj;
        pj["alpha"] = pt.alpha;
        pj["qg_abs_total_pu"] = pt.qg_abs_total;
        pj["slack_total_pu2"] = pt.slack_total;
        pj["objective"] = pt.objective;
        pj["nominal"] = pt.alpha == 1e-3;
        arr.push_back(pj);
        csv << pt.alpha << "," << pt.qg_abs_total << "," << pt.slack_total << "," << pt.objective
            << "\n";
    }
    write_file(a.out_dir, "sweep.csv", csv.str());

    bool slack_monotone = true, qg_monotone = true;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        slack_monotone = slack_monotone && pts[i].slack_total <= pts[i - 1].slack_total + 1e-9;
        qg_monotone = qg_monotone && pts[i].qg_abs_total >= pts[i - 1].qg_abs_total - 1e-9;
    }
    json j;
    j["command"] = "sweep";
    j["feeder"] = f.name;
    j["period"] = a.period;
    j["points"] = arr;
    j["slack_weakly_decreasing"] = slack_monotone;
    j["qg_weakly_increasing"] = qg_monotone;
    std::cout << j.dump(1) << "\n";
    return 0;
}

int cmd_verify(const CommonArgs& a, int samples) {
    const vpo::Feeder f = vpo::parse_feeder_file(a.feeder_path);
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    auto [pl, ql] = period_loads(prof, a.period);
    const auto t0 = std::chrono::steady_clock::now();
    const vpo::SandwichReport sandwich = vpo::check_sandwich(f, pl, ql, samples, a.seed, a.tol);
    vpo::UnderboundReport under;
    if (!f.ders.empty()) under = vpo::check_underbound(f, pl, ql, 101);
    const vpo::HCertificate cert = vpo::certify_h_nonneg(vpo::build_matrices(f));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const bool pass = cert.pass && sandwich.l_violations == 0 && sandwich.v_violations == 0 &&
                      sandwich.loadflow_failures == 0 && sandwich.box_containment >= 0.999 &&
                      under.violations == 0;
    json j;
    j["command"] = "verify";
    j["feeder"] = f.name;
    j["period"] = a.period;
    j["seed"] = a.seed;
    j["samples"] = samples;
    j["certificate"] = certificate_json(cert);
    j["sandwich"] = {{"loadflow_failures", sandwich.loadflow_failures},
                     {"current_violations", sandwich.l_violations},
                     {"voltage_violations", sandwich.v_violations},
                     {"worst_current_excess", sandwich.worst_l_excess},
                     {"worst_voltage_excess_pu2", sandwich.worst_v_excess},
                     {"box_containment", sandwich.box_containment}};
    j["underbound"] = {{"points", under.points},
                       {"violations", under.violations},
                       {"worst_excess", under.worst_excess}};
    j["pass"] = pass;
    j["timing"] = {{"total_ms", ms}};
    std::cout << j.dump(1) << "\n";
    return pass ? 0 : 3;
}

int cmd_scale(const CommonArgs& a, const std::string& caps_range) {
    const vpo::Feeder f = vpo::parse_feeder_file(a.feeder_path);
    const vpo::LoadProfile prof = vpo::parse_profile_file(a.profile_path, f);
    auto [pl, ql] = period_loads(prof, a.period);

    std::vector<int> counts;
    const auto dots = caps_range.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(caps_range.substr(0, dots));
        const int hi = std::stoi(caps_range.substr(dots + 2));
        for (int c = lo; c <= hi; ++c) counts.push_back(c);
    } else {
        counts = parse_int_list(caps_range);
    }
    if (counts.empty()) counts = {1, 2, 3, 4, 5, 6};

    const auto pts = vpo::scale_study(f, pl, ql, counts, to_options(a));
    std::ostringstream csv;
    csv.precision(12);
    csv << "cap_count,wall_ms,nodes,lp_iterations,rows,cols,binaries\n";
    json arr = json::array();
    for (const auto& pt : pts) {
        json pj;
        pj["cap_count"] = pt.cap_count;
        pj["nodes"] = pt.nodes;
        pj["lp_iterations"] = pt.lp_iterations;
        pj["rows"] = pt.rows;
        pj["cols"] = pt.cols;
        pj["binaries"] = pt.binaries;
        pj["objective"] = pt.objective;
        pj["timing"] = {{"wall_ms", pt.wall_ms}};
        arr.push_back(pj);
        csv << pt.cap_count << "," << pt.wall_ms << "," << pt.nodes << "," << pt.lp_iterations
            << "," << pt.rows << "," << pt.cols << "," << pt.binaries << "\n";
    }
    write_file(a.out_dir, "scale.csv", csv.str());
    json j;
    j["command"] = "scale";
    j["feeder"] = f.name;
    j["period"] = a.period;
    j["points"] = arr;
    std::cout << j.dump(1) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voltage positioning toolkit for radial feeders"};
    app.require_subcommand(1);

    CommonArgs a;
    std::string taps_s, caps_s, qg_s, alphas_s, caps_range;
    int samples = 1000;

    auto add_common = [&](CLI::App* sub, bool needs_profile) {
        sub->add_option("--feeder", a.feeder_path, "feeder JSON document")->required();
        if (needs_profile)
            sub->add_option("--profile", a.profile_path, "load profile CSV")->required();
        sub->add_option("--period", a.period, "profile row to use");
        sub->add_option("--epsilon", a.epsilon, "refinement stopping threshold")
            ->check(CLI::PositiveNumber);
        sub->add_option("--gap", a.gap, "MIP gap limit")->check(CLI::NonNegativeNumber);
        sub->add_option("--segments", a.segments, "objective chords per DER")
            ->check(CLI::PositiveNumber);
        sub->add_option("--quad-mode", a.quad_mode, "quadratic overbound mode")
            ->check(CLI::IsMember({"const", "pwl"}));
        sub->add_option("--out", a.out_dir, "directory for CSV exports");
        sub->add_option("--seed", a.seed, "sampling seed");
        sub->add_option("--tol", a.tol, "load-flow tolerance")->check(CLI::PositiveNumber);
        sub->add_flag("--no-caps", a.no_caps, "disable capacitor banks");
        sub->add_flag("--dump-lp", a.dump_lp, "write the final model in LP format");
    };

    CLI::App* matrices = app.add_subcommand("matrices", "operator matrices and certificate");
    add_common(matrices, false);

    CLI::App* acpf = app.add_subcommand("acpf", "exact load flow at given settings");
    add_common(acpf, true);
    acpf->add_option("--taps", taps_s, "comma-separated tap positions");
    acpf->add_option("--caps", caps_s, "comma-separated capacitor unit counts");
    acpf->add_option("--qg", qg_s, "comma-separated DER reactive setpoints (pu)");

    CLI::App* solve = app.add_subcommand("solve", "voltage positioning run for one period");
    add_common(solve, true);

    CLI::App* schedule = app.add_subcommand("schedule", "independent runs over the horizon");
    add_common(schedule, true);

    CLI::App* sweep = app.add_subcommand("sweep", "trade-off weight sweep");
    add_common(sweep, true);
    sweep->add_option("--alphas", alphas_s, "comma-separated ascending weights");

    CLI::App* verify = app.add_subcommand("verify", "envelope and certificate verification");
    add_common(verify, true);
    verify->add_option("--samples", samples, "random device settings to draw")
        ->check(CLI::PositiveNumber);

    CLI::App* scale = app.add_subcommand("scale", "solve-time scaling in capacitor count");
    add_common(scale, true);
    scale->add_option("--caps", caps_range, "count list or lo..hi range");

    CLI11_PARSE(app, argc, argv);

    try {
        if (matrices->parsed()) return cmd_matrices(a);
        if (acpf->parsed()) return cmd_acpf(a, taps_s, caps_s, qg_s);
        if (solve->parsed()) return cmd_solve(a);
        if (schedule->parsed()) return cmd_schedule(a);
        if (sweep->parsed()) return cmd_sweep(a, alphas_s);
        if (verify->parsed()) return cmd_verify(a, samples);
        if (scale->parsed()) return cmd_scale(a, caps_range);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cout << err.dump(1) << "\n";
        return 2;
    }
    return 1;
}
