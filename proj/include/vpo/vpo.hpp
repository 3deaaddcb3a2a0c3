#pragma once

#include <string>

#include "vpo/acpf.hpp"
#include "vpo/devices.hpp"
#include "vpo/distflow.hpp"
#include "vpo/envelope.hpp"
#include "vpo/feeder.hpp"
#include "vpo/mip.hpp"

namespace vpo {

struct VpoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class QuadMode { Constant, Pwl };

struct VpoOptions {
    double epsilon = 1e-6;      // stop when |f_k - f_{k-1}| drops below this
    int max_iters = 20;
    double gap_limit = 1e-4;
    long node_limit = 200000;
    int pwl_segments = 16;      // secant chords per DER objective term
    QuadMode quad_mode = QuadMode::Constant;
    int quad_segments = 8;      // per-eigendirection chords in Pwl mode
    double lf_tol = 1e-8;
    int lf_max_iter = 100;
    bool use_caps = true;
};

// The assembled mixed-integer inner problem for one refinement step, with
// column handles for extraction. Voltage variables come in an upper and a
// lower copy (V+ driven by the current underbound, V- by the overbound);
// binaries are shared across both copies.
struct VpoModel {
    MipModel model;
    std::vector<int> yg;            // absolute DER dispatch per DER site
    std::vector<int> yg_sq;         // secant epigraph columns
    std::vector<int> vp, vm;        // voltage copies per node
    std::vector<int> svp, svm;      // tight-bound violation slacks per node
    std::vector<int> lmin, tmax;    // per branch
    std::vector<OltcEncoding> oltc_enc;
    std::vector<CapEncoding> cap_enc;
    int rows = 0, cols = 0, binaries = 0;
};

VpoModel assemble_vpo_model(const Feeder& feeder, const DistFlowMatrices& m,
                            const HCertificate& cert, const TaylorData& taylor,
                            const EnvelopeBounds& env, const OperatingPoint& base_op,
                            const Vec& q_load, const VpoOptions& opts);

struct Iterate {
    int k = 0;
    double objective = 0.0;   // inner-problem objective at this step
    double error = 0.0;       // |f_k - f_{k-1}|
    Vec qg_step, qg_cum;
    std::vector<int> taps;
    std::vector<int> cap_units;
    double cap_q_realized = 0.0;
    double slack_total = 0.0;  // violation slack total from the solve
    double mip_gap = 0.0;
    long nodes = 0;
    double solve_ms = 0.0;
    OperatingPoint op;         // exact load flow at the accumulated dispatch
    FeasibilityReport feas;
    Vec vplus, vminus;         // envelope voltages from the solve
};

struct VpoRun {
    double f0 = 0.0;                // objective of the starting operating point
    OperatingPoint op0;
    std::vector<Iterate> iterates;
    bool converged = false;
    bool monotone = true;           // f_k non-increasing for k >= 2
    bool all_hard_feasible = true;  // every iterate's load flow within hard limits
    Vec qg_final;
    std::vector<int> taps_final;
    std::vector<int> caps_final;
    double cap_q_final = 0.0;
};

VpoRun run_refinement(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                      const VpoOptions& opts);

struct PeriodSummary {
    int period = 0;
    bool ok = false;
    std::string error;
    double objective = 0.0;
    double qg_abs_total = 0.0;
    double slack_total = 0.0;
    double cap_q_nominal = 0.0;  // sum of switched admittance (injection at 1 pu)
    double load_q_total = 0.0;
    std::vector<int> taps;
    std::vector<int> cap_units;
    int iterations = 0;
    bool monotone = true;
    bool hard_feasible = true;
};

struct ScheduleResult {
    std::vector<PeriodSummary> periods;
    bool all_ok = true;
};

ScheduleResult schedule_horizon(const Feeder& feeder, const LoadProfile& profile,
                                const VpoOptions& opts);

struct SweepPoint {
    double alpha = 0.0;
    double qg_abs_total = 0.0;
    double slack_total = 0.0;
    double objective = 0.0;
};

std::vector<SweepPoint> sweep_alpha(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                    const Vec& alphas, const VpoOptions& opts);

struct ScalePoint {
    int cap_count = 0;
    double wall_ms = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
    int rows = 0, cols = 0, binaries = 0;
    double objective = 0.0;
};

// One inner-problem solve per configuration, capacitor list truncated to the
// requested count.
std::vector<ScalePoint> scale_study(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                    const std::vector<int>& cap_counts, const VpoOptions& opts);

}  // namespace vpo
