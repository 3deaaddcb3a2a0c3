#pragma once

#include "vpo/distflow.hpp"
#include "vpo/feeder.hpp"

namespace vpo {

struct LoadFlowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One concrete position of every controllable asset. Vectors follow the
// feeder's device list order (ders / oltcs / caps).
struct DeviceSetting {
    Vec q_g;                 // per DER, per-unit
    std::vector<int> taps;   // per OLTC
    std::vector<int> cap_units;  // per capacitor bank

    static DeviceSetting neutral(const Feeder& f);
};

struct FeasibilityReport {
    Vec margin_lo_hard, margin_hi_hard;   // v - v_min, v_max - v (pu^2)
    Vec margin_lo_tight, margin_hi_tight;  // v - v_lo, v_hi - v
    bool hard_feasible = false;
    bool tight_feasible = false;
    int worst_node = 0;       // canonical index of the node with least hard margin
    double worst_margin = 0.0;
};

// Radial backward/forward sweep solving the exact branch-flow equations with
// voltage-dependent capacitor injection and ideal tap ratios. `q_uncontrolled`
// excludes all device contributions; DER output comes from `setting.q_g` and
// capacitor injection v*y*n is resolved against the converging voltages.
OperatingPoint solve_loadflow(const Feeder& feeder, const Vec& p, const Vec& q_uncontrolled,
                              const DeviceSetting& setting, double tol = 1e-8,
                              int max_iter = 100);

FeasibilityReport feasibility_report(const Feeder& feeder, const OperatingPoint& op);

}  // namespace vpo
