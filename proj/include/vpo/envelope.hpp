#pragma once

#include <array>
#include <cmath>

#include "vpo/acpf.hpp"
#include "vpo/distflow.hpp"
#include "vpo/feeder.hpp"

namespace vpo {

struct EnvelopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Second-order expansion of l = (P^2 + Q^2) / v per branch around a base
// operating point, in the deviation coordinates d = (P-P0, Q-Q0, v-v0). The
// voltage is the branch's own downstream-node squared voltage, the one that
// appears in l*v = P^2 + Q^2.
struct BranchTaylor {
    double l0 = 0.0;
    double P0 = 0.0, Q0 = 0.0, v0 = 1.0;
    std::array<double, 3> jac{};            // [2P0/v0, 2Q0/v0, -(P0^2+Q0^2)/v0^2]
    std::array<std::array<double, 3>, 3> hess{};
    std::array<double, 3> eigenvalues{};     // ascending; expect (0, +, +)

    double model2(const std::array<double, 3>& d) const {
        double quad = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) quad += d[static_cast<std::size_t>(i)] *
                                                hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                                                d[static_cast<std::size_t>(j)];
        return l0 + jac[0] * d[0] + jac[1] * d[1] + jac[2] * d[2] + 0.5 * quad;
    }
};

struct TaylorData {
    std::vector<BranchTaylor> branch;
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

// Admissible deviation ranges per branch, plus nodal buckets used to build them.
struct DeltaBox {
    std::vector<std::array<Interval, 3>> branch;  // (dP, dQ, dv) per branch
    std::vector<Interval> node_dq;                // injection deltas per node
    std::vector<Interval> node_dv;                // squared-voltage deltas per node
};

struct EnvelopeBounds {
    struct Branch {
        double l0 = 0.0;
        std::array<double, 3> jac{};
        double quad_bound = 0.0;  // max of d'Hd over the box corners
        std::array<Interval, 3> box{};
        // Eigen data retained for the piecewise-linear quadratic mode.
        std::array<double, 3> eigenvalues{};
        std::array<std::array<double, 3>, 3> eigenvectors{};  // columns
    };
    std::vector<Branch> branch;

    double l_min_at(std::size_t b, const std::array<double, 3>& d) const {
        const Branch& e = branch[b];
        return e.l0 + e.jac[0] * d[0] + e.jac[1] * d[1] + e.jac[2] * d[2];
    }
    double l_max_at(std::size_t b, const std::array<double, 3>& d) const {
        const Branch& e = branch[b];
        const double lin = e.jac[0] * d[0] + e.jac[1] * d[1] + e.jac[2] * d[2];
        return e.l0 + std::max(2.0 * std::fabs(lin), e.quad_bound);
    }
};

TaylorData taylor_at(const OperatingPoint& op);

// Interval propagation of device ranges into deviation bounds. Deviations are
// measured from `op`, which was solved at `base` settings. Loss-induced flow
// changes are folded in through one refinement pass so that oracle deviations
// for any in-range setting land inside the box.
DeltaBox delta_box(const Feeder& feeder, const DistFlowMatrices& m, const OperatingPoint& op,
                   const DeviceSetting& base);

EnvelopeBounds build_envelopes(const TaylorData& taylor, const DeltaBox& box);

// Numeric voltage envelopes for given injections and per-branch current
// bounds: V+ uses l_min, V- uses l_max, valid because H is non-negative.
// `tap_context` supplies realized tap ratios and voltages for the boost terms.
std::pair<Vec, Vec> voltage_envelopes(const DistFlowMatrices& m, const HCertificate& cert,
                                      double v0, const Vec& p, const Vec& q, const Vec& l_min,
                                      const Vec& l_max, const OperatingPoint* tap_context = nullptr);

}  // namespace vpo
