#include "vpo/acpf.hpp"

#include <cmath>

namespace vpo {

DeviceSetting DeviceSetting::neutral(const Feeder& f) {
    DeviceSetting s;
    s.q_g.assign(f.ders.size(), 0.0);
    s.taps.assign(f.oltcs.size(), 0);
    s.cap_units.assign(f.caps.size(), 0);
    for (std::size_t i = 0; i < f.oltcs.size(); ++i) {
        const auto& o = f.oltcs[i];
        if (0 < o.n_min || 0 > o.n_max) s.taps[i] = o.n_min;  // neutral not in range
    }
    for (std::size_t i = 0; i < f.caps.size(); ++i)
        s.cap_units[i] = f.caps[i].n_min;
    return s;
}

namespace {

void validate_setting(const Feeder& f, const DeviceSetting& s) {
    if (s.q_g.size() != f.ders.size() || s.taps.size() != f.oltcs.size() ||
        s.cap_units.size() != f.caps.size())
        throw LoadFlowError("device setting shape does not match feeder");
    for (std::size_t i = 0; i < f.ders.size(); ++i) {
        if (!std::isfinite(s.q_g[i]) || s.q_g[i] < f.ders[i].q_min - 1e-12 ||
            s.q_g[i] > f.ders[i].q_max + 1e-12)
            throw LoadFlowError("DER reactive setpoint outside declared range");
    }
    for (std::size_t i = 0; i < f.oltcs.size(); ++i)
        if (s.taps[i] < f.oltcs[i].n_min || s.taps[i] > f.oltcs[i].n_max)
            throw LoadFlowError("tap position outside declared range");
    for (std::size_t i = 0; i < f.caps.size(); ++i)
        if (s.cap_units[i] < f.caps[i].n_min || s.cap_units[i] > f.caps[i].n_max)
            throw LoadFlowError("capacitor unit count outside declared range");
}

}  // namespace

OperatingPoint solve_loadflow(const Feeder& feeder, const Vec& p, const Vec& q_uncontrolled,
                              const DeviceSetting& setting, double tol, int max_iter) {
    const int n = feeder.n;
    if (static_cast<int>(p.size()) != n || static_cast<int>(q_uncontrolled.size()) != n)
        throw LoadFlowError("injection vector length does not match feeder");
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(p[static_cast<std::size_t>(i)]) ||
            !std::isfinite(q_uncontrolled[static_cast<std::size_t>(i)]))
            throw LoadFlowError("non-finite injection");
    if (!(tol > 0)) throw LoadFlowError("tolerance must be positive");
    validate_setting(feeder, setting);

    // Per-node controllable layers.
    Vec q_der(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < feeder.ders.size(); ++i)
        q_der[static_cast<std::size_t>(feeder.ders[i].node - 1)] += setting.q_g[i];
    Vec cap_b(static_cast<std::size_t>(n), 0.0);  // total switched admittance per node
    for (std::size_t i = 0; i < feeder.caps.size(); ++i)
        cap_b[static_cast<std::size_t>(feeder.caps[i].node - 1)] +=
            feeder.caps[i].admittance_of(setting.cap_units[i]);

    Vec tap_sq(static_cast<std::size_t>(n), 1.0);
    for (std::size_t i = 0; i < feeder.oltcs.size(); ++i) {
        const auto& o = feeder.oltcs[i];
        const double t = 1.0 + o.tau * setting.taps[i];
        tap_sq[static_cast<std::size_t>(o.branch)] = t * t;
    }

    // Children of each node; canonical order already puts parents first.
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n) + 1);
    for (int c = 1; c <= n; ++c)
        children[static_cast<std::size_t>(feeder.parent[static_cast<std::size_t>(c)])].push_back(c);

    Vec v(static_cast<std::size_t>(n) + 1, feeder.v0);
    Vec P(static_cast<std::size_t>(n), 0.0), Q(static_cast<std::size_t>(n), 0.0);
    Vec l(static_cast<std::size_t>(n), 0.0);
    Vec q(static_cast<std::size_t>(n), 0.0);

    double resid = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int i = 0; i < n; ++i)
            q[static_cast<std::size_t>(i)] = q_uncontrolled[static_cast<std::size_t>(i)] +
                                             q_der[static_cast<std::size_t>(i)] +
                                             v[static_cast<std::size_t>(i) + 1] * cap_b[static_cast<std::size_t>(i)];

        // Backward sweep: flows at the downstream end, toward the substation.
        // Descending order visits every child branch before its parent branch.
        for (int node = n; node >= 1; --node) {
            const std::size_t b = static_cast<std::size_t>(node - 1);
            double sp = p[b], sq = q[b];
            for (int c : children[static_cast<std::size_t>(node)]) {
                const std::size_t cb = static_cast<std::size_t>(c - 1);
                sp += P[cb] - feeder.branch_r[cb] * l[cb];
                sq += Q[cb] - feeder.branch_x[cb] * l[cb];
            }
            P[b] = sp;
            Q[b] = sq;
            const double vk = v[static_cast<std::size_t>(node)];
            if (vk <= 0.0) throw LoadFlowError("voltage collapse during sweep");
            l[b] = (sp * sp + sq * sq) / vk;
        }

        // Forward sweep: squared-voltage recursion, ideal ratio on OLTC branches.
        for (int node = 1; node <= n; ++node) {
            const std::size_t b = static_cast<std::size_t>(node - 1);
            const double v_up = v[static_cast<std::size_t>(feeder.parent[static_cast<std::size_t>(node)])];
            if (tap_sq[b] != 1.0 || feeder.oltc_on_branch(static_cast<int>(b)) != nullptr) {
                v[static_cast<std::size_t>(node)] = tap_sq[b] * v_up;
            } else {
                v[static_cast<std::size_t>(node)] = v_up + 2.0 * feeder.branch_r[b] * P[b] +
                                                    2.0 * feeder.branch_x[b] * Q[b] -
                                                    (feeder.branch_r[b] * feeder.branch_r[b] +
                                                     feeder.branch_x[b] * feeder.branch_x[b]) *
                                                        l[b];
            }
            if (v[static_cast<std::size_t>(node)] <= 0.0)
                throw LoadFlowError("voltage collapse during sweep");
        }

        resid = 0.0;
        for (int b = 0; b < n; ++b) {
            const std::size_t bb = static_cast<std::size_t>(b);
            const double gap = std::fabs(l[bb] * v[bb + 1] - (P[bb] * P[bb] + Q[bb] * Q[bb]));
            resid = std::max(resid, gap);
        }
        // Capacitor injections were computed against the pre-sweep voltages;
        // count the drift so the reported q is coupled to the final v.
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            if (cap_b[k] == 0.0) continue;
            const double q_now = q_uncontrolled[k] + q_der[k] + v[k + 1] * cap_b[k];
            resid = std::max(resid, std::fabs(q_now - q[k]));
        }
        if (resid <= tol && iter >= 1) break;
    }
    if (resid > tol)
        throw LoadFlowError("load flow did not converge: residual " + std::to_string(resid));

    OperatingPoint op;
    op.p = p;
    op.q = q;
    op.P = P;
    op.Q = Q;
    op.l = l;
    op.v0 = feeder.v0;
    op.V.assign(v.begin() + 1, v.end());
    op.tap_sq = tap_sq;
    return op;
}

FeasibilityReport feasibility_report(const Feeder& feeder, const OperatingPoint& op) {
    const int n = feeder.n;
    FeasibilityReport rep;
    rep.margin_lo_hard.resize(static_cast<std::size_t>(n));
    rep.margin_hi_hard.resize(static_cast<std::size_t>(n));
    rep.margin_lo_tight.resize(static_cast<std::size_t>(n));
    rep.margin_hi_tight.resize(static_cast<std::size_t>(n));
    rep.hard_feasible = true;
    rep.tight_feasible = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.worst_node = 1;
    constexpr double kTol = 1e-9;
    for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double vi = op.V[k];
        rep.margin_lo_hard[k] = vi - feeder.v_min[k];
        rep.margin_hi_hard[k] = feeder.v_max[k] - vi;
        rep.margin_lo_tight[k] = vi - feeder.v_lo[k];
        rep.margin_hi_tight[k] = feeder.v_hi[k] - vi;
        if (rep.margin_lo_hard[k] < -kTol || rep.margin_hi_hard[k] < -kTol) rep.hard_feasible = false;
        if (rep.margin_lo_tight[k] < -kTol || rep.margin_hi_tight[k] < -kTol) rep.tight_feasible = false;
        const double worst_here = std::min(rep.margin_lo_hard[k], rep.margin_hi_hard[k]);
        if (worst_here < rep.worst_margin) {
            rep.worst_margin = worst_here;
            rep.worst_node = i + 1;
        }
    }
    return rep;
}

}  // namespace vpo
