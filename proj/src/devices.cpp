#include "vpo/devices.hpp"

#include <cmath>

namespace vpo {

OltcEncoding encode_oltc(MipModel& model, const OltcSite& site, const std::vector<int>& v_up_vars,
                         double v_up_const, double v_bar, const std::string& tag) {
    if (v_bar <= 0) throw MipError("oltc big-M voltage must be positive");
    OltcEncoding enc;
    enc.branch = site.branch;
    enc.n_min = site.n_min;
    const int K = site.n_max - site.n_min;
    const double t0 = 1.0 + site.tau * site.n_min;
    enc.t0_sq = t0 * t0;
    enc.delta_t.resize(static_cast<std::size_t>(K));
    double prev = enc.t0_sq;
    for (int p = 0; p < K; ++p) {
        const double tp = 1.0 + site.tau * (site.n_min + p + 1);
        const double tp_sq = tp * tp;
        enc.delta_t[static_cast<std::size_t>(p)] = tp_sq - prev;
        if (enc.delta_t[static_cast<std::size_t>(p)] <= 0)
            throw MipError("non-monotone tap ratio table");
        prev = tp_sq;
    }

    enc.s.resize(static_cast<std::size_t>(K));
    for (int p = 0; p < K; ++p)
        enc.s[static_cast<std::size_t>(p)] = model.add_binary(tag + "_s" + std::to_string(p));
    for (int p = 0; p + 1 < K; ++p) {
        LinExpr adj;
        adj.add(enc.s[static_cast<std::size_t>(p)], 1.0).add(enc.s[static_cast<std::size_t>(p) + 1], -1.0);
        model.add_row(tag + "_adj" + std::to_string(p), adj, RowSense::GE, 0.0);
    }

    const std::size_t copies = v_up_vars.empty() ? 1 : v_up_vars.size();
    enc.dv.resize(copies);
    enc.boost.resize(copies);
    for (std::size_t c = 0; c < copies; ++c) {
        LinExpr boost;
        if (v_up_vars.empty()) {
            // Substation-fed tap: products collapse to constants times binaries.
            boost.add_const((enc.t0_sq - 1.0) * v_up_const);
            for (int p = 0; p < K; ++p)
                boost.add(enc.s[static_cast<std::size_t>(p)],
                          enc.delta_t[static_cast<std::size_t>(p)] * v_up_const);
        } else {
            const int vj = v_up_vars[c];
            boost.add(vj, enc.t0_sq - 1.0);
            enc.dv[c].resize(static_cast<std::size_t>(K));
            for (int p = 0; p < K; ++p) {
                const double dt = enc.delta_t[static_cast<std::size_t>(p)];
                const std::string base = tag + "_c" + std::to_string(c) + "_dv" + std::to_string(p);
                const int dv = model.add_col(base, 0.0, dt * v_bar);
                enc.dv[c][static_cast<std::size_t>(p)] = dv;
                // dv <= s * v_bar * dt
                LinExpr r1;
                r1.add(dv, 1.0).add(enc.s[static_cast<std::size_t>(p)], -v_bar * dt);
                model.add_row(base + "_cap", r1, RowSense::LE, 0.0);
                // dv <= dt * v_j
                LinExpr r2;
                r2.add(dv, 1.0).add(vj, -dt);
                model.add_row(base + "_ub", r2, RowSense::LE, 0.0);
                // dv >= dt * (v_j - (1 - s) * v_bar)
                LinExpr r3;
                r3.add(dv, 1.0).add(vj, -dt).add(enc.s[static_cast<std::size_t>(p)], -dt * v_bar);
                model.add_row(base + "_lb", r3, RowSense::GE, -dt * v_bar);
                boost.add(dv, 1.0);
            }
        }
        enc.boost[c] = boost;
    }
    return enc;
}

CapEncoding encode_cap(MipModel& model, const CapSite& site, int v_node_var, double v_bar,
                       const std::string& tag) {
    if (v_bar <= 0) throw MipError("capacitor big-M voltage must be positive");
    if (site.y_unit <= 0) throw MipError("non-positive capacitor unit admittance");
    CapEncoding enc;
    enc.node = site.node;
    enc.n_min = site.n_min;
    const int K = site.n_max;  // ladder up from zero units
    enc.steps = site.steps;
    if (static_cast<int>(enc.steps.size()) != K) enc.steps.assign(static_cast<std::size_t>(K), site.y_unit);

    enc.u.resize(static_cast<std::size_t>(K));
    enc.qs.resize(static_cast<std::size_t>(K));
    for (int p = 0; p < K; ++p) {
        const std::string base = tag + "_p" + std::to_string(p);
        const double bp = enc.steps[static_cast<std::size_t>(p)];
        const int u = model.add_binary(base + "_u");
        const int qs = model.add_col(base + "_qs", 0.0, bp * v_bar);
        enc.u[static_cast<std::size_t>(p)] = u;
        enc.qs[static_cast<std::size_t>(p)] = qs;
        // qs <= u * v_bar * b
        LinExpr r1;
        r1.add(qs, 1.0).add(u, -v_bar * bp);
        model.add_row(base + "_cap", r1, RowSense::LE, 0.0);
        // qs <= b * v_i
        LinExpr r2;
        r2.add(qs, 1.0).add(v_node_var, -bp);
        model.add_row(base + "_ub", r2, RowSense::LE, 0.0);
        // qs >= b * (v_i - (1 - u) * v_bar)
        LinExpr r3;
        r3.add(qs, 1.0).add(v_node_var, -bp).add(u, -bp * v_bar);
        model.add_row(base + "_lb", r3, RowSense::GE, -bp * v_bar);
        enc.q_cp.add(qs, 1.0);
        if (p > 0) {
            LinExpr adj;
            adj.add(enc.u[static_cast<std::size_t>(p) - 1], 1.0).add(u, -1.0);
            model.add_row(base + "_adj", adj, RowSense::GE, 0.0);
        }
    }

    // Forced-on floor: units below n_min stay latched.
    for (int p = 0; p < site.n_min && p < K; ++p) {
        LinExpr on;
        on.add(enc.u[static_cast<std::size_t>(p)], 1.0);
        model.add_row(tag + "_floor" + std::to_string(p), on, RowSense::GE, 1.0);
    }
    return enc;
}

}  // namespace vpo
