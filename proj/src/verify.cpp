#include "vpo/verify.hpp"

#include <cmath>
#include <sstream>

namespace vpo {

DeviceSetting sample_setting(const Feeder& feeder, Rng& rng) {
    DeviceSetting s;
    for (const auto& d : feeder.ders) s.q_g.push_back(rng.uniform(d.q_min, d.q_max));
    for (const auto& o : feeder.oltcs) s.taps.push_back(rng.uniform_int(o.n_min, o.n_max));
    for (const auto& c : feeder.caps) s.cap_units.push_back(rng.uniform_int(c.n_min, c.n_max));
    return s;
}

SandwichReport check_sandwich(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                              int samples, std::uint64_t seed, double lf_tol) {
    const DistFlowMatrices m = build_matrices(feeder);
    const HCertificate cert = certify_h_nonneg(m);

    Vec p(p_load.size()), q_unc(q_load.size());
    for (std::size_t i = 0; i < p_load.size(); ++i) p[i] = -p_load[i];
    for (std::size_t i = 0; i < q_load.size(); ++i) q_unc[i] = -q_load[i];

    const DeviceSetting base = DeviceSetting::neutral(feeder);
    const OperatingPoint op0 = solve_loadflow(feeder, p, q_unc, base, lf_tol);
    const TaylorData taylor = taylor_at(op0);
    const DeltaBox box = delta_box(feeder, m, op0, base);
    const EnvelopeBounds env = build_envelopes(taylor, box);

    SandwichReport rep;
    rep.samples = samples;
    Rng rng(seed);
    const std::size_t n = static_cast<std::size_t>(feeder.n);
    for (int s = 0; s < samples; ++s) {
        const DeviceSetting setting = sample_setting(feeder, rng);
        OperatingPoint op;
        try {
            op = solve_loadflow(feeder, p, q_unc, setting, lf_tol);
        } catch (const LoadFlowError&) {
            ++rep.loadflow_failures;
            continue;
        }

        Vec lmin(n), lmax(n);
        bool in_box = true;
        for (std::size_t b = 0; b < n; ++b) {
            const std::array<double, 3> d{op.P[b] - op0.P[b], op.Q[b] - op0.Q[b],
                                          op.V[b] - op0.V[b]};
            for (int c = 0; c < 3; ++c)
                in_box = in_box && env.branch[b].box[static_cast<std::size_t>(c)].contains(
                                       d[static_cast<std::size_t>(c)], 1e-12);
            lmin[b] = env.l_min_at(b, d);
            lmax[b] = env.l_max_at(b, d);
            const double lo_excess = lmin[b] - op.l[b];
            const double hi_excess = op.l[b] - lmax[b];
            if (lo_excess > 1e-10 || hi_excess > 1e-10) ++rep.l_violations;
            rep.worst_l_excess = std::max({rep.worst_l_excess, lo_excess, hi_excess});
        }
        if (!in_box) ++rep.box_misses;

        const auto [vplus, vminus] =
            voltage_envelopes(m, cert, feeder.v0, op.p, op.q, lmin, lmax, &op);
        for (std::size_t k = 0; k < n; ++k) {
            const double lo_excess = vminus[k] - op.V[k];
            const double hi_excess = op.V[k] - vplus[k];
            if (lo_excess > 1e-8 || hi_excess > 1e-8) ++rep.v_violations;
            rep.worst_v_excess = std::max({rep.worst_v_excess, lo_excess, hi_excess});
        }
    }
    rep.box_containment =
        samples > 0 ? 1.0 - static_cast<double>(rep.box_misses) / samples : 1.0;
    return rep;
}

UnderboundReport check_underbound(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                  int grid_points) {
    if (feeder.ders.empty()) throw VpoError("underbound sweep needs at least one DER");
    Vec p(p_load.size()), q_unc(q_load.size());
    for (std::size_t i = 0; i < p_load.size(); ++i) p[i] = -p_load[i];
    for (std::size_t i = 0; i < q_load.size(); ++i) q_unc[i] = -q_load[i];

    const DeviceSetting base = DeviceSetting::neutral(feeder);
    const OperatingPoint op0 = solve_loadflow(feeder, p, q_unc, base);
    const TaylorData taylor = taylor_at(op0);

    UnderboundReport rep;
    const auto& der = feeder.ders[0];
    for (int g = 0; g < grid_points; ++g) {
        DeviceSetting s = base;
        s.q_g[0] = der.q_min + (der.q_max - der.q_min) * g / (grid_points - 1);
        const OperatingPoint op = solve_loadflow(feeder, p, q_unc, s);
        ++rep.points;
        for (std::size_t b = 0; b < op.l.size(); ++b) {
            const auto& t = taylor.branch[b];
            const double lmin = t.l0 + t.jac[0] * (op.P[b] - t.P0) + t.jac[1] * (op.Q[b] - t.Q0) +
                                t.jac[2] * (op.V[b] - t.v0);
            const double excess = lmin - op.l[b];
            if (excess > 1e-10) ++rep.violations;
            rep.worst_excess = std::max(rep.worst_excess, excess);
        }
    }
    return rep;
}

Feeder random_inductive_tree(int n, Rng& rng) {
    std::ostringstream doc;
    doc << "{\"name\":\"random_tree\",\"base_mva\":1.0,\"base_kv\":1.0,\"v0_pu\":1.0,";
    doc << "\"nodes\":[";
    for (int i = 1; i <= n; ++i) {
        if (i > 1) doc << ",";
        doc << "{\"id\":" << i
            << ",\"v_min\":0.81,\"v_max\":1.21,\"v_lo\":0.9604,\"v_hi\":1.0404,\"alpha\":0.001}";
    }
    doc << "],\"branches\":[";
    for (int i = 1; i <= n; ++i) {
        const int parent = i == 1 ? 0 : rng.uniform_int(0, i - 1);
        if (i > 1) doc << ",";
        doc << "{\"id\":" << (i - 1) << ",\"from\":" << parent << ",\"to\":" << i
            << ",\"r_pu\":" << (1e-4 + 0.1 * rng.uniform()) << ",\"x_pu\":" << (0.1 * rng.uniform())
            << "}";
    }
    doc << "]}";
    return parse_feeder(doc.str());
}

}  // namespace vpo
