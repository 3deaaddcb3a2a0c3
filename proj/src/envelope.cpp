#include "vpo/envelope.hpp"

#include <cmath>

#include "vpo/linalg.hpp"

namespace vpo {

namespace {

Interval mul(const Interval& a, double c) {
    return c >= 0 ? Interval{a.lo * c, a.hi * c} : Interval{a.hi * c, a.lo * c};
}

Interval add(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval hull_product(const Interval& a, const Interval& b) {
    const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    Interval out{c[0], c[0]};
    for (double v : c) {
        out.lo = std::min(out.lo, v);
        out.hi = std::max(out.hi, v);
    }
    return out;
}

Interval square(const Interval& a) {
    if (a.lo >= 0) return {a.lo * a.lo, a.hi * a.hi};
    if (a.hi <= 0) return {a.hi * a.hi, a.lo * a.lo};
    return {0.0, std::max(a.lo * a.lo, a.hi * a.hi)};
}

std::vector<Interval> interval_matvec(const Matrix& a, const std::vector<Interval>& x) {
    std::vector<Interval> out(a.rows(), Interval{0.0, 0.0});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) out[i] = add(out[i], mul(x[j], a(i, j)));
    return out;
}

}  // namespace

TaylorData taylor_at(const OperatingPoint& op) {
    TaylorData t;
    t.branch.resize(op.l.size());
    for (std::size_t b = 0; b < op.l.size(); ++b) {
        const double v = op.V[b];
        if (!(v > 0.0)) throw EnvelopeError("non-positive base squared voltage on branch " + std::to_string(b));
        BranchTaylor& e = t.branch[b];
        e.P0 = op.P[b];
        e.Q0 = op.Q[b];
        e.v0 = v;
        e.l0 = op.l[b];
        const double n0 = e.P0 * e.P0 + e.Q0 * e.Q0;
        e.jac = {2.0 * e.P0 / v, 2.0 * e.Q0 / v, -n0 / (v * v)};
        e.hess = {{{2.0 / v, 0.0, -2.0 * e.P0 / (v * v)},
                   {0.0, 2.0 / v, -2.0 * e.Q0 / (v * v)},
                   {-2.0 * e.P0 / (v * v), -2.0 * e.Q0 / (v * v), 2.0 * n0 / (v * v * v)}}};

        Matrix h(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    e.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const Vec eig = symmetric_eigenvalues(h);
        e.eigenvalues = {eig[0], eig[1], eig[2]};
        const double scale = 2.0 / v;
        if (eig[0] < -1e-10 * scale || std::fabs(eig[0]) > 1e-10 * std::max(1.0, scale) ||
            eig[1] <= 0.0 || eig[2] <= 0.0)
            throw EnvelopeError("branch Hessian failed the (0, +, +) spectrum check");
    }
    return t;
}

DeltaBox delta_box(const Feeder& feeder, const DistFlowMatrices& m, const OperatingPoint& op,
                   const DeviceSetting& base) {
    const std::size_t n = static_cast<std::size_t>(feeder.n);
    DeltaBox box;
    box.node_dq.assign(n, Interval{0.0, 0.0});
    box.node_dv.assign(n, Interval{0.0, 0.0});
    box.branch.assign(n, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});

    // Injection deltas from DER ranges and full capacitor swing.
    for (std::size_t i = 0; i < feeder.ders.size(); ++i) {
        const auto& d = feeder.ders[i];
        Interval dq{d.q_min - base.q_g[i], d.q_max - base.q_g[i]};
        box.node_dq[static_cast<std::size_t>(d.node - 1)] =
            add(box.node_dq[static_cast<std::size_t>(d.node - 1)], dq);
    }
    for (std::size_t i = 0; i < feeder.caps.size(); ++i) {
        const auto& c = feeder.caps[i];
        const std::size_t k = static_cast<std::size_t>(c.node - 1);
        const double base_inj = op.V[k] * c.admittance_of(base.cap_units[i]);
        const double max_inj = feeder.v_max[k] * c.total_admittance();
        const double min_inj = 0.0;  // all units off
        box.node_dq[k] = add(box.node_dq[k], Interval{min_inj - base_inj, max_inj - base_inj});
    }

    std::vector<Interval> dQ = interval_matvec(m.C, box.node_dq);
    std::vector<Interval> dv = interval_matvec(m.M_q, box.node_dq);

    // Tap swing folded into downstream squared voltages. Ascending branch
    // order guarantees the parent interval already carries upstream taps.
    for (std::size_t oi = 0; oi < feeder.oltcs.size(); ++oi) {
        const auto& o = feeder.oltcs[oi];
        const std::size_t b = static_cast<std::size_t>(o.branch);
        const int child = o.branch + 1;
        const int up = feeder.parent[static_cast<std::size_t>(child)];
        const double t_lo = 1.0 + o.tau * o.n_min;
        const double t_hi = 1.0 + o.tau * o.n_max;
        const Interval t2{t_lo * t_lo, t_hi * t_hi};
        const double v_up_base = up == 0 ? op.v0 : op.V[static_cast<std::size_t>(up - 1)];
        Interval v_up{v_up_base, v_up_base};
        if (up != 0) v_up = add(v_up, dv[static_cast<std::size_t>(up - 1)]);
        const double t_base = 1.0 + o.tau * base.taps[oi];
        const double phi_base = (t_base * t_base - 1.0) * v_up_base;
        Interval phi = hull_product(Interval{t2.lo - 1.0, t2.hi - 1.0}, v_up);
        Interval dphi{phi.lo - phi_base, phi.hi - phi_base};
        // (C^T e_b dphi)_k adds dphi to the branch's own child and everything below.
        for (std::size_t k = 0; k < n; ++k)
            if (m.C(b, k) != 0.0) dv[k] = add(dv[k], mul(dphi, m.C(b, k)));
    }

    // One refinement pass for loss-driven flow shifts: bound the current swing
    // from the injection-driven box, then push it through D_R, D_X and H.
    std::vector<Interval> dl(n, Interval{0.0, 0.0});
    for (std::size_t b = 0; b < n; ++b) {
        const Interval p_range{op.P[b], op.P[b]};  // p is fixed; dP first pass is 0
        const Interval q_range = add(Interval{op.Q[b], op.Q[b]}, dQ[b]);
        const Interval v_range = add(Interval{op.V[b], op.V[b]}, dv[b]);
        if (v_range.lo <= 1e-6) throw EnvelopeError("voltage interval collapsed while building the box");
        const Interval num = add(square(p_range), square(q_range));
        Interval l_range{num.lo / v_range.hi, num.hi / v_range.lo};
        dl[b] = Interval{l_range.lo - op.l[b], l_range.hi - op.l[b]};
    }
    std::vector<Interval> neg_dl(n);
    for (std::size_t b = 0; b < n; ++b) neg_dl[b] = Interval{-dl[b].hi, -dl[b].lo};
    const std::vector<Interval> dP_loss = interval_matvec(m.D_R, neg_dl);
    const std::vector<Interval> dQ_loss = interval_matvec(m.D_X, neg_dl);
    const std::vector<Interval> dv_loss = interval_matvec(m.H, neg_dl);

    for (std::size_t b = 0; b < n; ++b) {
        box.branch[b][0] = dP_loss[b];
        box.branch[b][1] = add(dQ[b], dQ_loss[b]);
        box.branch[b][2] = add(dv[b], dv_loss[b]);
        box.node_dv[b] = box.branch[b][2];
    }
    return box;
}

EnvelopeBounds build_envelopes(const TaylorData& taylor, const DeltaBox& box) {
    EnvelopeBounds env;
    env.branch.resize(taylor.branch.size());
    for (std::size_t b = 0; b < taylor.branch.size(); ++b) {
        const BranchTaylor& t = taylor.branch[b];
        EnvelopeBounds::Branch& e = env.branch[b];
        e.l0 = t.l0;
        e.jac = t.jac;
        e.box = box.branch[b];

        // A convex quadratic attains its box maximum at a corner.
        double qb = 0.0;
        for (int corner = 0; corner < 8; ++corner) {
            std::array<double, 3> d{};
            for (int c = 0; c < 3; ++c)
                d[static_cast<std::size_t>(c)] = (corner >> c) & 1
                                                     ? e.box[static_cast<std::size_t>(c)].hi
                                                     : e.box[static_cast<std::size_t>(c)].lo;
            double quad = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    quad += d[static_cast<std::size_t>(i)] *
                            t.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                            d[static_cast<std::size_t>(j)];
            qb = std::max(qb, quad);
        }
        e.quad_bound = qb;

        Matrix h(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    t.hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        Vec vals;
        Matrix vecs;
        symmetric_eigen(h, vals, vecs);
        e.eigenvalues = {vals[0], vals[1], vals[2]};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                e.eigenvectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    vecs(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    return env;
}

std::pair<Vec, Vec> voltage_envelopes(const DistFlowMatrices& m, const HCertificate& cert,
                                      double v0, const Vec& p, const Vec& q, const Vec& l_min,
                                      const Vec& l_max, const OperatingPoint* tap_context) {
    if (!cert.pass) throw EnvelopeError("H certificate failed; voltage envelopes are not valid");
    const std::size_t n = static_cast<std::size_t>(m.n);
    Vec base = m.M_p * p;
    const Vec mqq = m.M_q * q;
    Vec boost(n, 0.0);
    if (tap_context != nullptr) boost = m.C.transposed_times(tap_boost_terms(m, *tap_context));
    const Vec h_lmin = m.H * l_min;
    const Vec h_lmax = m.H * l_max;
    Vec vplus(n), vminus(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double common = v0 + base[k] + mqq[k] + boost[k];
        vplus[k] = common - h_lmin[k];
        vminus[k] = common - h_lmax[k];
    }
    return {vplus, vminus};
}

}  // namespace vpo
