#pragma once

#include "vpo/feeder.hpp"
#include "vpo/mip.hpp"

namespace vpo {

// Binary ladder for one tap changer. K = n_max - n_min adjacency-ordered
// binaries select how many squared-ratio increments are stacked on top of the
// lowest tap; tap position recovers as n_min + sum(s).
//
// The boost expression (t^2 - 1) * v_up is emitted once per voltage copy the
// caller supplies, each with its own product variables but shared binaries,
// so both envelope voltage systems move together under one physical tap.
struct OltcEncoding {
    int branch = 0;
    int n_min = 0;
    double t0_sq = 0.0;        // squared ratio at the lowest tap
    Vec delta_t;               // t_p^2 - t_{p-1}^2 per segment, strictly positive
    std::vector<int> s;        // binary column ids
    // One entry per voltage copy passed to encode_oltc.
    std::vector<std::vector<int>> dv;  // product columns per copy (empty when v_up is constant)
    std::vector<LinExpr> boost;        // (t^2 - 1) * v_up per copy

    int recover_tap(const Vec& x) const {
        int k = 0;
        for (int sj : s) k += x[static_cast<std::size_t>(sj)] > 0.5 ? 1 : 0;
        return n_min + k;
    }
};

// Binary ladder for one capacitor bank: adjacency binaries u_p gate injection
// pieces 0 <= Qs_p <= u_p * v_bar * b_p sandwiched against the node voltage,
// so any integer-feasible point carries exactly Qs_p = u_p * b_p * v_node.
struct CapEncoding {
    int node = 0;
    int n_min = 0;
    Vec steps;              // unit admittances b_p
    std::vector<int> u;     // binary column ids
    std::vector<int> qs;    // injection piece columns
    LinExpr q_cp;           // total injection expression

    int recover_units(const Vec& x) const {
        int k = 0;
        for (int uj : u) k += x[static_cast<std::size_t>(uj)] > 0.5 ? 1 : 0;
        return k;
    }
};

// `v_up_vars` holds one voltage column per envelope copy for the upstream
// node, or an empty vector when the OLTC hangs off the substation (then
// `v_up_const` feeds a purely linear encoding). `v_bar` must dominate every
// admissible upstream squared voltage.
OltcEncoding encode_oltc(MipModel& model, const OltcSite& site, const std::vector<int>& v_up_vars,
                         double v_up_const, double v_bar, const std::string& tag);

CapEncoding encode_cap(MipModel& model, const CapSite& site, int v_node_var, double v_bar,
                       const std::string& tag);

}  // namespace vpo
