#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vpo/linalg.hpp"

namespace vpo {

struct FeederError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LineClass { Inductive, Capacitive, Resistive };

struct DerSite {
    int node = 0;  // canonical node index, 1..n
    double q_min = 0.0, q_max = 0.0;  // per-unit reactive range
};

struct OltcSite {
    int branch = 0;       // canonical branch index, 0..n-1 (child node = branch+1)
    double tau = 0.00625;  // per-tap ratio step
    int n_min = -16, n_max = 16;
};

struct CapSite {
    int node = 0;
    double y_unit = 0.0;  // per-unit admittance of one unit (uniform banks)
    int n_min = 0, n_max = 0;
    Vec steps;  // per-unit admittance per switching step, size n_max

    double admittance_of(int units) const {
        double b = 0.0;
        for (int p = 0; p < units; ++p) b += steps[static_cast<std::size_t>(p)];
        return b;
    }
    double total_admittance() const { return admittance_of(n_max); }
};

// Immutable radial feeder in canonical topological order: the substation is
// internal node 0 and every branch's upstream node has a smaller index than
// its downstream node. Branch k (0-based) is the unique branch whose
// downstream node is k+1. All quantities are per-unit on (base_mva, base_kv).
struct Feeder {
    std::string name;
    double base_mva = 1.0;
    double base_kv = 1.0;
    double v0 = 1.0;  // substation squared voltage, pu^2

    int n = 0;                      // non-substation node count = branch count
    std::vector<int> parent;        // size n+1, parent[0] = -1
    Vec branch_r, branch_x;         // size n, indexed by downstream node - 1

    Vec v_min, v_max;  // hard squared-voltage limits per node (size n)
    Vec v_lo, v_hi;    // tight positioning bounds per node (size n)
    Vec alpha;         // per-node violation weight (size n)

    std::vector<DerSite> ders;
    std::vector<OltcSite> oltcs;
    std::vector<CapSite> caps;

    LineClass line_class = LineClass::Resistive;
    bool tight_bounds_defaulted = false;

    std::vector<std::int64_t> external_id;  // size n+1, canonical index -> document id

    int branch_of_child(int node) const { return node - 1; }
    int child_of_branch(int b) const { return b + 1; }
    std::int64_t id_of(int idx) const { return external_id.at(static_cast<std::size_t>(idx)); }
    int index_of(std::int64_t id) const;
    const OltcSite* oltc_on_branch(int b) const;
    const CapSite* cap_at_node(int node) const;
    const DerSite* der_at_node(int node) const;

    // Copy with the capacitor list truncated to the first `count` sites
    // (count < 0 keeps all). Used by the --no-caps mode and the scale study.
    Feeder with_cap_count(int count) const;
    Feeder with_uniform_alpha(double a) const;

    double q_to_kvar(double q_pu) const { return q_pu * base_mva * 1000.0; }
};

struct LoadProfile {
    int horizon = 0;
    // period-major: p_load[t][i] is the active net-demand at canonical node
    // i+1 during period t, per-unit. Injections are p = -P_L, q = -Q_L + controls.
    std::vector<Vec> p_load;
    std::vector<Vec> q_load;
};

Feeder parse_feeder(const std::string& json_text);
Feeder parse_feeder_file(const std::string& path);

LoadProfile parse_profile(const std::string& csv_text, const Feeder& feeder);
LoadProfile parse_profile_file(const std::string& path, const Feeder& feeder);

}  // namespace vpo
