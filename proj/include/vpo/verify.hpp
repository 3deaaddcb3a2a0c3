#pragma once

#include <cstdint>

#include "vpo/envelope.hpp"
#include "vpo/vpo.hpp"

namespace vpo {

// Deterministic generator used everywhere randomness is needed; keeps sampled
// settings identical across platforms for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

DeviceSetting sample_setting(const Feeder& feeder, Rng& rng);

struct SandwichReport {
    int samples = 0;
    int loadflow_failures = 0;
    int v_violations = 0;
    int l_violations = 0;
    double worst_v_excess = 0.0;  // most positive envelope breach, pu^2
    double worst_l_excess = 0.0;
    int box_misses = 0;  // samples whose realized deviation escapes the box
    double box_containment = 1.0;
};

// Samples device settings uniformly over their declared ranges, runs the
// exact load flow for each, and checks the current and voltage envelopes at
// the realized deviations. Tolerances follow the module contracts:
// 1e-10 on currents, 1e-8 pu^2 on voltages.
SandwichReport check_sandwich(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                              int samples, std::uint64_t seed, double lf_tol = 1e-8);

struct UnderboundReport {
    int points = 0;
    int violations = 0;
    double worst_excess = 0.0;  // max of (l_min - l_true)
};

// Grid sweep of the first DER's setpoint; verifies the tangent-plane
// underestimate of l on every branch at every grid point.
UnderboundReport check_underbound(const Feeder& feeder, const Vec& p_load, const Vec& q_load,
                                  int grid_points);

// Random inductive tree for the certificate stress test: n branches, random
// parents, r in (0, 0.1], x in [0, 0.1].
Feeder random_inductive_tree(int n, Rng& rng);

}  // namespace vpo
