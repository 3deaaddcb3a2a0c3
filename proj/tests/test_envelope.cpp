#include <doctest.h>

#include <array>
#include <cmath>
#include <string>

#include "vpo/envelope.hpp"
#include "vpo/verify.hpp"

using namespace vpo;

namespace {

const std::string kFixtures = FIXTURE_DIR;

OperatingPoint point1(double P, double Q, double v) {
    OperatingPoint op;
    op.P = {P};
    op.Q = {Q};
    op.V = {v};
    op.l = {(P * P + Q * Q) / v};
    op.p = {P};
    op.q = {Q};
    op.v0 = 1.0;
    op.tap_sq = {1.0};
    return op;
}

}  // namespace

TEST_CASE("jacobian at a textbook point") {
    const TaylorData t = taylor_at(point1(1.0, 0.5, 1.0));
    CHECK(t.branch[0].jac[0] == doctest::Approx(2.0));
    CHECK(t.branch[0].jac[1] == doctest::Approx(1.0));
    CHECK(t.branch[0].jac[2] == doctest::Approx(-1.25));
}

TEST_CASE("no-load expansion: zero jacobian, diagonal Hessian") {
    const TaylorData t = taylor_at(point1(0.0, 0.0, 1.0));
    const auto& b = t.branch[0];
    CHECK(b.jac[0] == 0.0);
    CHECK(b.jac[1] == 0.0);
    CHECK(b.jac[2] == 0.0);
    CHECK(b.hess[0][0] == doctest::Approx(2.0));
    CHECK(b.hess[1][1] == doctest::Approx(2.0));
    CHECK(b.hess[2][2] == doctest::Approx(0.0));
    CHECK(b.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Hessian spectrum is (0, +, +) at random base points") {
    Rng rng(123);
    for (int i = 0; i < 50; ++i) {
        const double P = rng.uniform(-0.5, 0.5);
        const double Q = rng.uniform(-0.5, 0.5);
        const double v = rng.uniform(0.8, 1.2);
        const TaylorData t = taylor_at(point1(P, Q, v));
        const auto& e = t.branch[0].eigenvalues;
        CHECK(std::fabs(e[0]) <= 1e-10);
        CHECK(e[1] > 0.0);
        CHECK(e[2] > 0.0);
    }
}

TEST_CASE("non-positive base voltage is rejected") {
    OperatingPoint op = point1(0.1, 0.1, 1.0);
    op.V[0] = 0.0;
    CHECK_THROWS_AS(taylor_at(op), EnvelopeError);
}

TEST_CASE("box is zero-width without devices") {
    const std::string doc = R"({"base_mva":1,"base_kv":1,"v0_pu":1.0,
      "nodes":[{"id":1},{"id":2}],
      "branches":[{"id":0,"from":0,"to":1,"r_pu":0.01,"x_pu":0.02},
                   {"id":1,"from":1,"to":2,"r_pu":0.01,"x_pu":0.02}]})";
    const Feeder f = parse_feeder(doc);
    const DistFlowMatrices m = build_matrices(f);
    const OperatingPoint op = solve_loadflow(f, {-0.02, -0.03}, {-0.01, -0.01},
                                             DeviceSetting::neutral(f));
    const DeltaBox box = delta_box(f, m, op, DeviceSetting::neutral(f));
    for (const auto& b : box.branch)
        for (const auto& iv : b) CHECK(iv.width() == doctest::Approx(0.0).epsilon(1e-15));

    const TaylorData t = taylor_at(op);
    const EnvelopeBounds env = build_envelopes(t, box);
    for (std::size_t b = 0; b < env.branch.size(); ++b) {
        CHECK(env.l_min_at(b, {0, 0, 0}) == doctest::Approx(op.l[b]));
        CHECK(env.l_max_at(b, {0, 0, 0}) == doctest::Approx(op.l[b]));
    }
}

TEST_CASE("single DER flow interval matches hand propagation, loss pad stays small") {
    const Feeder f = parse_feeder_file(kFixtures + "/onebranch.json");
    const DistFlowMatrices m = build_matrices(f);
    const OperatingPoint op = solve_loadflow(f, {-0.03}, {-0.04}, DeviceSetting::neutral(f));
    const DeltaBox box = delta_box(f, m, op, DeviceSetting::neutral(f));

    // dQ spans the DER range exactly (n=1 has no downstream losses to fold).
    CHECK(box.branch[0][1].lo == doctest::Approx(-0.1));
    CHECK(box.branch[0][1].hi == doctest::Approx(0.1));
    // dv = M_q * dq plus a small one-branch loss padding.
    const double mq = m.M_q(0, 0);
    CHECK(box.branch[0][2].lo <= -0.1 * mq + 1e-12);
    CHECK(box.branch[0][2].hi >= 0.1 * mq - 1e-12);
    CHECK(std::fabs(box.branch[0][2].lo - (-0.1 * mq)) < 5e-5);
    CHECK(std::fabs(box.branch[0][2].hi - 0.1 * mq) < 5e-5);
}

TEST_CASE("quad bound equals the box-corner maximum verified on a 21^3 grid") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    Vec p(prof.p_load[18]), q(prof.q_load[18]);
    for (auto& v : p) v = -v;
    for (auto& v : q) v = -v;
    const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
    const TaylorData t = taylor_at(op);
    const DeltaBox box = delta_box(f, m, op, DeviceSetting::neutral(f));
    const EnvelopeBounds env = build_envelopes(t, box);

    for (std::size_t b = 0; b < env.branch.size(); ++b) {
        const auto& e = env.branch[b];
        double grid_max = 0.0;
        for (int i = 0; i < 21; ++i)
            for (int j = 0; j < 21; ++j)
                for (int k = 0; k < 21; ++k) {
                    const std::array<double, 3> d{
                        e.box[0].lo + e.box[0].width() * i / 20.0,
                        e.box[1].lo + e.box[1].width() * j / 20.0,
                        e.box[2].lo + e.box[2].width() * k / 20.0};
                    double quad = 0.0;
                    for (int a = 0; a < 3; ++a)
                        for (int c = 0; c < 3; ++c)
                            quad += d[static_cast<std::size_t>(a)] *
                                    t.branch[b].hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] *
                                    d[static_cast<std::size_t>(c)];
                    grid_max = std::max(grid_max, quad);
                }
        CHECK(grid_max <= e.quad_bound + 1e-12);
        CHECK(e.quad_bound <= grid_max * (1.0 + 1e-9) + 1e-15);  // corner grid hits the max
    }
}

TEST_CASE("tangent underestimate holds along a full DER sweep") {
    for (const char* fx : {"/onebranch", "/threenode"}) {
        const Feeder f = parse_feeder_file(kFixtures + fx + std::string(".json"));
        const LoadProfile prof = parse_profile_file(kFixtures + fx + std::string(".csv"), f);
        const UnderboundReport rep = check_underbound(f, prof.p_load[0], prof.q_load[0], 101);
        CHECK(rep.points == 101);
        CHECK(rep.violations == 0);
        CHECK(rep.worst_excess <= 1e-10);
    }
}

TEST_CASE("sampled settings stay inside the envelopes (small batch)") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    const SandwichReport rep = check_sandwich(f, prof.p_load[18], prof.q_load[18], 100, 42);
    CHECK(rep.loadflow_failures == 0);
    CHECK(rep.l_violations == 0);
    CHECK(rep.v_violations == 0);
    CHECK(rep.box_containment >= 0.999);
}

TEST_CASE("second-order model tracks the oracle across a wide reactive sweep") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    Vec p(prof.p_load[18]), q0(prof.q_load[18]);
    for (auto& v : p) v = -v;
    for (auto& v : q0) v = -v;
    const OperatingPoint base = solve_loadflow(f, p, q0, DeviceSetting::neutral(f));
    const TaylorData t = taylor_at(base);

    // Inject at document node 2 and watch the branch feeding it. 1000 kVAr on
    // a 5 MVA base is 0.2 pu; the declared DER range corresponds to 0.02 pu.
    const int node2 = f.index_of(2);
    const std::size_t branch = static_cast<std::size_t>(node2 - 1);
    for (double inj = -0.2; inj <= 0.2001; inj += 0.02) {
        Vec q = q0;
        q[static_cast<std::size_t>(node2 - 1)] += inj;
        const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
        const std::array<double, 3> d{op.P[branch] - base.P[branch], op.Q[branch] - base.Q[branch],
                                      op.V[branch] - base.V[branch]};
        const double approx = t.branch[branch].model2(d);
        const double rel = std::fabs(approx - op.l[branch]) / std::max(op.l[branch], 1e-12);
        if (std::fabs(inj) <= 0.02 + 1e-9) CHECK(rel <= 0.05);
        CHECK(rel <= 0.30);  // still tracking over the 10x wider sweep
    }
}

TEST_CASE("collapsed current bounds collapse the voltage envelopes") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    const HCertificate cert = certify_h_nonneg(m);
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    Vec p(prof.p_load[6]), q(prof.q_load[6]);
    for (auto& v : p) v = -v;
    for (auto& v : q) v = -v;
    const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
    const auto [vplus, vminus] = voltage_envelopes(m, cert, f.v0, op.p, op.q, op.l, op.l, &op);
    for (std::size_t k = 0; k < vplus.size(); ++k) {
        CHECK(vplus[k] == doctest::Approx(op.V[k]).epsilon(1e-10));
        CHECK(vminus[k] == doctest::Approx(op.V[k]).epsilon(1e-10));
    }
}

TEST_CASE("a failed certificate blocks envelope evaluation") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    HCertificate cert = certify_h_nonneg(m);
    cert.pass = false;
    const std::size_t n = static_cast<std::size_t>(f.n);
    CHECK_THROWS_AS(
        voltage_envelopes(m, cert, f.v0, Vec(n, 0.0), Vec(n, 0.0), Vec(n, 0.0), Vec(n, 0.0)),
        EnvelopeError);
}

TEST_CASE("eigen-split secant surrogate dominates the quadratic on the box") {
    // The piecewise mode replaces the constant corner bound with
    // sum_d lambda_d * chord(w_d^2); the chords over-estimate each square, so
    // the composite must dominate d'Hd everywhere on the box.
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    Vec p(prof.p_load[18]), q(prof.q_load[18]);
    for (auto& v : p) v = -v;
    for (auto& v : q) v = -v;
    const OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
    const TaylorData t = taylor_at(op);
    const DeltaBox box = delta_box(f, m, op, DeviceSetting::neutral(f));
    const EnvelopeBounds env = build_envelopes(t, box);

    const int segments = 8;
    auto chord_value = [&](double lo, double hi, double w) {
        // Piecewise-linear interpolant of w^2 = max over the secant chords.
        double best = -1e300;
        for (int s = 0; s < segments; ++s) {
            const double x0 = lo + (hi - lo) * s / segments;
            const double x1 = lo + (hi - lo) * (s + 1) / segments;
            best = std::max(best, (x0 + x1) * w - x0 * x1);
        }
        return best;
    };

    Rng rng(99);
    for (std::size_t b = 0; b < env.branch.size(); ++b) {
        const auto& e = env.branch[b];
        for (int trial = 0; trial < 40; ++trial) {
            std::array<double, 3> d{};
            for (int c = 0; c < 3; ++c)
                d[static_cast<std::size_t>(c)] =
                    rng.uniform(e.box[static_cast<std::size_t>(c)].lo, e.box[static_cast<std::size_t>(c)].hi);
            double quad = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    quad += d[static_cast<std::size_t>(i)] *
                            t.branch[b].hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                            d[static_cast<std::size_t>(j)];
            double surrogate = 0.0;
            for (int dir = 0; dir < 3; ++dir) {
                const double lambda = e.eigenvalues[static_cast<std::size_t>(dir)];
                if (lambda <= 1e-14) continue;
                double w = 0.0;
                Interval range{0.0, 0.0};
                for (int c = 0; c < 3; ++c) {
                    const double evc =
                        e.eigenvectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(dir)];
                    w += evc * d[static_cast<std::size_t>(c)];
                    const Interval& bi = e.box[static_cast<std::size_t>(c)];
                    range.lo += std::min(evc * bi.lo, evc * bi.hi);
                    range.hi += std::max(evc * bi.lo, evc * bi.hi);
                }
                surrogate += lambda * chord_value(range.lo, range.hi, w);
            }
            CHECK(surrogate >= quad - 1e-12);
        }
    }
}
