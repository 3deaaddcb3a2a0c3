#include <doctest.h>

#include <cmath>
#include <string>

#include "vpo/acpf.hpp"
#include "vpo/distflow.hpp"
#include "vpo/feeder.hpp"

using namespace vpo;

namespace {

const std::string kFixtures = FIXTURE_DIR;

Feeder chain2(double r1, double x1, double r2, double x2) {
    std::string doc = R"({"base_mva":1,"base_kv":1,"v0_pu":1.0,
      "nodes":[{"id":1},{"id":2}],
      "branches":[
        {"id":0,"from":0,"to":1,"r_pu":)" + std::to_string(r1) + R"(,"x_pu":)" + std::to_string(x1) + R"(},
        {"id":1,"from":1,"to":2,"r_pu":)" + std::to_string(r2) + R"(,"x_pu":)" + std::to_string(x2) + R"(}]})";
    return parse_feeder(doc);
}

}  // namespace

TEST_CASE("single-branch operator matrices reduce to scalars") {
    const double r = 0.013, x = 0.021;
    const std::string doc = R"({"base_mva":1,"base_kv":1,"v0_pu":1.0,
      "nodes":[{"id":1}],
      "branches":[{"id":0,"from":0,"to":1,"r_pu":)" + std::to_string(r) +
                            R"(,"x_pu":)" + std::to_string(x) + R"(}]})";
    const DistFlowMatrices m = build_matrices(parse_feeder(doc));
    CHECK(m.A(0, 0) == 0.0);
    CHECK(m.C(0, 0) == doctest::Approx(1.0));
    CHECK(m.D_R(0, 0) == doctest::Approx(0.0));
    CHECK(m.D_X(0, 0) == doctest::Approx(0.0));
    CHECK(m.M_p(0, 0) == doctest::Approx(2 * r));
    CHECK(m.M_q(0, 0) == doctest::Approx(2 * x));
    CHECK(m.H(0, 0) == doctest::Approx(r * r + x * x));
}

TEST_CASE("two-branch chain: H strictly positive in all four entries") {
    const double r1 = 0.01, x1 = 0.02, r2 = 0.015, x2 = 0.025;
    const DistFlowMatrices m = build_matrices(chain2(r1, x1, r2, x2));
    // Direct evaluation: H = C' (2(R D_R + X D_X) + Z^2).
    CHECK(m.H(0, 0) == doctest::Approx(r1 * r1 + x1 * x1));
    CHECK(m.H(0, 1) == doctest::Approx(2 * (r1 * r2 + x1 * x2)));
    CHECK(m.H(1, 0) == doctest::Approx(r1 * r1 + x1 * x1));
    CHECK(m.H(1, 1) == doctest::Approx(2 * (r1 * r2 + x1 * x2) + r2 * r2 + x2 * x2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(m.H(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) > 0.0);
}

TEST_CASE("purely resistive feeder has a zero M_q") {
    const DistFlowMatrices m = build_matrices(chain2(0.01, 0.0, 0.02, 0.0));
    CHECK(m.line_class == LineClass::Resistive);
    CHECK(m.M_q.max_abs() == 0.0);
}

TEST_CASE("inverse identity, positivity and determinant") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee37.json");
    const DistFlowMatrices m = build_matrices(f);
    const Matrix i_minus_a = Matrix::identity(static_cast<std::size_t>(m.n)) - m.A;
    const Matrix prod = i_minus_a * m.C;
    double max_dev = 0.0;
    double det = 1.0;
    for (int i = 0; i < m.n; ++i) {
        det *= i_minus_a(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
        for (int j = 0; j < m.n; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            max_dev = std::max(max_dev,
                               std::fabs(prod(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - want));
        }
    }
    CHECK(max_dev <= 1e-12);
    CHECK(det == doctest::Approx(1.0));
    CHECK(m.C.min_entry() >= 0.0);
    CHECK(m.H.min_entry() >= 0.0);
    CHECK(m.M_p.min_entry() >= 0.0);
    CHECK(m.M_q.min_entry() >= 0.0);
}

TEST_CASE("certificate passes on the shipped feeders") {
    for (const char* name : {"/ieee13.json", "/ieee37.json", "/threenode.json"}) {
        const Feeder f = parse_feeder_file(kFixtures + name);
        const HCertificate cert = certify_h_nonneg(build_matrices(f));
        CHECK(cert.pass);
        CHECK(cert.z_matrix_ok);
        CHECK(cert.unit_spectrum_ok);
        CHECK(cert.det_i_minus_a == doctest::Approx(1.0));
        CHECK(cert.h_min >= -1e-12);
    }
}

TEST_CASE("capacitive single branch still certifies") {
    const std::string doc = R"({"base_mva":1,"base_kv":1,"v0_pu":1.0,
      "nodes":[{"id":1}],
      "branches":[{"id":0,"from":0,"to":1,"r_pu":0.01,"x_pu":-0.02}]})";
    const Feeder f = parse_feeder(doc);
    CHECK(f.line_class == LineClass::Capacitive);
    const DistFlowMatrices m = build_matrices(f);
    const HCertificate cert = certify_h_nonneg(m);
    CHECK(cert.pass);
    CHECK(m.H(0, 0) == doctest::Approx(0.01 * 0.01 + 0.02 * 0.02));
}

TEST_CASE("an injected negative H entry fails the certificate") {
    DistFlowMatrices m = build_matrices(parse_feeder_file(kFixtures + "/ieee13.json"));
    m.H(3, 5) = -1e-6;
    CHECK_FALSE(certify_h_nonneg(m).pass);
}

TEST_CASE("residuals at the no-load fixed point are zero") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    OperatingPoint op;
    const std::size_t n = static_cast<std::size_t>(f.n);
    op.p.assign(n, 0.0);
    op.q.assign(n, 0.0);
    op.P.assign(n, 0.0);
    op.Q.assign(n, 0.0);
    op.l.assign(n, 0.0);
    op.V.assign(n, f.v0);
    op.v0 = f.v0;
    op.tap_sq.assign(n, 1.0);
    const ResidualReport rep = residuals(m, op);
    CHECK(rep.flow_p == 0.0);
    CHECK(rep.flow_q == 0.0);
    CHECK(rep.voltage == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.current == 0.0);
}

TEST_CASE("oracle points satisfy the linear model; a current perturbation shows up") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    const LoadProfile prof = parse_profile_file(kFixtures + "/ieee13_day.csv", f);
    Vec p(prof.p_load[18]), q(prof.q_load[18]);
    for (auto& v : p) v = -v;
    for (auto& v : q) v = -v;
    OperatingPoint op = solve_loadflow(f, p, q, DeviceSetting::neutral(f));
    ResidualReport rep = residuals(m, op);
    CHECK(rep.flow_p <= 1e-9);
    CHECK(rep.flow_q <= 1e-9);
    CHECK(rep.voltage <= 1e-8);
    CHECK(rep.current <= 1e-8);

    op.l[4] += 0.01;
    rep = residuals(m, op);
    CHECK(rep.current == doctest::Approx(0.01 * op.V[4]).epsilon(1e-4));
}

TEST_CASE("dimension mismatch is rejected by the residual check") {
    const Feeder f = parse_feeder_file(kFixtures + "/ieee13.json");
    const DistFlowMatrices m = build_matrices(f);
    OperatingPoint op;
    op.p.assign(3, 0.0);  // wrong length on purpose
    op.q.assign(3, 0.0);
    op.P.assign(3, 0.0);
    op.Q.assign(3, 0.0);
    op.V.assign(3, 1.0);
    op.l.assign(3, 0.0);
    CHECK_THROWS_AS(residuals(m, op), std::invalid_argument);
}
