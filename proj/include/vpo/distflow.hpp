#pragma once

#include <string>

#include "vpo/feeder.hpp"
#include "vpo/linalg.hpp"

namespace vpo {

// Operator matrices of the branch-flow model in canonical ordering.
//
// With branch k owned by its downstream node k+1 and flows measured at the
// downstream end (signed toward the substation), the model reads
//   P = C p - D_R l,  Q = C q - D_X l,
//   V = v0*1 + M_p p + M_q q - H l  (+ tap boost terms when OLTCs act),
//   l_k * v_{k+1} = P_k^2 + Q_k^2.
struct DistFlowMatrices {
    int n = 0;
    Matrix B;    // (n+1) x n incidence
    Matrix Bn;   // n x n reduced incidence (upper triangular, unit diagonal)
    Matrix A;    // Bn - I : A(i,j) = 1 iff node i+1 is the upstream node of branch j
    Matrix C;    // (I - A)^{-1}, elementwise non-negative
    Matrix D_R, D_X;
    Vec r_diag, x_diag, z2_diag;
    Matrix M_p, M_q, H;
    LineClass line_class = LineClass::Resistive;
};

struct HCertificate {
    bool z_matrix_ok = false;      // off-diagonals of I-A are <= 0
    bool unit_spectrum_ok = false;  // I-A upper triangular with all-ones diagonal
    double det_i_minus_a = 0.0;     // product of diagonal entries
    double h_min = 0.0;
    double c_min = 0.0;
    std::string line_class;
    bool pass = false;
};

// A branch-flow state together with the injections that produced it.
struct OperatingPoint {
    Vec p, q;      // nodal injections (q includes realized cap-bank output)
    Vec P, Q;      // branch flows at the downstream end, toward the substation
    Vec V;         // nodal squared voltages, pu^2
    Vec l;         // branch squared current magnitudes
    double v0 = 1.0;
    Vec tap_sq;    // per-branch applied squared tap ratio (1.0 off OLTC branches)
};

struct ResidualReport {
    double flow_p = 0.0;     // max |P - (C p - D_R l)|
    double flow_q = 0.0;     // max |Q - (C q - D_X l)|
    double voltage = 0.0;    // max |V - (v0*1 + M_p p + M_q q - H l + tap boosts)|
    double current = 0.0;    // max |l v - (P^2 + Q^2)|
};

DistFlowMatrices build_matrices(const Feeder& feeder);

HCertificate certify_h_nonneg(const DistFlowMatrices& m);

ResidualReport residuals(const DistFlowMatrices& m, const OperatingPoint& op);

// Per-branch boost v_child - v_parent contributed by an off-nominal tap,
// (t^2 - 1) * v_parent. Zero on non-OLTC branches.
Vec tap_boost_terms(const DistFlowMatrices& m, const OperatingPoint& op);

}  // namespace vpo
