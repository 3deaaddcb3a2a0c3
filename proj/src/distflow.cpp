#include "vpo/distflow.hpp"

#include <cmath>
#include <stdexcept>

namespace vpo {

DistFlowMatrices build_matrices(const Feeder& feeder) {
    const int n = feeder.n;
    DistFlowMatrices m;
    m.n = n;
    m.line_class = feeder.line_class;

    m.B = Matrix(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
        const int child = b + 1;
        const int up = feeder.parent[static_cast<std::size_t>(child)];
        m.B(static_cast<std::size_t>(child), static_cast<std::size_t>(b)) = 1.0;
        m.B(static_cast<std::size_t>(up), static_cast<std::size_t>(b)) = 1.0;
    }
    m.Bn = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < n; ++b)
            m.Bn(static_cast<std::size_t>(i), static_cast<std::size_t>(b)) =
                m.B(static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(b));
    m.A = m.Bn - Matrix::identity(static_cast<std::size_t>(n));

    // Canonical ordering puts every upstream node before its children, so
    // I - A is upper triangular with unit diagonal; anything else is a bug.
    const Matrix i_minus_a = Matrix::identity(static_cast<std::size_t>(n)) - m.A;
    for (int i = 0; i < n; ++i) {
        if (i_minus_a(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) != 1.0)
            throw std::logic_error("ordering bug: I - A diagonal is not all ones");
        for (int j = 0; j < i; ++j)
            if (i_minus_a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) != 0.0)
                throw std::logic_error("ordering bug: I - A is not upper triangular");
    }

    m.C = invert_upper_triangular(i_minus_a);

    m.r_diag = feeder.branch_r;
    m.x_diag = feeder.branch_x;
    m.z2_diag.resize(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b)
        m.z2_diag[static_cast<std::size_t>(b)] =
            feeder.branch_r[static_cast<std::size_t>(b)] * feeder.branch_r[static_cast<std::size_t>(b)] +
            feeder.branch_x[static_cast<std::size_t>(b)] * feeder.branch_x[static_cast<std::size_t>(b)];

    const Matrix R = Matrix::diag(m.r_diag);
    const Matrix X = Matrix::diag(m.x_diag);
    const Matrix Z2 = Matrix::diag(m.z2_diag);
    const Matrix Ct = m.C.transposed();

    m.D_R = m.C * (m.A * R);
    m.D_X = m.C * (m.A * X);
    Matrix mp = Ct * (R * m.C);
    Matrix mq = Ct * (X * m.C);
    for (std::size_t i = 0; i < mp.rows(); ++i)
        for (std::size_t j = 0; j < mp.cols(); ++j) {
            mp(i, j) *= 2.0;
            mq(i, j) *= 2.0;
        }
    m.M_p = std::move(mp);
    m.M_q = std::move(mq);

    Matrix inner = R * m.D_R + X * m.D_X;
    for (std::size_t i = 0; i < inner.rows(); ++i)
        for (std::size_t j = 0; j < inner.cols(); ++j) inner(i, j) *= 2.0;
    m.H = Ct * (inner + Z2);

    return m;
}

HCertificate certify_h_nonneg(const DistFlowMatrices& m) {
    HCertificate cert;
    const int n = m.n;

    cert.z_matrix_ok = true;
    cert.unit_spectrum_ok = true;
    cert.det_i_minus_a = 1.0;
    for (int i = 0; i < n; ++i) {
        const double dii = 1.0 - m.A(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
        cert.det_i_minus_a *= dii;
        if (dii != 1.0) cert.unit_spectrum_ok = false;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double off = -m.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (off > 0.0) cert.z_matrix_ok = false;
            if (j < i && off != 0.0) cert.unit_spectrum_ok = false;  // must stay triangular
        }
    }

    cert.h_min = m.H.min_entry();
    cert.c_min = m.C.min_entry();
    switch (m.line_class) {
        case LineClass::Inductive: cert.line_class = "inductive"; break;
        case LineClass::Capacitive: cert.line_class = "capacitive"; break;
        case LineClass::Resistive: cert.line_class = "resistive"; break;
    }

    // -1e-12 absorbs floating-point dust on exact-arithmetic zeros.
    cert.pass = cert.z_matrix_ok && cert.unit_spectrum_ok && cert.h_min >= -1e-12 && cert.c_min >= -1e-12;
    return cert;
}

Vec tap_boost_terms(const DistFlowMatrices& m, const OperatingPoint& op) {
    Vec phi(static_cast<std::size_t>(m.n), 0.0);
    if (op.tap_sq.empty()) return phi;
    for (int b = 0; b < m.n; ++b) {
        const double tsq = op.tap_sq[static_cast<std::size_t>(b)];
        if (tsq == 1.0) continue;
        // Upstream node of branch b: the unique i with A(i, b) = 1, or the
        // substation when no row is set.
        double v_up = op.v0;
        for (int i = 0; i < m.n; ++i)
            if (m.A(static_cast<std::size_t>(i), static_cast<std::size_t>(b)) != 0.0)
                v_up = op.V[static_cast<std::size_t>(i)];
        phi[static_cast<std::size_t>(b)] = (tsq - 1.0) * v_up;
    }
    return phi;
}

ResidualReport residuals(const DistFlowMatrices& m, const OperatingPoint& op) {
    const std::size_t n = static_cast<std::size_t>(m.n);
    if (op.p.size() != n || op.q.size() != n || op.P.size() != n || op.Q.size() != n ||
        op.V.size() != n || op.l.size() != n)
        throw std::invalid_argument("operating point dimension mismatch");

    ResidualReport rep;

    Vec cp = m.C * op.p;
    Vec drl = m.D_R * op.l;
    Vec cq = m.C * op.q;
    Vec dxl = m.D_X * op.l;
    for (std::size_t k = 0; k < n; ++k) {
        rep.flow_p = std::max(rep.flow_p, std::fabs(op.P[k] - (cp[k] - drl[k])));
        rep.flow_q = std::max(rep.flow_q, std::fabs(op.Q[k] - (cq[k] - dxl[k])));
    }

    Vec v_model = m.M_p * op.p;
    Vec mq_q = m.M_q * op.q;
    Vec hl = m.H * op.l;
    Vec boost = m.C.transposed_times(tap_boost_terms(m, op));
    for (std::size_t k = 0; k < n; ++k) {
        v_model[k] += op.v0 + mq_q[k] - hl[k] + boost[k];
        rep.voltage = std::max(rep.voltage, std::fabs(op.V[k] - v_model[k]));
    }

    for (std::size_t k = 0; k < n; ++k) {
        const double lhs = op.l[k] * op.V[k];
        const double rhs = op.P[k] * op.P[k] + op.Q[k] * op.Q[k];
        rep.current = std::max(rep.current, std::fabs(lhs - rhs));
    }
    return rep;
}

}  // namespace vpo
