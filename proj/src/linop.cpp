#include "rns/linop.hpp"

#include <ostream>
#include <string>

namespace rns {

LinearizedBlocks linearized_blocks(const ConsState& U, const ConsState& U_x,
                                   const WaveParams& p)
{
    const double tau = U[0], u = U[1], e = U[2], z = U[3];
    const double u_x = U_x[1], e_x = U_x[2], z_x = U_x[3];
    const auto pr = pressure(tau, e, p.Gamma);
    const double nu = p.nu, kv = p.kappa_v, d = p.d;

    LinearizedBlocks L;
    L.a0 << 1, 0, 0, 0,
            0, 1, 0, 0,
            0, u, 1, 0,
            0, 0, 0, 1;
    L.a1 << 0, -1, 0, 0,
            pr.p_tau, 0, pr.p_e, pr.p_z,
            u * pr.p_tau, pr.p, u * pr.p_e, u * pr.p_z,
            0, 0, 0, 0;
    L.B << 0, 0, 0, 0,
           0, nu / tau, 0, 0,
           0, nu * u / tau, kv / tau, 0,
           0, 0, 0, d / (tau * tau);

    // dB(W, U_x): only tau and u enter B.
    Eigen::Matrix4d dB = Eigen::Matrix4d::Zero();
    dB(1, 0) = -nu * u_x / (tau * tau);
    dB(2, 0) = -nu * u * u_x / (tau * tau) - kv * e_x / (tau * tau);
    dB(3, 0) = -2.0 * d * z_x / (tau * tau * tau);
    dB(2, 1) = nu * u_x / tau;
    L.A = L.a1 - WaveParams::s * L.a0 - dB;

    const double phi = ignition_phi_e(e, p);
    const double dphi = ignition_phi_prime_e(e, p);
    L.E.setZero();
    L.E(2, 2) = p.q * p.k * dphi * z;
    L.E(2, 3) = p.q * p.k * phi;
    L.E(3, 2) = -p.k * dphi * z;
    L.E(3, 3) = -p.k * phi;
    return L;
}

AffineG flux_coefficients(const ConsState& U, const ConsState& U_x, const WaveParams& p)
{
    const LinearizedBlocks L = linearized_blocks(U, U_x, p);
    const double A11 = L.A(0, 0);
    const Eigen::RowVector3d A12 = L.A.block<1, 3>(0, 1);
    const Eigen::Vector3d A21 = L.A.block<3, 1>(1, 0);
    const Eigen::Matrix3d A22 = L.A.block<3, 3>(1, 1);
    const Eigen::Matrix3d a0_22 = L.a0.block<3, 3>(1, 1);
    const Eigen::Matrix3d E22 = L.E.block<3, 3>(1, 1);

    // Inverse of the lower 3x3 block of B in closed form.
    const double tau = U[0], u = U[1];
    Eigen::Matrix3d binv;
    binv << tau / p.nu, 0, 0,
            -tau * u / p.kappa_v, tau / p.kappa_v, 0,
            0, 0, tau * tau / p.d;

    AffineG out;
    // Y1' = -lambda A11^{-1} Y1 + lambda A11^{-1} A12 W2
    out.G1(0, 0) = -1.0 / A11;
    out.G1.block<1, 3>(0, 4) = A12 / A11;
    // Y2' = (E22 - lambda a0_22) W2
    out.G0.block<3, 3>(1, 4) = E22;
    out.G1.block<3, 3>(1, 4) = -a0_22;
    // W2' = b^{-1} A21 A11^{-1} Y1 - b^{-1} Y2 + b^{-1}(A22 - A21 A11^{-1} A12) W2
    out.G0.block<3, 1>(4, 0) = binv * A21 / A11;
    out.G0.block<3, 3>(4, 1) = -binv;
    out.G0.block<3, 3>(4, 4) = binv * (A22 - A21 * A12 / A11);
    return out;
}

SpectralSystem::SpectralSystem(std::shared_ptr<const Profile> profile)
    : profile_{std::move(profile)}
{
    if (!profile_)
        throw DomainError("SpectralSystem needs a profile");
    const WaveParams& p = profile_->params();
    const EndStates& s = profile_->end_states();
    plus_ = flux_coefficients({s.tau_plus, s.u_plus, s.e_plus, s.z_plus}, ConsState::Zero(), p);
    minus_ = flux_coefficients({s.tau_minus, s.u_minus, s.e_minus, s.z_minus},
                               ConsState::Zero(), p);
}

ConsState SpectralSystem::base_state(double x) const
{
    const ProfileState U = profile_->state(x);
    return {U[0], 1.0 - U[0], U[1], U[2]};
}

ConsState SpectralSystem::base_derivative(double x) const
{
    const ProfileState dU = profile_->derivative(x);
    return {dU[0], -dU[0], dU[1], dU[2]};
}

AffineG SpectralSystem::affine(double x) const
{
    const double tol = 1e-12 * (1.0 + std::abs(x));
    if (x < x_min() - tol || x > x_max() + tol)
        throw DomainError("G requested outside the profile domain at x = " + std::to_string(x));
    return flux_coefficients(base_state(x), base_derivative(x), params());
}

void write_G_csv(std::ostream& os, const SpectralSystem& sys, double x, cdouble lambda)
{
    const Matrix7c G = sys.G(x, lambda);
    os << "row,col,re,im\n";
    os.precision(17);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            os << i << ',' << j << ',' << G(i, j).real() << ',' << G(i, j).imag() << '\n';
}

} // namespace rns
