#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "rns/linop.hpp"
#include "rns/znd.hpp"

using namespace rns;

namespace {

using Vec4 = Eigen::Vector4d;

// Conservative system a(U)_t + f(U)_x = (B(U) U_x)_x + R(U) for U = (tau, u, e, z).
Vec4 cons_a(const Vec4& U) { return {U[0], U[1], U[2] + 0.5 * U[1] * U[1], U[3]}; }

Vec4 cons_f(const Vec4& U, const WaveParams& p)
{
    const double pr = p.Gamma * U[2] / U[0];
    return {-U[1], pr, U[1] * pr, 0.0};
}

Vec4 diffusive_flux(const Vec4& U, const Vec4& Ux, const WaveParams& p)
{
    const double tau = U[0], u = U[1];
    return {0.0, p.nu * Ux[1] / tau, p.nu * u * Ux[1] / tau + p.kappa_v * Ux[2] / tau,
            p.d * Ux[3] / (tau * tau)};
}

Vec4 source(const Vec4& U, const WaveParams& p)
{
    const double r = p.k * ignition_phi(U[2] / p.c_v, p.E_A, p.T_ig) * U[3];
    return {0.0, 0.0, p.q * r, -r};
}

template <typename F>
Eigen::Matrix4d fd_jacobian(F f, const Vec4& U)
{
    Eigen::Matrix4d J;
    for (int j = 0; j < 4; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(U[j]));
        Vec4 a = U, b = U;
        a[j] += h;
        b[j] -= h;
        J.col(j) = (f(a) - f(b)) / (2.0 * h);
    }
    return J;
}

WaveParams params()
{
    WaveParams p;
    p.E_A = 5.0;
    p.k = calibrate_k(p).k;
    return p;
}

std::shared_ptr<const Profile> profile()
{
    static auto prof = std::make_shared<const Profile>(solve_profile(params(), {}, {}));
    return prof;
}

} // namespace

TEST_SUITE("linop")
{
    TEST_CASE("linearized blocks agree with finite differences")
    {
        const WaveParams p = params();
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> ut(0.2, 1.0), ue(0.1, 1.0), uz(0.0, 1.0),
            ud(-2.0, 2.0);
        for (int i = 0; i < 10; ++i) {
            const double tau = ut(rng);
            const Vec4 U(tau, 1.0 - tau, ue(rng), uz(rng));
            const Vec4 Ux(ud(rng), ud(rng), ud(rng), ud(rng));
            const LinearizedBlocks L = linearized_blocks(U, Ux, p);

            const Eigen::Matrix4d a0 = fd_jacobian([](const Vec4& V) { return cons_a(V); }, U);
            const Eigen::Matrix4d a1 = fd_jacobian([&](const Vec4& V) { return cons_f(V, p); }, U);
            const Eigen::Matrix4d dB =
                fd_jacobian([&](const Vec4& V) { return diffusive_flux(V, Ux, p); }, U);
            const Eigen::Matrix4d E = fd_jacobian([&](const Vec4& V) { return source(V, p); }, U);
            Eigen::Matrix4d B;
            for (int j = 0; j < 4; ++j)
                B.col(j) = diffusive_flux(U, Vec4::Unit(j), p);

            const double scale = 1.0 + E.norm();
            CHECK((L.a0 - a0).norm() <= 1e-5);
            CHECK((L.a1 - a1).norm() <= 1e-5);
            CHECK((L.B - B).norm() <= 1e-12);
            CHECK((L.A - (a1 - a0 - dB)).norm() <= 1e-5);
            CHECK((L.E - E).norm() <= 1e-5 * scale);
        }
    }

    TEST_CASE("G is affine in lambda")
    {
        const SpectralSystem sys(profile());
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (double x : {sys.x_min(), -3.0, 0.0, 0.3, sys.x_max()}) {
            const AffineG g = sys.affine(x);
            const cdouble l1(u(rng), u(rng)), l2(u(rng), u(rng));
            const double t = 0.37;
            const Matrix7c lhs = g(t * l1 + (1.0 - t) * l2);
            const Matrix7c rhs = t * g(l1) + (1.0 - t) * g(l2);
            CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            CHECK((sys.G(x, 0.0) - g.G0.cast<cdouble>()).norm() == 0.0);
            CHECK(g.G0.allFinite());
            CHECK(g.G1.allFinite());
        }
        CHECK_THROWS_AS(sys.affine(sys.x_max() + 1.0), DomainError);
    }

    TEST_CASE("limit matrices obey the dispersion relation")
    {
        // e^{mu x} W0 solves the constant-coefficient problem iff
        // det(mu^2 B - mu A - lambda a0 + E) = 0.
        const SpectralSystem sys(profile());
        const EndStates& s = sys.profile().end_states();
        const WaveParams& p = sys.params();
        for (bool plus : {true, false}) {
            const Vec4 U = plus ? Vec4(s.tau_plus, s.u_plus, s.e_plus, s.z_plus)
                                : Vec4(s.tau_minus, s.u_minus, s.e_minus, s.z_minus);
            const LinearizedBlocks L = linearized_blocks(U, Vec4::Zero(), p);
            const AffineG& g = plus ? sys.affine_plus() : sys.affine_minus();
            for (cdouble lambda : {cdouble(1.0, 0.0), cdouble(0.3, 2.0), cdouble(4.0, -1.0)}) {
                const Eigen::ComplexEigenSolver<Matrix7c> es(g(lambda));
                for (int i = 0; i < 7; ++i) {
                    const cdouble mu = es.eigenvalues()[i];
                    const Eigen::Matrix4cd M = mu * mu * L.B.cast<cdouble>() -
                                               mu * L.A.cast<cdouble>() -
                                               lambda * L.a0.cast<cdouble>() +
                                               L.E.cast<cdouble>();
                    const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(M);
                    const double smin = svd.singularValues()[3];
                    CHECK(smin <= 1e-8 * svd.singularValues()[0]);
                }
            }
        }
    }

    TEST_CASE("end matrices match the interior near the ends")
    {
        const SpectralSystem sys(profile());
        for (cdouble lambda : {cdouble(1.0, 0.0), cdouble(0.5, 3.0)}) {
            CHECK((sys.G(sys.x_max(), lambda) - sys.G_plus(lambda)).norm() <=
                  1e-3 * sys.G_plus(lambda).norm());
            CHECK((sys.G(sys.x_min(), lambda) - sys.G_minus(lambda)).norm() <=
                  1e-3 * sys.G_minus(lambda).norm());
        }
    }
}
