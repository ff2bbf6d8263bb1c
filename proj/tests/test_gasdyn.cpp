#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "rns/gasdyn.hpp"

using namespace rns;

namespace {

// Stationary fluxes of mass, momentum and total energy (reactant included)
// in the frame of the wave, written out directly from the conservation laws.
Eigen::Vector3d stationary_flux(double tau, double e, double z, double q, double Gamma)
{
    const double u = 1.0 - tau;
    const double p = Gamma * e / tau;
    return {-tau - u, -u + p, -(e + 0.5 * u * u + q * z) + u * p};
}

} // namespace

TEST_SUITE("gasdyn")
{
    TEST_CASE("pressure and partials")
    {
        const auto a = pressure(1.0, 6.23e-2, 0.2);
        CHECK(a.p == doctest::Approx(1.246e-2).epsilon(1e-12));
        const auto b = pressure(2.57e-1, 9.71e-1, 0.2);
        CHECK(b.p == doctest::Approx(7.556e-1).epsilon(1e-4));
        CHECK(b.p_z == 0.0);
        CHECK(b.p_tau == doctest::Approx(-0.2 * 9.71e-1 / (2.57e-1 * 2.57e-1)));
        CHECK_THROWS_AS(pressure(0.0, 1.0, 0.2), DomainError);
        CHECK_THROWS_AS(pressure(1.0, -1.0, 0.2), DomainError);
    }

    TEST_CASE("ignition function")
    {
        CHECK(ignition_phi(0.1, 3.0, 0.1) == 0.0);
        CHECK(ignition_phi(0.05, 3.0, 0.1) == 0.0);
        CHECK(ignition_phi(0.1 + 3.0, 3.0, 0.1) == doctest::Approx(std::exp(-1.0)));
        CHECK(ignition_phi(1e8, 3.0, 0.1) == doctest::Approx(1.0).epsilon(1e-6));

        WaveParams p;
        p.E_A = 5.0;
        double prev = 0.0;
        for (double e = p.T_ig + 0.01; e < 2.0; e += 0.05) {
            const double h = 1e-6 * e;
            const double fd =
                (ignition_phi_e(e + h, p) - ignition_phi_e(e - h, p)) / (2.0 * h);
            CHECK(ignition_phi_prime_e(e, p) == doctest::Approx(fd).epsilon(1e-6));
            CHECK(ignition_phi_e(e, p) >= prev);
            prev = ignition_phi_e(e, p);
        }
    }

    TEST_CASE("burned end state matches the reference values")
    {
        const EndStates s = rh_end_state(6.23e-2, 6.23e-1, 0.2);
        CHECK(std::abs(s.tau_minus - 0.257) <= 5e-3);
        CHECK(std::abs(s.u_minus - 0.743) <= 5e-3);
        CHECK(std::abs(s.e_minus - 0.971) <= 5e-3);
        CHECK(s.u_minus == 1.0 - s.tau_minus);
        CHECK(s.z_minus == 0.0);
        CHECK(s.z_plus == 1.0);
    }

    TEST_CASE("end states close the stationary fluxes")
    {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> ue(0.0, 0.3), uf(0.0, 1.0);
        const double G = 0.2;
        for (int i = 0; i < 50; ++i) {
            const double ep = ue(rng);
            const double q = uf(rng) * q_cj(ep, G);
            const EndStates s = rh_end_state(ep, q, G);
            const Eigen::Vector3d fp = stationary_flux(1.0, ep, 1.0, q, G);
            const Eigen::Vector3d fm = stationary_flux(s.tau_minus, s.e_minus, 0.0, q, G);
            CHECK((fp - fm).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
        // nonreactive shock
        const EndStates s = rh_end_state(0.1, 0.0, G);
        CHECK(s.tau_minus < 1.0);
        CHECK((stationary_flux(1.0, 0.1, 1.0, 0.0, G) -
               stationary_flux(s.tau_minus, s.e_minus, 0.0, 0.0, G))
                  .lpNorm<Eigen::Infinity>() <= 1e-12);
    }

    TEST_CASE("CJ limit")
    {
        const double G = 0.2;
        for (double ep : {0.0, 0.01, 6.23e-2, 0.2, 1.0 / (G * (G + 1.0))}) {
            const double qc = q_cj(ep, G);
            CHECK(std::abs(end_state_discriminant(ep, qc, G)) <= 1e-12);

            // bisection on the sign of the discriminant
            double lo = 0.0, hi = 10.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (end_state_discriminant(ep, mid, G) >= 0.0 ? lo : hi) = mid;
            }
            CHECK(std::abs(lo - qc) <= 1e-12);

            CHECK_NOTHROW(rh_end_state(ep, qc * (1.0 - 1e-9), G));
            CHECK_THROWS_AS(rh_end_state(ep, qc * (1.0 + 1e-9) + 1e-15, G), CJLimitExceeded);
        }
        CHECK(q_cj(6.23e-2, G) > 6.23e-1);
        CHECK_THROWS_AS(q_cj(5.0, G), DomainError);
    }

    TEST_CASE("strong branch is monotone in q")
    {
        // more heat release moves the burned state toward CJ, so tau_minus grows
        const double qc = q_cj(6.23e-2, 0.2);
        double prev = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double tm = rh_end_state(6.23e-2, qc * i / 40.0, 0.2).tau_minus;
            CHECK(tm > prev);
            prev = tm;
        }
    }

    TEST_CASE("overdrive and Erpenbeck conversion")
    {
        const OverdriveEstimate f = overdrive_from_q(0.1, 0.2);
        CHECK(std::abs(f.f - 11.3) <= 0.1);
        CHECK_FALSE(f.outside_validity);
        CHECK(overdrive_from_q(2.0, 0.2).outside_validity);

        const double ecj = e_cj_solve(50.0, 0.2);
        CHECK(std::abs(ecj - 0.023) <= 1e-3);
        // the root satisfies q0 e = q_CJ(e)
        CHECK(std::abs(50.0 * ecj - q_cj(ecj, 0.2)) <= 1e-10);
        double lo = 0.0, hi = 0.1;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q_cj(mid, 0.2) - 50.0 * mid > 0.0 ? lo : hi) = mid;
        }
        CHECK(std::abs(ecj - lo) <= 1e-12);

        const ScaledWave w = erpenbeck_convert(1.73, 50.0, 50.0, 0.2);
        CHECK(w.e_plus == doctest::Approx(0.012).epsilon(0.1));
        CHECK(w.q == doctest::Approx(0.6).epsilon(0.1));
        CHECK(w.E_A == doctest::Approx(0.6).epsilon(0.1));
    }

    TEST_CASE("parameter validation")
    {
        WaveParams p;
        CHECK_NOTHROW(p.validate());
        p.nu = 0.0;
        CHECK_THROWS_AS(p.validate(), DomainError);
        p = {};
        p.q = 10.0;
        CHECK_THROWS_AS(p.validate(), CJLimitExceeded);
    }

    TEST_CASE("ignition weight")
    {
        CHECK(ignition_energy_from_weight(0.1, 0.5, 0.0) == 0.1);
        CHECK(ignition_energy_from_weight(0.1, 0.5, 1.0) == 0.5);
        CHECK(ignition_energy_from_weight(0.1, 0.5, 0.25) == doctest::Approx(0.2));
    }
}
