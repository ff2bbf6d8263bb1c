#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "rns/znd.hpp"

using namespace rns;

namespace {

WaveParams bench()
{
    WaveParams p;
    p.E_A = 3.1;
    return p;
}

// Inviscid steady fluxes with partial heat release q (1 - z).
Eigen::Vector3d inviscid_flux(const ZndState& s, double z, const WaveParams& p)
{
    const double pr = p.Gamma * s.e / s.tau;
    return {-s.tau - s.u, -s.u + pr, -(s.e + 0.5 * s.u * s.u + p.q * z) + s.u * pr};
}

// Classical RK4 on dz/dx = k phi(T(z)) z from the shock back to x_end.
double rk4_z(const WaveParams& p, double x_end, int n)
{
    auto f = [&](double z) {
        const ZndState s = znd_state_at_z(std::clamp(z, 0.0, 1.0), p);
        return p.k * ignition_phi(s.T, p.E_A, p.T_ig) * z;
    };
    const double h = x_end / n;
    double z = 1.0 - kZndSeed;
    for (int i = 0; i < n; ++i) {
        const double k1 = f(z), k2 = f(z + 0.5 * h * k1), k3 = f(z + 0.5 * h * k2),
                     k4 = f(z + h * k3);
        z += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return z;
}

} // namespace

TEST_SUITE("znd")
{
    TEST_CASE("partial heat release states")
    {
        const WaveParams p = bench();
        const EndStates end = rh_end_state(p);
        const ZndState s0 = znd_state_at_z(0.0, p);
        CHECK(s0.tau == doctest::Approx(end.tau_minus).epsilon(1e-14));
        CHECK(s0.e == doctest::Approx(end.e_minus).epsilon(1e-14));

        const EndStates shock = rh_end_state(p.e_plus, 0.0, p.Gamma);
        const ZndState s1 = znd_state_at_z(1.0, p);
        CHECK(s1.tau == doctest::Approx(shock.tau_minus).epsilon(1e-14));
        CHECK(znd_e_mid(p) == doctest::Approx(shock.e_minus).epsilon(1e-14));

        std::mt19937 rng(3);
        std::uniform_real_distribution<double> uz(0.0, 1.0);
        const ZndState up{1.0, 0.0, p.e_plus, p.e_plus};
        for (int i = 0; i < 20; ++i) {
            const double z = uz(rng);
            const ZndState s = znd_state_at_z(z, p);
            CHECK((inviscid_flux(s, z, p) - inviscid_flux(up, 1.0, p)).lpNorm<Eigen::Infinity>() <=
                  1e-10);
        }
    }

    TEST_CASE("reaction zone profile")
    {
        WaveParams p = bench();
        p.k = calibrate_k(p).k;
        const ZndProfile z = znd_profile(p, 40.0);
        // stored from the shock backward
        CHECK(z.x.front() == 0.0);
        CHECK(z.z.front() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(z.z.back() <= 1e-4);
        for (std::size_t i = 1; i < z.size(); ++i) {
            CHECK(z.x[i] < z.x[i - 1]);
            CHECK(z.z[i] <= z.z[i - 1]);
            CHECK(z.T[i] > p.T_ig);
        }
        for (std::size_t i = 0; i < z.size(); i += 7) {
            const ZndState s = znd_state_at_z(z.z[i], p);
            CHECK(std::abs(s.tau - z.tau[i]) <= 1e-8);
            CHECK(std::abs(s.e - z.e[i]) <= 1e-8);
        }
        CHECK_THROWS_AS(znd_profile(p, 5.0), DomainTooShort);
    }

    TEST_CASE("rate calibration")
    {
        WaveParams p = bench();
        const KCalibration c = calibrate_k(p);
        CHECK(std::abs(c.z_check - 0.5) <= 1e-6);
        p.k = c.k;
        CHECK(std::abs(rk4_z(p, -10.0, 20000) - 0.5) <= 1e-6);

        // x scales as 1/k
        const double x1 = znd_half_reaction_point(p);
        p.k *= 2.0;
        CHECK(znd_half_reaction_point(p) == doctest::Approx(0.5 * x1).epsilon(1e-8));

        // Reference k values: 2.71e-1 at E_A = 3.1 is taken as 2.71e1 (exponent
        // sign slip), 1.53e4 at E_A = 6 to an order of magnitude.
        CHECK(c.k == doctest::Approx(27.1).epsilon(0.2));
        WaveParams q = bench();
        q.E_A = 6.0;
        const double k6 = calibrate_k(q).k;
        CHECK(std::abs(std::log10(k6 / 1.53e4)) < 1.0);
    }

    TEST_CASE("ignition threshold above the spike aborts")
    {
        WaveParams p = bench();
        p.T_ig = 0.99; // read as a temperature: above the Neumann value 0.474
        CHECK_THROWS_AS(calibrate_k(p), IgnitionFailure);
        p.k = 1.0;
        CHECK_THROWS_AS(znd_profile(p, 25.0), IgnitionFailure);

        // read as the weight on e_plus, the threshold sits just above e_plus
        WaveParams w = bench();
        w.T_ig = ignition_energy_from_weight(w.e_plus, znd_e_mid(w), 0.01) / w.c_v;
        CHECK(w.T_ig == doctest::Approx(6.64e-2).epsilon(1e-2));
        CHECK_NOTHROW(calibrate_k(w));
    }
}
