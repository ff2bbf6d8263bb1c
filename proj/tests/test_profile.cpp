#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "rns/profile.hpp"
#include "rns/znd.hpp"

using namespace rns;

namespace {

WaveParams bench(double nu = 0.1)
{
    WaveParams p;
    p.E_A = 3.1;
    p.nu = p.d = p.kappa_v = nu;
    p.k = calibrate_k(p).k;
    return p;
}

const Profile& bench_profile()
{
    static const Profile prof = solve_profile(bench(), {}, {});
    return prof;
}

// Once-integrated momentum and total energy balances, written from the
// conservation laws with u = 1 - tau; both are constant along a profile.
Eigen::Vector2d balances(const ProfileState& U, const ProfileState& dU, const WaveParams& p)
{
    const double tau = U[0], e = U[1], z = U[2];
    const double u = 1.0 - tau, u_x = -dU[0];
    const double pr = p.Gamma * e / tau;
    const double mom = -u + pr - p.nu * u_x / tau;
    const double en = -(e + 0.5 * u * u + p.q * z) + u * pr - p.nu * u * u_x / tau -
                      p.kappa_v * dU[1] / tau - p.q * p.d * dU[2] / (tau * tau);
    return {mom, en};
}

} // namespace

TEST_SUITE("profile")
{
    TEST_CASE("analytic Jacobian of the traveling-wave field")
    {
        const WaveParams p = bench();
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> ut(0.2, 1.0), ue(0.1, 1.0), uz(0.0, 1.0),
            uy(-0.1, 0.1);
        for (int i = 0; i < 10; ++i) {
            const ProfileState U(ut(rng), ue(rng), uz(rng), uy(rng));
            const Eigen::Matrix4d J = tw_jacobian(U, p);
            for (int j = 0; j < 4; ++j) {
                const double h = 1e-6 * (1.0 + std::abs(U[j]));
                ProfileState a = U, b = U;
                a[j] += h;
                b[j] -= h;
                const Eigen::Vector4d fd = (tw_rhs(a, p) - tw_rhs(b, p)) / (2.0 * h);
                CHECK((fd - J.col(j)).norm() <= 1e-6 * (1.0 + J.col(j).norm()));
            }
        }
    }

    TEST_CASE("equilibria and their splitting")
    {
        const WaveParams p = bench();
        CHECK(tw_rhs(unburned_state(p), p).norm() <= 1e-13);
        CHECK(tw_rhs(burned_state(p), p).norm() <= 1e-13);
        const EndJacobians ej = end_jacobians(p);
        // a connecting orbit modulo translation needs one dimension to spare
        CHECK(ej.stable_plus + ej.unstable_minus == 5);
        CHECK((ej.bc_plus * ej.P_stable_plus).norm() <= 1e-10);
        CHECK((ej.bc_minus * ej.P_unstable_minus).norm() <= 1e-10);
    }

    TEST_CASE("bench profile")
    {
        const Profile& prof = bench_profile();
        const WaveParams& p = prof.params();
        const EndStates& s = prof.end_states();

        const ProfileCheck chk = verify_profile(prof, {}, 10);
        CHECK(chk.endpoints_ok);
        CHECK(chk.positivity_ok);
        CHECK(chk.residual_ok);
        CHECK(prof.state(0.0)[0] == doctest::Approx(phase_tau(p)).epsilon(1e-10));
        CHECK(phase_tau(p) == doctest::Approx(0.5 * (1.0 + s.tau_minus)));

        const Eigen::Vector2d ref(p.Gamma * p.e_plus, -p.e_plus - p.q);
        double worst = 0.0;
        for (double x = prof.x_min(); x <= prof.x_max(); x += 0.01)
            worst = std::max(worst,
                             (balances(prof.state(x), prof.derivative(x), p) - ref).norm());
        CHECK(worst <= 1e-5);

        for (double x = prof.x_min(); x <= prof.x_max(); x += 0.37)
            CHECK(prof.u_x(x) == -prof.derivative(x)[0]);
    }

    TEST_CASE("bench phenomenology")
    {
        const Profile& prof = bench_profile();
        const ShockReactionRatio r = shock_reaction_ratio(prof);
        CHECK(r.z_entry < 0.95);
        CHECK(r.z_exit > r.z_entry + 0.15);
        CHECK(prof.state(prof.x_max())[2] == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(r.ratio > 0.05);
        CHECK(r.ratio < 0.2);

        // the ZND template and the viscous profile share the reaction zone
        const ZndProfile z = znd_profile(prof.params(), 40.0);
        double x_half = 0.0;
        for (double x = -1.0; x > prof.x_min(); x -= 1e-3)
            if (prof.state(x)[2] <= 0.5) {
                x_half = x;
                break;
            }
        CHECK(std::abs(x_half - z.half_reaction_point()) < 1.5);
    }

    TEST_CASE("viscosity sweep")
    {
        std::vector<WaveParams> path;
        for (double nu : {0.1, 0.07, 0.05, 0.03}) {
            WaveParams p = bench();
            p.nu = p.d = p.kappa_v = nu;
            path.push_back(p);
        }
        const std::vector<Profile> profs = continue_profiles(path, {});
        double prev = 1e9;
        for (std::size_t i = 0; i < profs.size(); ++i) {
            const ShockReactionRatio r = shock_reaction_ratio(profs[i]);
            CHECK(r.shock_width < prev);
            prev = r.shock_width;
            const double per_nu = r.ratio / path[i].nu;
            const double ref = shock_reaction_ratio(profs[0]).ratio / path[0].nu;
            CHECK(per_nu == doctest::Approx(ref).epsilon(0.2));
        }

        // coming back reproduces the start
        std::vector<WaveParams> back(path.rbegin(), path.rend());
        const std::vector<Profile> ret =
            continue_profiles(back, {}, profile_guess(profs.back()));
        const Profile& a = profs.front();
        const Profile& b = ret.back();
        double dev = 0.0;
        for (double x = -20.0; x <= 4.0; x += 0.05)
            dev = std::max(dev, (a.state(x) - b.state(x)).lpNorm<Eigen::Infinity>());
        CHECK(dev <= 1e-5);
    }

    TEST_CASE("large viscosity gives comparable widths")
    {
        const Profile prof = solve_profile(bench(0.3), {}, {});
        const double r = shock_reaction_ratio(prof).ratio;
        CHECK(r > 0.15);
        CHECK(r < 3.0);
    }

    TEST_CASE("reaction zone collapse is passed by arclength continuation")
    {
        WaveParams base = bench();
        auto family = [base](double E) {
            WaveParams p = base;
            p.E_A = E;
            p.k = calibrate_k(p).k;
            return p;
        };
        const std::vector<Profile> profs = trace_family(family, 5.0, {6.0, 7.5}, {});
        REQUIRE(profs.size() == 2);
        for (const Profile& pr : profs)
            CHECK(verify_profile(pr, {}).ok());
        CHECK(profs[1].params().E_A == doctest::Approx(7.5));
    }
}
