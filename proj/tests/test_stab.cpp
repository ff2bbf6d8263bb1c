#include <doctest.h>

#include <cmath>
#include <random>

#include "rns/stab.hpp"

using namespace rns;

namespace {

std::vector<double> column(const std::vector<BoundarySample>& s, double nu_max, bool inclusive,
                           bool want_nu)
{
    std::vector<double> out;
    for (const auto& x : s)
        if (inclusive ? x.nu <= nu_max : x.nu < nu_max)
            out.push_back(want_nu ? x.nu : x.E_A);
    return out;
}

} // namespace

TEST_SUITE("stab")
{
    TEST_CASE("exact recovery of planted fits")
    {
        std::vector<double> nu, lin, lg;
        for (double v = 0.01; v < 0.3; v += 0.02) {
            nu.push_back(v);
            lin.push_back(2.0 + 3.0 * v);
            lg.push_back(5.0 - 6.0 * v - 0.8 * std::log(v));
        }
        const FitResult a = fit_boundary(nu, lin, FitModel::linear);
        CHECK(a.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(a.coefficients[1] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(a.max_residual <= 1e-12);
        const FitResult b = fit_boundary(nu, lg, FitModel::linear_log);
        CHECK(b.coefficients[0] == doctest::Approx(5.0).epsilon(1e-10));
        CHECK(b.coefficients[1] == doctest::Approx(-6.0).epsilon(1e-10));
        CHECK(b.coefficients[2] == doctest::Approx(-0.8).epsilon(1e-10));
        CHECK(evaluate_fit(b, 0.123) == doctest::Approx(5.0 - 6.0 * 0.123 - 0.8 * std::log(0.123)));

        CHECK_THROWS_AS(fit_boundary({0.1, 0.2}, {1.0, 2.0}, FitModel::linear), FitError);
        CHECK_THROWS_AS(fit_boundary({0.0, 0.1, 0.2}, {1.0, 2.0, 3.0}, FitModel::linear_log),
                        FitError);
        CHECK_THROWS_AS(fit_boundary({0.1, 0.1, 0.1}, {1.0, 2.0, 3.0}, FitModel::linear),
                        FitError);
    }

    TEST_CASE("fits of the reference boundary tables")
    {
        const auto& up = reference_upper_boundary();
        const auto& lo = reference_lower_boundary();
        const FitResult u = fit_boundary(column(up, 0.27, false, true),
                                         column(up, 0.27, false, false), FitModel::linear_log);
        const Eigen::Vector3d u_ref(5.67, -6.16, -0.804);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(u.coefficients[i] - u_ref[i]) <= 0.05 * std::abs(u_ref[i]));
        const FitResult l = fit_boundary(column(lo, 0.27, true, true),
                                         column(lo, 0.27, true, false), FitModel::linear);
        const Eigen::Vector2d l_ref(2.45, 2.95);
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(l.coefficients[i] - l_ref[i]) <= 0.05 * std::abs(l_ref[i]));
    }

    TEST_CASE("viscous delay")
    {
        const auto rows = viscous_delay({0.05, 0.1}, {2.75, 3.0}, 2.5);
        CHECK(rows[0].delay == doctest::Approx(0.1));
        CHECK(rows[1].delay == doctest::Approx(0.2));
        CHECK_THROWS_AS(viscous_delay({0.1}, {3.0}, 0.0), DomainError);

        FitResult f;
        f.model = FitModel::linear;
        f.coefficients = Eigen::Vector2d(2.45, 2.95);
        const auto r2 = viscous_delay(f, {0.1}, 2.45);
        CHECK(r2[0].E_minus == doctest::Approx(2.745));
        CHECK(r2[0].delay == doctest::Approx(0.295 / 2.45));
    }

    TEST_CASE("root matching")
    {
        const std::vector<cdouble> a = {{0.1, 1.0}, {0.1, -1.0}, {0.2, 3.0}};
        const std::vector<cdouble> b = {{0.21, 2.9}, {0.11, 1.05}, {0.11, -1.05}};
        const Assignment m = match_roots(a, b);
        CHECK(m.match == std::vector<int>{1, 2, 0});
        CHECK(m.valid);
        CHECK_FALSE(m.ambiguous);

        // a root leaving the region
        const Assignment gone = match_roots(a, {b[1], b[2]});
        CHECK(gone.match == std::vector<int>{0, 1, -1});

        // a jump longer than half the root spacing is not trusted
        const Assignment far = match_roots({{0.0, 1.0}, {0.0, 2.0}}, {{0.0, 1.0}, {0.0, 2.8}});
        CHECK_FALSE(far.valid);

        // symmetric swap: two assignments cost the same
        const Assignment tie =
            match_roots({{-1.0, 0.0}, {1.0, 0.0}}, {{0.0, 1.0}, {0.0, -1.0}});
        CHECK(tie.ambiguous);

        // random permutations are undone
        std::mt19937 rng(4);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (int t = 0; t < 10; ++t) {
            std::vector<cdouble> z;
            for (int i = 0; i < 5; ++i)
                z.emplace_back(u(rng), u(rng));
            std::vector<int> perm = {0, 1, 2, 3, 4};
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<cdouble> w(5);
            for (int i = 0; i < 5; ++i)
                w[perm[i]] = z[i] + cdouble(1e-4, -1e-4);
            CHECK(match_roots(z, w).match == perm);
        }
    }

    TEST_CASE("profiles along E_A do not depend on request order")
    {
        WaveParams base;
        EnergyBranch a(base), b(base);
        a.at(4.0);
        a.at(6.0);
        const auto pa = a.at(5.5);
        const auto pb = b.at(5.5);
        CHECK(pa->params().k == doctest::Approx(pb->params().k).epsilon(1e-12));
        double dev = 0.0;
        for (double x = -20.0; x < 4.0; x += 0.1)
            dev = std::max(dev, (pa->state(x) - pb->state(x)).lpNorm<Eigen::Infinity>());
        CHECK(dev <= 1e-12);
        CHECK(a.at(5.5) == pa);
    }

    TEST_CASE("bracket checks")
    {
        WaveParams base;
        EnergyBranch br(base);
        StabilityOptions so;
        CHECK_THROWS_AS(neutral_boundary(br, BoundarySide::lower, 5.0, 4.0, so), BadBracket);
        // both ends unstable
        CHECK_THROWS_AS(neutral_boundary(br, BoundarySide::lower, 4.5, 5.0, so), BadBracket);
    }

    TEST_CASE("short root track")
    {
        WaveParams base;
        EnergyBranch br(base);
        StabilityOptions so;
        const RootTrajectory t = track_roots(br, {5.0, 5.1}, so);
        REQUIRE(t.points.size() >= 2);
        CHECK(t.points.front().roots.region_count == 4);
        CHECK(t.points.back().roots.region_count == 4);
        CHECK(t.lineages == 4);
        CHECK(t.broken.empty());
        for (const auto& p : t.points) {
            CHECK(p.roots.consistent);
            CHECK(p.lineage.size() == p.roots.roots.size());
        }
    }
}
