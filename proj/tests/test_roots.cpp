#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "rns/roots.hpp"
#include "rns/znd.hpp"

using namespace rns;

namespace {

// At E_A = 5, nu = d = kappa_v = 0.1 the unstable roots sit near
// 0.0419 +- 0.0385i and 0.0387 +- 0.3195i.
const cdouble kLow(0.0419, 0.0385);
const cdouble kHigh(0.0387, 0.3195);

const std::shared_ptr<const SpectralSystem>& system5()
{
    static const auto sys = [] {
        WaveParams p;
        p.E_A = 5.0;
        p.k = calibrate_k(p).k;
        return std::make_shared<const SpectralSystem>(
            std::make_shared<const Profile>(solve_profile(p, {}, {})));
    }();
    return sys;
}

const EvansFunction& evans5()
{
    static const EvansFunction D(system5());
    return D;
}

int count(const Contour& c, const ContourOptions& opt = {})
{
    return zero_count(evans_on_contour(c, evans5(), opt));
}

} // namespace

TEST_SUITE("roots")
{
    TEST_CASE("contour geometry")
    {
        const Contour s = Contour::semi_annulus(10.0, 1e-4);
        REQUIRE(s.pieces().size() == 5);
        CHECK(std::abs(s.point(0.0) - cdouble(10.0, 0.0)) <= 1e-14);
        CHECK(std::abs(s.point(s.t_end()) - s.point(0.0)) <= 1e-12);
        for (const ContourPiece& p : s.pieces()) {
            const double h = 1e-6;
            const cdouble fd = (p.point(0.5 + h) - p.point(0.5 - h)) / (2.0 * h);
            CHECK(std::abs(fd - p.tangent(0.5)) <= 1e-6 * (1.0 + std::abs(fd)));
        }
        const Contour r = Contour::rectangle({0.0, 0.0}, {1.0, 2.0});
        double len = 0.0;
        for (const ContourPiece& p : r.pieces())
            len += p.length();
        CHECK(len == doctest::Approx(6.0));
        const Contour c = Contour::circle({1.0, 1.0}, 0.5);
        len = 0.0;
        for (const ContourPiece& p : c.pieces())
            len += p.length();
        CHECK(len == doctest::Approx(std::numbers::pi));
        CHECK(std::abs(r.reversed().point(0.0) - r.point(r.t_end())) <= 1e-14);
    }

    TEST_CASE("integer winding numbers")
    {
        CHECK(count(Contour::circle(kLow, 0.02)) == 1);
        CHECK(count(Contour::circle(kHigh, 0.03)) == 1);
        CHECK(count(Contour::rectangle({0.01, 0.01}, {0.1, 0.5})) == 2);
        CHECK(count(Contour::rectangle({0.2, 0.2}, {1.0, 1.0})) == 0);
        CHECK(count(Contour::rectangle({0.01, -0.5}, {0.1, 0.5})) == 4);
        const EvansSample s = evans_on_contour(Contour::semi_annulus(10.0, 1e-4), evans5());
        CHECK(std::abs(winding_number(s) - 4.0) < 0.05);
        CHECK(s.resolved);
        CHECK(s.closure_error <= 1e-6);
        for (std::size_t i = 1; i < s.nodes.size(); ++i) {
            const cdouble a = s.nodes[i - 1].value.D, b = s.nodes[i].value.D;
            CHECK(std::abs(std::arg(b / a)) < std::numbers::pi / 2);
            CHECK(std::abs(b - a) < 0.2 * std::max(std::abs(a), std::abs(b)));
        }
    }

    TEST_CASE("reversal negates the winding number")
    {
        const Contour c = Contour::rectangle({0.01, 0.01}, {0.1, 0.5});
        const double w = winding_number(evans_on_contour(c, evans5()));
        const double wr = winding_number(evans_on_contour(c.reversed(), evans5()));
        CHECK(std::abs(w + wr) <= 1e-9);
    }

    TEST_CASE("moments add over quadrants")
    {
        const cdouble ll(0.01, 0.01), ur(0.1, 0.5), mid = 0.5 * (ll + ur);
        const Contour whole = Contour::rectangle(ll, ur);
        const Contour quads[4] = {
            Contour::rectangle(ll, mid),
            Contour::rectangle({mid.real(), ll.imag()}, {ur.real(), mid.imag()}),
            Contour::rectangle(mid, ur),
            Contour::rectangle({ll.real(), mid.imag()}, {mid.real(), ur.imag()}),
        };
        const EvansSample sw = evans_on_contour(whole, evans5());
        // M0 adds up to rounding; higher moments to the quadrature accuracy
        for (int p : {0, 1, 2}) {
            cdouble sum = 0.0;
            for (const Contour& q : quads)
                sum += moment(evans_on_contour(q, evans5()), p, mid);
            const cdouble m = moment(sw, p, mid);
            const double tol = p == 0 ? 1e-5 : 1e-4;
            CHECK(std::abs(sum - m) <= tol * (1.0 + std::abs(m)));
        }
        // M0 counts and M1 sums the roots
        CHECK(std::abs(moment(sw, 0, 0.0) - 2.0) <= 1e-4);
        CHECK(std::abs(moment(sw, 1, 0.0) - (kLow + kHigh)) <= 1e-3);
    }

    TEST_CASE("centroid shrinks onto a simple root")
    {
        cdouble c = kLow;
        double r = 0.02;
        for (int i = 0; i < 3; ++i) {
            const EvansSample s = evans_on_contour(Contour::circle(c, r), evans5());
            REQUIRE(std::abs(moment(s, 0, c) - 1.0) <= 1e-4);
            const cdouble next = c + moment(s, 1, c);
            CHECK(std::abs(next - c) <= r);
            c = next;
            r *= 0.25;
        }
        // |D(c)| / |D(c + h)| ~ |c - root| / h for a simple root
        CHECK(std::abs(evans5()(c).D) < 1e-5 * std::abs(evans5()(c + 0.01).D));
    }

    TEST_CASE("cache reuse")
    {
        EvansCache cache;
        ContourOptions o;
        o.cache = &cache;
        const Contour c = Contour::circle(kHigh, 0.03);
        const EvansSample a = evans_on_contour(c, evans5(), o);
        const EvansSample b = evans_on_contour(c, evans5(), o);
        CHECK(a.evaluations > 0);
        CHECK(b.evaluations == 0);
        CHECK(cache.size() >= a.nodes.size() - 1);
    }

    TEST_CASE("unresolved contours are reported")
    {
        ContourOptions o;
        o.max_levels = 0;
        o.h_max = 5.0;
        o.throw_on_unresolved = false;
        const EvansSample s = evans_on_contour(Contour::semi_annulus(10.0, 1e-4), evans5(), o);
        CHECK_FALSE(s.resolved);
        CHECK_FALSE(s.unresolved.empty());
        o.throw_on_unresolved = true;
        CHECK_THROWS_AS(evans_on_contour(Contour::semi_annulus(10.0, 1e-4), evans5(), o),
                        UnresolvedContour);
    }

    TEST_CASE("root sets do not depend on the weight or gauge")
    {
        const Contour box = Contour::rectangle({0.01, 0.01}, {0.1, 0.5});
        const RootSet base = locate_roots(box, evans5());
        REQUIRE(base.consistent);
        REQUIRE(base.roots.size() == 2);
        CHECK(std::abs(base.roots[0].lambda - kHigh) <= 2e-3);
        CHECK(std::abs(base.roots[1].lambda - kLow) <= 2e-3);

        EvansOptions w;
        w.mu_weight = 0.5;
        EvansOptions g;
        g.seed_gauge = [](cdouble l) { return std::exp(-l) * (3.0 + l * l); };
        for (const EvansOptions& o : {w, g}) {
            const EvansFunction D(system5(), o);
            const RootSet rs = locate_roots(box, D);
            REQUIRE(rs.roots.size() == base.roots.size());
            CHECK(rs.region_count == base.region_count);
            for (std::size_t i = 0; i < rs.roots.size(); ++i) {
                CHECK(std::abs(rs.roots[i].lambda - base.roots[i].lambda) <= 1e-3);
                CHECK(rs.roots[i].multiplicity == base.roots[i].multiplicity);
            }
        }
    }
}
