#include <doctest.h>

#include <memory>

#include "rns/kato.hpp"
#include "rns/znd.hpp"

using namespace rns;

namespace {

const SpectralSystem& system()
{
    static const SpectralSystem sys = [] {
        WaveParams p;
        p.E_A = 5.0;
        p.k = calibrate_k(p).k;
        return SpectralSystem(std::make_shared<const Profile>(solve_profile(p, {}, {})));
    }();
    return sys;
}

Eigen::MatrixXcd basis_at(const AffineG& g, Side side, cdouble lambda)
{
    KatoBasis b(g, side, 1.0);
    b.transport_to(lambda);
    return b.basis();
}

} // namespace

TEST_SUITE("kato")
{
    TEST_CASE("splitting dimensions")
    {
        const SpectralSystem& sys = system();
        for (cdouble l : {cdouble(1.0, 0.0), cdouble(0.01, 5.0), cdouble(9.0, -3.0)}) {
            CHECK(splitting_dimension(sys.affine_plus(), l, Side::plus) == 3);
            CHECK(splitting_dimension(sys.affine_minus(), l, Side::minus) == 4);
        }
    }

    TEST_CASE("projectors")
    {
        const SpectralSystem& sys = system();
        for (Side side : {Side::plus, Side::minus}) {
            const AffineG& g = side == Side::plus ? sys.affine_plus() : sys.affine_minus();
            const int k = side == Side::plus ? 3 : 4;
            for (cdouble l : {cdouble(1.0, 0.0), cdouble(0.2, 1.5), cdouble(3.0, -6.0)}) {
                const ProjectorData d = projector_data(g, l, side, k);
                CHECK((d.P * d.P - d.P).norm() <= 1e-10 * d.P.norm());
                CHECK(std::abs(d.P.trace() - cdouble(k)) <= 1e-10);
                // commutes with G
                const Eigen::MatrixXcd G = g(l);
                CHECK((G * d.P - d.P * G).norm() <= 1e-9 * G.norm());

                // complex derivative by centred differences along both axes
                const double h = 1e-5;
                const Eigen::MatrixXcd dx =
                    (projector_data(g, l + h, side, k).P - projector_data(g, l - h, side, k).P) /
                    (2.0 * h);
                const Eigen::MatrixXcd dy = (projector_data(g, l + cdouble(0, h), side, k).P -
                                             projector_data(g, l - cdouble(0, h), side, k).P) /
                                            cdouble(0.0, 2.0 * h);
                CHECK((dx - d.dP).norm() <= 1e-6 * (1.0 + d.dP.norm()));
                CHECK((dy - d.dP).norm() <= 1e-6 * (1.0 + d.dP.norm()));
            }
        }
    }

    TEST_CASE("transported basis is analytic")
    {
        const SpectralSystem& sys = system();
        for (Side side : {Side::plus, Side::minus}) {
            const AffineG& g = side == Side::plus ? sys.affine_plus() : sys.affine_minus();
            const int k = side == Side::plus ? 3 : 4;
            const cdouble l(0.7, 2.3);
            const Eigen::MatrixXcd V = basis_at(g, side, l);
            const ProjectorData d = projector_data(g, l, side, k);
            CHECK((d.P * V - V).norm() <= 1e-8 * V.norm());
            CHECK(Eigen::FullPivLU<Eigen::MatrixXcd>(V).rank() == k);

            // Cauchy-Riemann
            const double h = 1e-4;
            const Eigen::MatrixXcd dx =
                (basis_at(g, side, l + h) - basis_at(g, side, l - h)) / (2.0 * h);
            const Eigen::MatrixXcd dy =
                (basis_at(g, side, l + cdouble(0, h)) - basis_at(g, side, l - cdouble(0, h))) /
                cdouble(0.0, 2.0 * h);
            CHECK((dx - dy).norm() <= 1e-5 * (1.0 + dx.norm()));

            // conjugate paths give conjugate bases
            CHECK((basis_at(g, side, std::conj(l)) - V.conjugate()).norm() <= 1e-12 * V.norm());
        }
    }

    TEST_CASE("transport around a loop returns to the start")
    {
        const SpectralSystem& sys = system();
        for (Side side : {Side::plus, Side::minus}) {
            const AffineG& g = side == Side::plus ? sys.affine_plus() : sys.affine_minus();
            KatoBasis b(g, side, 1.0);
            const Eigen::MatrixXcd V0 = b.basis();
            for (cdouble c : {cdouble(4.0, 0.0), cdouble(4.0, 3.0), cdouble(0.5, 3.0),
                              cdouble(0.5, -2.0), cdouble(1.0, 0.0)})
                b.transport_to(c);
            CHECK((b.basis() - V0).norm() <= 1e-8 * V0.norm());
            CHECK(b.lambda() == cdouble(1.0, 0.0));
        }
    }

    TEST_CASE("eigenvalue sum")
    {
        const SpectralSystem& sys = system();
        KatoBasis b(sys.affine_plus(), Side::plus, 1.0);
        const cdouble l(2.0, 1.0);
        b.transport_to(l);
        const ProjectorData d = projector_data(sys.affine_plus(), l, Side::plus, 3);
        CHECK(std::abs(b.eig_sum() - d.eig_sum) <= 1e-12 * (1.0 + std::abs(d.eig_sum)));
        // trace of G restricted to the subspace
        const Eigen::MatrixXcd V = b.basis();
        const Eigen::MatrixXcd restricted =
            V.completeOrthogonalDecomposition().pseudoInverse() * sys.G_plus(l) * V;
        CHECK(std::abs(restricted.trace() - d.eig_sum) <= 1e-8 * (1.0 + std::abs(d.eig_sum)));
    }
}
