#include "rns/evans.hpp"

#include <string>

#include "rns/ode.hpp"

namespace rns {

namespace {

struct ManifoldEnd {
    Eigen::MatrixXcd Omega;
    cdouble log_gamma;
    ManifoldStats stats;
};

/// Integrates the frame Omega and log gamma from x0 to x1 with the polar
/// splitting W = Omega alpha, gamma = det alpha.
ManifoldEnd integrate_manifold(const SpectralSystem& sys, cdouble lambda,
                               const Eigen::MatrixXcd& V0, cdouble mu, double x0, double x1,
                               const EvansOptions& opt)
{
    const Eigen::Index n = V0.rows(), k = V0.cols();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V0);
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, k);
    const Eigen::MatrixXcd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    cdouble lg = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        lg += std::log(R(i, i));

    Eigen::VectorXcd y(n * k + 1);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, k) = Q;
    y[n * k] = lg;

    auto rhs = [&](double x, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        const Eigen::Map<const Eigen::MatrixXcd> Om(v.data(), n, k);
        const Matrix7c G = sys.G(x, lambda);
        const Eigen::MatrixXcd GO = G * Om;
        const Eigen::MatrixXcd H = Om.adjoint() * GO;
        Eigen::VectorXcd out(n * k + 1);
        Eigen::Map<Eigen::MatrixXcd>(out.data(), n, k) = GO - Om * H;
        out[n * k] = H.trace() - mu;
        return out;
    };

    ManifoldStats stats;
    auto retract = [&](double, Eigen::VectorXcd& v, const Eigen::VectorXcd&) {
        Eigen::Map<Eigen::MatrixXcd> Om(v.data(), n, k);
        const double drift =
            (Om.adjoint() * Om - Eigen::MatrixXcd::Identity(k, k)).norm();
        if (drift <= opt.ortho_tol)
            return StepAction::proceed;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Om, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::MatrixXcd Qp = svd.matrixU() * svd.matrixV().adjoint();
        Om = Qp;
        for (Eigen::Index i = 0; i < k; ++i)
            v[n * k] += std::log(svd.singularValues()[i]);
        ++stats.retractions;
        return StepAction::state_modified;
    };

    OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.max_steps = opt.max_steps;
    const OdeStats st = integrate_dp45(rhs, x0, x1, y, o, retract);
    if (!st.success)
        throw EvansIntegrationFailure("manifold integration stopped at x = " +
                                      std::to_string(st.x_reached) + " for lambda = (" +
                                      std::to_string(lambda.real()) + ", " +
                                      std::to_string(lambda.imag()) + ")");
    stats.steps = st.accepted;
    stats.rejected = st.rejected;
    return {Eigen::Map<const Eigen::MatrixXcd>(y.data(), n, k), y[n * k], stats};
}

} // namespace

EvansFunction::EvansFunction(std::shared_ptr<const SpectralSystem> sys, EvansOptions opt)
    : sys_{std::move(sys)}, opt_{std::move(opt)},
      seed_plus_{sys_->affine_plus(), Side::plus, opt_.anchor, opt_.kato},
      seed_minus_{sys_->affine_minus(), Side::minus, opt_.anchor, opt_.kato}
{
    if (seed_plus_.dimension() + seed_minus_.dimension() != 7)
        throw SplittingLost("subspace dimensions " + std::to_string(seed_plus_.dimension()) +
                            " + " + std::to_string(seed_minus_.dimension()) +
                            " do not add up to 7");
}

EvansValue EvansFunction::operator()(cdouble lambda) const
{
    KatoBasis plus = seed_plus_;
    KatoBasis minus = seed_minus_;
    plus.transport_to(lambda);
    minus.transport_to(lambda);
    return evaluate(plus, minus);
}

EvansValue EvansFunction::evaluate(const KatoBasis& plus, const KatoBasis& minus) const
{
    const cdouble lambda = plus.lambda();
    if (std::abs(minus.lambda() - lambda) > 1e-14 * (1.0 + std::abs(lambda)))
        throw DomainError("Kato bases sit at different lambda");
    EvansValue out;
    out.lambda = lambda;
    out.k_plus = splitting_dimension(sys_->affine_plus(), lambda, Side::plus);
    out.k_minus = splitting_dimension(sys_->affine_minus(), lambda, Side::minus);
    if (out.k_plus != plus.dimension() || out.k_minus != minus.dimension())
        throw SplittingLost("splitting at lambda = (" + std::to_string(lambda.real()) + ", " +
                            std::to_string(lambda.imag()) + ") differs from the seed");

    Eigen::MatrixXcd Vp = plus.basis();
    if (opt_.seed_gauge)
        Vp.col(0) *= opt_.seed_gauge(lambda);
    const cdouble mu_p = opt_.mu_weight * plus.eig_sum();
    const cdouble mu_m = opt_.mu_weight * minus.eig_sum();

    const ManifoldEnd ep = integrate_manifold(*sys_, lambda, Vp, mu_p, sys_->x_max(), 0.0, opt_);
    const ManifoldEnd em =
        integrate_manifold(*sys_, lambda, minus.basis(), mu_m, sys_->x_min(), 0.0, opt_);

    Matrix7c M;
    M << ep.Omega, em.Omega;
    out.log_gamma_plus = ep.log_gamma;
    out.log_gamma_minus = em.log_gamma;
    out.D = std::exp(ep.log_gamma + em.log_gamma) * M.determinant();
    out.plus = ep.stats;
    out.minus = em.stats;
    return out;
}

} // namespace rns
