#include "rns/kato.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "rns/ode.hpp"

namespace rns {

namespace {

std::string format_lambda(cdouble l)
{
    return "(" + std::to_string(l.real()) + ", " + std::to_string(l.imag()) + ")";
}

} // namespace

int splitting_dimension(const AffineG& G_inf, cdouble lambda, Side side)
{
    Eigen::ComplexEigenSolver<Matrix7c> es(G_inf(lambda), false);
    int n = 0;
    for (int i = 0; i < 7; ++i) {
        const double re = es.eigenvalues()[i].real();
        n += side == Side::plus ? (re < 0.0) : (re > 0.0);
    }
    return n;
}

ProjectorData projector_data(const AffineG& G_inf, cdouble lambda, Side side, int k)
{
    Eigen::ComplexEigenSolver<Matrix7c> es(G_inf(lambda));
    if (es.info() != Eigen::Success)
        throw SplittingLost("eigen decomposition failed at lambda = " + format_lambda(lambda));
    const auto& mu = es.eigenvalues();
    const Matrix7c& V = es.eigenvectors();

    std::array<int, 7> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (mu[a].real() != mu[b].real())
            return mu[a].real() < mu[b].real();
        return mu[a].imag() < mu[b].imag();
    });
    std::array<bool, 7> in{};
    for (int j = 0; j < k; ++j)
        in[side == Side::plus ? order[j] : order[6 - j]] = true;

    const Eigen::PartialPivLU<Matrix7c> lu(V);
    const Matrix7c Vinv = lu.inverse();
    const Matrix7c G1hat = Vinv * G_inf.G1.cast<cdouble>() * V;

    Eigen::Matrix<cdouble, 7, 7> D = Eigen::Matrix<cdouble, 7, 7>::Zero();
    Matrix7c M = Matrix7c::Zero();
    ProjectorData out;
    out.eig_sum = 0.0;
    out.gap = 1e300;
    for (int i = 0; i < 7; ++i) {
        if (in[i]) {
            D(i, i) = 1.0;
            out.eig_sum += mu[i];
        }
        for (int j = 0; j < 7; ++j) {
            if (in[i] && !in[j]) {
                M(i, j) = G1hat(i, j) / (mu[i] - mu[j]);
                out.gap = std::min(out.gap, std::abs(mu[i] - mu[j]));
            }
            else if (!in[i] && in[j]) {
                M(i, j) = G1hat(i, j) / (mu[j] - mu[i]);
            }
        }
    }
    if (k > 0 && k < 7) {
        const int last_in = side == Side::plus ? order[k - 1] : order[7 - k];
        const int first_out = side == Side::plus ? order[k] : order[6 - k];
        out.real_part_margin = std::abs(mu[last_in].real() - mu[first_out].real());
    }
    out.P = V * D * Vinv;
    out.dP = V * M * Vinv;
    return out;
}

KatoBasis::KatoBasis(AffineG G_inf, Side side, double lambda0, KatoOptions opt)
    : G_{std::move(G_inf)}, side_{side}, opt_{opt}, lambda_{lambda0, 0.0}
{
    k_ = splitting_dimension(G_, lambda_, side_);
    if (k_ == 0 || k_ == 7)
        throw SplittingLost("trivial splitting at lambda0 = " + std::to_string(lambda0));
    const ProjectorData pd = projector_data(G_, lambda_, side_, k_);
    // Real orthonormal basis of range(P) at a real seed point.
    const Eigen::MatrixXd P = pd.P.real();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullU);
    Eigen::MatrixXd U = svd.matrixU().leftCols(k_);
    // Fix column signs so the seed is reproducible.
    for (int j = 0; j < k_; ++j) {
        Eigen::Index imax = 0;
        U.col(j).cwiseAbs().maxCoeff(&imax);
        if (U(imax, j) < 0.0)
            U.col(j) *= -1.0;
    }
    V_ = U.cast<cdouble>();
}

cdouble KatoBasis::eig_sum() const
{
    return projector_data(G_, lambda_, side_, k_).eig_sum;
}

void KatoBasis::transport_to(cdouble lambda1)
{
    const cdouble a = lambda_;
    const cdouble delta = lambda1 - a;
    if (std::abs(delta) == 0.0)
        return;
    const Eigen::Index n = V_.size();
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(V_.data(), n);

    auto rhs = [&](double s, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        const cdouble lam = a + s * delta;
        if (splitting_dimension(G_, lam, side_) != k_)
            throw SplittingLost("subspace dimension changes near lambda = " +
                                format_lambda(lam));
        const ProjectorData pd = projector_data(G_, lam, side_, k_);
        const Eigen::Map<const Eigen::MatrixXcd> Vm(v.data(), 7, k_);
        const Eigen::MatrixXcd dV = delta * ((pd.dP * pd.P - pd.P * pd.dP) * Vm);
        return Eigen::Map<const Eigen::VectorXcd>(dV.data(), n);
    };
    OdeOptions o;
    o.rtol = opt_.rtol;
    o.atol = opt_.atol;
    o.h_initial = 0.1;
    const OdeStats st = integrate_dp45(rhs, 0.0, 1.0, y, o);
    if (!st.success)
        throw SplittingLost("Kato transport failed between " + format_lambda(a) + " and " +
                            format_lambda(lambda1));
    V_ = Eigen::Map<const Eigen::MatrixXcd>(y.data(), 7, k_);
    lambda_ = lambda1;
}

} // namespace rns
