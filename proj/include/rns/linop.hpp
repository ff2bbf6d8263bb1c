#pragma once

#include <complex>
#include <iosfwd>
#include <memory>

#include <Eigen/Dense>

#include "rns/profile.hpp"

namespace rns {

using cdouble = std::complex<double>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Matrix7c = Eigen::Matrix<cdouble, 7, 7>;
using Vector7c = Eigen::Matrix<cdouble, 7, 1>;

/// Unknowns (tau, u, e, z) of the conservative system.
using ConsState = Eigen::Vector4d;

/// G(x; lambda) = G0 + lambda G1. Every entry is real apart from lambda.
struct AffineG {
    Matrix7d G0 = Matrix7d::Zero();
    Matrix7d G1 = Matrix7d::Zero();

    template <typename Scalar>
    Eigen::Matrix<Scalar, 7, 7> operator()(const Scalar& lambda) const
    {
        return G0.cast<Scalar>() + lambda * G1.cast<Scalar>();
    }
};

/// Flux-variable coefficients at a base state U = (tau, u, e, z) with
/// derivative U_x. Layout of the 7-vector: (Y1, Y2[3], u, e, z).
AffineG flux_coefficients(const ConsState& U, const ConsState& U_x, const WaveParams& p);

/// Matrix blocks of the linearized conservative system at a base state;
/// exposed so tests can compare against an independent linearization.
struct LinearizedBlocks {
    Eigen::Matrix4d a0;
    Eigen::Matrix4d a1;
    Eigen::Matrix4d A;     // a1 - s a0 - dB(., U_x)
    Eigen::Matrix4d B;
    Eigen::Matrix4d E;     // dR
};

LinearizedBlocks linearized_blocks(const ConsState& U, const ConsState& U_x,
                                   const WaveParams& p);

/// Eigenvalue problem W' = G(x; lambda) W built from a profile.
class SpectralSystem {
  public:
    explicit SpectralSystem(std::shared_ptr<const Profile> profile);

    const Profile& profile() const { return *profile_; }
    const WaveParams& params() const { return profile_->params(); }
    double x_min() const { return profile_->x_min(); }
    double x_max() const { return profile_->x_max(); }

    /// Throws DomainError outside [x_min, x_max].
    AffineG affine(double x) const;
    Matrix7c G(double x, cdouble lambda) const { return affine(x)(lambda); }

    const AffineG& affine_plus() const { return plus_; }
    const AffineG& affine_minus() const { return minus_; }
    Matrix7c G_plus(cdouble lambda) const { return plus_(lambda); }
    Matrix7c G_minus(cdouble lambda) const { return minus_(lambda); }

    /// Base state and derivative from the profile interpolant, u = 1 - tau.
    ConsState base_state(double x) const;
    ConsState base_derivative(double x) const;

  private:
    std::shared_ptr<const Profile> profile_;
    AffineG plus_;
    AffineG minus_;
};

/// Writes G(x; lambda) as CSV rows "row,col,re,im".
void write_G_csv(std::ostream& os, const SpectralSystem& sys, double x, cdouble lambda);

} // namespace rns
