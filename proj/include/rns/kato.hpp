#pragma once

#include <Eigen/Dense>

#include "rns/linop.hpp"

namespace rns {

/// Which limit matrix a subspace belongs to: the decaying subspace of G_plus
/// or the growing subspace of G_minus.
enum class Side { plus, minus };

/// Number of eigenvalues of G_side(lambda) with Re < 0 (plus) or Re > 0 (minus).
int splitting_dimension(const AffineG& G_inf, cdouble lambda, Side side);

/// Spectral projector onto the selected k-dimensional invariant subspace, its
/// complex derivative in lambda, and the sum of the selected eigenvalues.
struct ProjectorData {
    Eigen::MatrixXcd P;
    Eigen::MatrixXcd dP;
    cdouble eig_sum;
    double gap = 0.0; // min distance between selected and unselected eigenvalues
    double real_part_margin = 0.0; // Re separation at the selection cut
};

/// Selection sorts eigenvalues by real part (imaginary part breaks ties) and
/// keeps the k smallest (plus) or k largest (minus).
ProjectorData projector_data(const AffineG& G_inf, cdouble lambda, Side side, int k);

struct KatoOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
};

/// Analytic basis of the selected subspace, transported in lambda by
/// V' = [P', P] V. Seeded at a real lambda with a real orthonormal basis so
/// that transport along conjugate paths gives conjugate bases.
class KatoBasis {
  public:
    KatoBasis(AffineG G_inf, Side side, double lambda0, KatoOptions opt = {});

    cdouble lambda() const { return lambda_; }
    int dimension() const { return k_; }
    Side side() const { return side_; }
    const Eigen::MatrixXcd& basis() const { return V_; }
    /// Sum of the selected eigenvalues at the current lambda.
    cdouble eig_sum() const;

    /// Transports along the straight segment to lambda1. Throws SplittingLost
    /// if the rank of the projector changes along the way.
    void transport_to(cdouble lambda1);

  private:
    AffineG G_;
    Side side_;
    KatoOptions opt_;
    int k_ = 0;
    cdouble lambda_;
    Eigen::MatrixXcd V_;
};

} // namespace rns
