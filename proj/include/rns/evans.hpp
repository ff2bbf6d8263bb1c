#pragma once

#include <functional>
#include <memory>

#include "rns/kato.hpp"
#include "rns/linop.hpp"

namespace rns {

struct EvansOptions {
    double rtol = 1e-6;
    double atol = 1e-8;
    double ortho_tol = 1e-8;   // polar retraction threshold on |Omega* Omega - I|
    double anchor = 1.0;       // real seed point of the Kato bases
    double mu_weight = 1.0;    // scales the exponential weight; 0 disables it
    std::size_t max_steps = 200000;
    /// Optional analytic, nonvanishing factor applied to the first column of
    /// the + seed. Changes D by that factor and leaves the zeros alone.
    std::function<cdouble(cdouble)> seed_gauge;
    KatoOptions kato;
};

struct ManifoldStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t retractions = 0;
};

struct EvansValue {
    cdouble lambda;
    cdouble D;
    cdouble log_gamma_plus;
    cdouble log_gamma_minus;
    int k_plus = 0;
    int k_minus = 0;
    ManifoldStats plus;
    ManifoldStats minus;
};

/// Evans function of one spectral system. Immutable and safe to share.
class EvansFunction {
  public:
    explicit EvansFunction(std::shared_ptr<const SpectralSystem> sys, EvansOptions opt = {});

    const SpectralSystem& system() const { return *sys_; }
    const EvansOptions& options() const { return opt_; }

    /// Kato bases at the anchor.
    const KatoBasis& seed_plus() const { return seed_plus_; }
    const KatoBasis& seed_minus() const { return seed_minus_; }

    /// D(lambda), with the bases transported from the anchor along a straight line.
    EvansValue operator()(cdouble lambda) const;

    /// D at the common lambda of two already transported bases.
    EvansValue evaluate(const KatoBasis& plus, const KatoBasis& minus) const;

  private:
    std::shared_ptr<const SpectralSystem> sys_;
    EvansOptions opt_;
    KatoBasis seed_plus_;
    KatoBasis seed_minus_;
};

} // namespace rns
