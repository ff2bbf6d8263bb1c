#pragma once

#include <map>
#include <memory>
#include <vector>

#include "rns/profile.hpp"
#include "rns/roots.hpp"

namespace rns {

/// E_A -> parameters with every other field of `base` fixed and k
/// recalibrated so that z = 1/2 at x_target in the ZND profile.
ParamFamily energy_family(const WaveParams& base, double x_target = -10.0);

/// Profiles along E_A. Every profile is traced by arclength continuation from
/// one fixed seed energy, so the result for a given E_A does not depend on the
/// order of requests.
class EnergyBranch {
  public:
    EnergyBranch(const WaveParams& base, const ProfileOptions& popt = {},
                 const ArclengthOptions& aopt = {}, double seed_energy = 5.0);

    std::shared_ptr<const Profile> at(double E_A);
    const WaveParams& base() const { return base_; }
    double seed_energy() const { return seed_E_; }

  private:
    WaveParams base_;
    ParamFamily family_;
    ProfileOptions popt_;
    ArclengthOptions aopt_;
    double seed_E_;
    std::shared_ptr<const Profile> seed_;
    std::map<double, std::shared_ptr<const Profile>> memo_;
};

struct StabilityOptions {
    double r_out = 10.0;
    double r_in = 1e-4;
    EvansOptions evans;
    RootOptions roots;
    int max_escalations = 2; // node-density doublings before a contour is given up
};

/// Winding number of D over the standard semi-annulus; the count of unstable
/// eigenvalues with multiplicity.
int unstable_count(std::shared_ptr<const Profile> prof, const StabilityOptions& opt);

RootSet unstable_roots(std::shared_ptr<const Profile> prof, const StabilityOptions& opt);

enum class BoundarySide { lower, upper };

struct BoundaryProbe {
    double E_A;
    int count;
};

struct BoundaryPoint {
    double nu = 0.0;
    BoundarySide side = BoundarySide::lower;
    double E_A = 0.0;
    double abs_err = 0.0;
    std::vector<BoundaryProbe> probes;
};

/// Bisection on "no unstable eigenvalues" inside [E_lo, E_hi]. For the lower
/// boundary E_lo must be stable and E_hi unstable; the upper boundary is the
/// other way round. Otherwise BadBracket.
BoundaryPoint neutral_boundary(EnergyBranch& branch, BoundarySide side, double E_lo,
                               double E_hi, const StabilityOptions& opt, double tol = 0.05);

struct TrackOptions {
    double min_step = 0.03125;
    double tie_tolerance = 1e-9; // relative gap between the two best assignments
};

struct TrajectoryPoint {
    double E_A = 0.0;
    RootSet roots;
    std::vector<int> lineage; // one id per root
};

struct RootEvent {
    enum class Kind { entry, exit };
    Kind kind;
    double E_before;
    double E_after;
    int lineage;
};

struct RootTrajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<RootEvent> events;
    std::vector<int> broken; // lineages whose links could not be made unambiguously
    int lineages = 0;
};

/// locate_roots at each grid energy with halving of steps that change the
/// root count or cannot be matched, down to opt.min_step.
RootTrajectory track_roots(EnergyBranch& branch, const std::vector<double>& grid,
                           const StabilityOptions& opt, const TrackOptions& topt = {});

struct Assignment {
    std::vector<int> match; // match[i] = index in `to`, or -1
    bool valid = true;      // every link shorter than half the minimum root spacing
    bool ambiguous = false;
    double cost = 0.0;
};

/// Nearest-neighbour lineage links minimizing the total squared displacement.
Assignment match_roots(const std::vector<cdouble>& from, const std::vector<cdouble>& to,
                       double tie_tolerance = 1e-9);

enum class FitModel { linear, linear_log };

struct FitResult {
    FitModel model = FitModel::linear;
    Eigen::VectorXd coefficients; // (a, b) or (a, b, c) for a + b nu + c ln nu
    Eigen::VectorXd residuals;
    double max_residual = 0.0;
};

FitResult fit_boundary(const std::vector<double>& nu, const std::vector<double>& E_A,
                       FitModel model);

double evaluate_fit(const FitResult& fit, double nu);

struct DelayRow {
    double nu;
    double E_minus;
    double delay; // (E_minus - E_star) / E_star
};

std::vector<DelayRow> viscous_delay(const std::vector<double>& nu,
                                    const std::vector<double>& E_minus, double E_star);

/// Delay from a linear fit of the lower boundary.
std::vector<DelayRow> viscous_delay(const FitResult& lower_fit, const std::vector<double>& nu,
                                    double E_star);

struct BoundarySample {
    double nu;
    double E_A;
    double abs_err;
};

/// Reference neutral boundaries for the nu = d = kappa_v family.
const std::vector<BoundarySample>& reference_upper_boundary();
const std::vector<BoundarySample>& reference_lower_boundary();

} // namespace rns
