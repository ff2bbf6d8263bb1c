#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rns/gasdyn.hpp"

namespace rns {

/// Profile unknowns (tau, e, z, y) with y = d z' / tau^2.
using ProfileState = Eigen::Vector4d;

/// Right-hand side of the once-integrated traveling-wave system. The kinetic
/// term in e' enters with a minus sign; that is what integrating the energy
/// balance gives, and it makes the burned end state an equilibrium.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> tw_rhs(const Eigen::Matrix<Scalar, 4, 1>& U,
                                   const WaveParams& p)
{
    using std::real;
    const Scalar tau = U[0], e = U[1], z = U[2], y = U[3];
    if (!(real(tau) > 0.0))
        throw DomainError("tw_rhs requires tau > 0");
    const double ep = p.e_plus;
    Eigen::Matrix<Scalar, 4, 1> out;
    out[0] = -(tau * (tau - 1.0) + p.Gamma * (e - ep * tau)) / p.nu;
    out[1] = -(tau / p.kappa_v) *
             ((e - ep) - 0.5 * (tau - 1.0) * (tau - 1.0) + p.Gamma * ep * (tau - 1.0) +
              p.q * (y + z - 1.0));
    out[2] = tau * tau * y / p.d;
    out[3] = p.k * ignition_phi_e(e, p) * z - tau * tau * y / p.d;
    return out;
}

Eigen::Matrix4d tw_jacobian(const ProfileState& U, const WaveParams& p);

ProfileState unburned_state(const WaveParams& p);
ProfileState burned_state(const WaveParams& p);

/// Linearization of the profile system at both equilibria together with the
/// projective boundary rows used to truncate the domain.
struct EndJacobians {
    Eigen::Matrix4d J_plus;
    Eigen::Matrix4d J_minus;
    Eigen::Vector4cd eig_plus;
    Eigen::Vector4cd eig_minus;
    int stable_plus = 0;   // Re < 0 at the unburned state
    int unstable_minus = 0; // Re > 0 at the burned state
    /// Spectral projector onto the stable subspace of J_plus.
    Eigen::Matrix4d P_stable_plus;
    /// Spectral projector onto the unstable subspace of J_minus.
    Eigen::Matrix4d P_unstable_minus;
    /// Rows annihilating the stable subspace at +: bc_plus (U - U+) = 0.
    Eigen::MatrixXd bc_plus;
    /// Rows annihilating the unstable subspace at -: bc_minus (U - U-) = 0.
    Eigen::MatrixXd bc_minus;
};

EndJacobians end_jacobians(const WaveParams& p);

struct ProfileDiagnostics {
    double M_minus = 0.0;
    double M_plus = 0.0;
    std::size_t intervals = 0;
    int newton_iterations = 0;
    int mesh_refinements = 0;
    int domain_extensions = 0;
    double max_scaled_residual = 0.0;  // max over midpoints of |r| / max(atol, rtol |f|)
    double max_abs_residual = 0.0;
    double endpoint_deviation_plus = 0.0;
    double endpoint_deviation_minus = 0.0;
};

/// Converged heteroclinic orbit on [-M_minus, M_plus] with the C^1 piecewise
/// collocation interpolant. Immutable once constructed.
class Profile {
  public:
    Profile(WaveParams params, std::vector<double> mesh,
            std::vector<ProfileState> points, std::vector<ProfileState> slopes,
            ProfileDiagnostics diag);

    const WaveParams& params() const { return params_; }
    const EndStates& end_states() const { return ends_; }
    const ProfileDiagnostics& diagnostics() const { return diag_; }
    const std::vector<double>& mesh() const { return mesh_; }

    double x_min() const { return mesh_.front(); }
    double x_max() const { return mesh_.back(); }

    /// Interpolated (tau, e, z, y); x is clamped to the domain.
    ProfileState state(double x) const;
    ProfileState derivative(double x) const;

    double u(double x) const { return 1.0 - state(x)[0]; }
    double u_x(double x) const { return -derivative(x)[0]; }

    /// Collocation point values; 3 per interval plus the last node.
    const std::vector<ProfileState>& points() const { return points_; }
    const std::vector<ProfileState>& slopes() const { return slopes_; }

  private:
    std::size_t interval_of(double x) const;

    WaveParams params_;
    EndStates ends_;
    std::vector<double> mesh_;
    std::vector<ProfileState> points_;
    std::vector<ProfileState> slopes_;
    ProfileDiagnostics diag_;
};

struct ProfileOptions {
    double M_minus = 25.0;
    double M_plus = 5.0;
    double rtol = 1e-6;
    double atol = 1e-8;
    double endpoint_tol = 1e-4;
    double domain_growth = 1.5;
    double max_domain = 400.0;
    int initial_mesh = 400;
    std::size_t max_intervals = 40000;
    int max_newton = 60;
    int max_refinements = 25;
};

using ProfileGuess = std::function<ProfileState(double)>;

/// Smoothed ZND template: ZND reaction zone for x < 0, unburned state ahead,
/// blended over a width nu and shifted so the phase condition nearly holds.
ProfileGuess znd_template(const WaveParams& p);

/// Guess that follows an existing profile and extends it by the end states.
ProfileGuess profile_guess(const Profile& seed);

Profile solve_profile(const WaveParams& p, const ProfileOptions& opt,
                      const ProfileGuess& guess);

/// As above, starting from an existing mesh (e.g. that of a nearby solution)
/// instead of the default initial mesh. The mesh must contain x = 0.
Profile solve_profile(const WaveParams& p, const ProfileOptions& opt,
                      const ProfileGuess& guess, const std::vector<double>& start_mesh);

/// Phase condition target tau(0).
double phase_tau(const WaveParams& p);

using ParamInterpolator =
    std::function<WaveParams(const WaveParams& from, const WaveParams& to, double t)>;

/// Linear in every field except k, which is interpolated geometrically.
WaveParams interpolate_params(const WaveParams& from, const WaveParams& to, double t);

/// Solves along a parameter path, each solution seeding the next, with step
/// halving (up to max_halvings) when a step fails.
std::vector<Profile> continue_profiles(const std::vector<WaveParams>& path,
                                       const ProfileOptions& opt,
                                       const ProfileGuess& first_guess = {},
                                       const ParamInterpolator& interp = {},
                                       int max_halvings = 8);

/// One-parameter family of waves, e.g. E_A with k calibrated at each value.
using ParamFamily = std::function<WaveParams(double t)>;

struct ArclengthOptions {
    double first_step = 0.02; // natural step that produces the first secant
    double ds_initial = 0.05;
    double ds_min = 1e-5;
    double ds_max = 0.25;
    int max_steps = 2000;
    int max_newton = 25;
};

/// Pseudo-arclength continuation along family(t) starting at t_start. Returns
/// the profile at each target (sorted, >= t_start) the first time the branch
/// passes it, so steep sections and folds in t do not stall the sweep.
std::vector<Profile> trace_family(const ParamFamily& family, double t_start,
                                  const std::vector<double>& targets,
                                  const ProfileOptions& opt, const ProfileGuess& first_guess = {},
                                  const ArclengthOptions& aopt = {});

struct ProfileCheck {
    bool endpoints_ok = false;
    bool positivity_ok = false;
    bool residual_ok = false;
    double min_tau = 0.0;
    double min_e = 0.0;
    double min_z = 0.0;
    double max_z = 0.0;
    double max_scaled_residual = 0.0;
    bool ok() const { return endpoints_ok && positivity_ok && residual_ok; }
};

/// Independent post-hoc check of the profile invariants. Residuals are
/// sampled at `samples_per_interval` points inside each interval.
ProfileCheck verify_profile(const Profile& prof, const ProfileOptions& opt,
                            int samples_per_interval = 1);

/// |tau'| level, relative to its peak, that marks the edges of the shock layer.
inline constexpr double kShockEdgeFraction = 0.1;

struct ShockReactionRatio {
    double shock_center = 0.0; // location of max |tau'|
    double shock_left = 0.0;   // edges where |tau'| falls to kShockEdgeFraction of the peak
    double shock_right = 0.0;
    double shock_width = 0.0;
    double reaction_length = 0.0; // shock center to the point where z = 1/2
    double ratio = 0.0;
    double z_entry = 0.0; // z at the burned-side edge of the shock layer
    double z_exit = 0.0;  // z at the unburned-side edge
};

ShockReactionRatio shock_reaction_ratio(const Profile& prof);

} // namespace rns
