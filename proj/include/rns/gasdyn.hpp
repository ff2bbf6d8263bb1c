#pragma once

#include <cmath>
#include <complex>

#include "rns/errors.hpp"

namespace rns {

/// Physical and numerical parameters of a strong detonation in the scaled
/// frame where the wave speed, unburned specific volume and unburned velocity
/// are fixed to 1, 1 and 0.
struct WaveParams {
    double e_plus = 6.23e-2;
    double q = 6.23e-1;
    double E_A = 3.1;
    double Gamma = 0.2;
    double nu = 0.1;
    double d = 0.1;
    double kappa_v = 0.1;
    double k = 1.0;
    double T_ig = 6.64e-2;
    double c_v = 1.0;

    static constexpr double s = 1.0;
    static constexpr double tau_plus = 1.0;
    static constexpr double u_plus = 0.0;

    /// Throws DomainError (or CJLimitExceeded for q > q_CJ) on an
    /// inadmissible parameter set.
    void validate() const;
};

/// Unburned (+) and burned (-) equilibria closed by Rankine-Hugoniot.
struct EndStates {
    double tau_plus = 1.0;
    double u_plus = 0.0;
    double e_plus = 0.0;
    double z_plus = 1.0;
    double y_plus = 0.0;
    double T_plus = 0.0;

    double tau_minus = 0.0;
    double u_minus = 0.0;
    double e_minus = 0.0;
    double z_minus = 0.0;
    double y_minus = 0.0;
    double T_minus = 0.0;
};

template <typename Scalar>
struct PressureState {
    Scalar p;
    Scalar p_tau;
    Scalar p_e;
    Scalar p_z;
};

/// Ideal-gas pressure p = Gamma e / tau and its partials.
template <typename Scalar>
PressureState<Scalar> pressure(const Scalar& tau, const Scalar& e, double Gamma)
{
    using std::real;
    if (!(real(tau) > 0.0) || !(real(e) > 0.0))
        throw DomainError("pressure requires tau > 0 and e > 0");
    return {Gamma * e / tau, -Gamma * e / (tau * tau), Gamma / tau, Scalar(0)};
}

/// Arrhenius ignition function with temperature cut-off; phi(T_ig) = 0.
template <typename Scalar>
Scalar ignition_phi(const Scalar& T, double E_A, double T_ig)
{
    using std::exp;
    using std::real;
    if (!(real(T) > T_ig))
        return Scalar(0);
    return exp(-E_A / (T - T_ig));
}

/// phi as a function of internal energy, T = e / c_v.
template <typename Scalar>
Scalar ignition_phi_e(const Scalar& e, const WaveParams& p)
{
    return ignition_phi(Scalar(e / p.c_v), p.E_A, p.T_ig);
}

/// d/de of ignition_phi_e.
template <typename Scalar>
Scalar ignition_phi_prime_e(const Scalar& e, const WaveParams& p)
{
    const Scalar T = e / p.c_v;
    using std::real;
    if (!(real(T) > p.T_ig))
        return Scalar(0);
    const Scalar dT = T - p.T_ig;
    return ignition_phi(T, p.E_A, p.T_ig) * p.E_A / (p.c_v * dT * dT);
}

/// Discriminant of the burned-state quadratic; negative beyond the CJ limit.
double end_state_discriminant(double e_plus, double q, double Gamma);

/// Largest heat release for which a strong detonation end state exists.
double q_cj(double e_plus, double Gamma);

/// Strong-branch burned state for heat release q (the minus root).
EndStates rh_end_state(double e_plus, double q, double Gamma, double c_v = 1.0);
EndStates rh_end_state(const WaveParams& p);

struct OverdriveEstimate {
    double f;
    /// q lies outside q < 1/(2 Gamma (Gamma + 2)), where the asymptotic form
    /// is not meaningful.
    bool outside_validity;
};

/// Small-e_plus asymptotic overdrive f ~ 1 / (2 Gamma (Gamma + 2) q).
OverdriveEstimate overdrive_from_q(double q, double Gamma);

/// Root of q0 e = q_CJ(e) on (0, 1/(Gamma(Gamma+1))] by safeguarded Newton.
double e_cj_solve(double q0, double Gamma);

struct ScaledWave {
    double e_plus;
    double q;
    double E_A;
};

/// Map overdrive f and Erpenbeck-scaled (q0, E0) to scaled (e_plus, q, E_A).
ScaledWave erpenbeck_convert(double f, double q0, double E0, double Gamma);

/// Convex combination e_ig = (1 - w) e_plus + w e_mid.
double ignition_energy_from_weight(double e_plus, double e_mid, double w);

} // namespace rns
