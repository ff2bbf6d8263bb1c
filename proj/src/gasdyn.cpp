#include "rns/gasdyn.hpp"

#include <algorithm>
#include <string>

namespace rns {

namespace {

std::string fmt(double v) { return std::to_string(v); }

double e_plus_max(double Gamma) { return 1.0 / (Gamma * (Gamma + 1.0)); }

void check_e_plus(double e_plus, double Gamma)
{
    if (!(Gamma > 0.0))
        throw DomainError("Gamma must be positive, got " + fmt(Gamma));
    if (!(e_plus >= 0.0) || e_plus > e_plus_max(Gamma))
        throw DomainError("e_plus must lie in [0, 1/(Gamma(Gamma+1))], got " +
                          fmt(e_plus));
}

} // namespace

void WaveParams::validate() const
{
    check_e_plus(e_plus, Gamma);
    if (!(q >= 0.0))
        throw DomainError("q must be nonnegative");
    if (!(E_A >= 0.0))
        throw DomainError("E_A must be nonnegative");
    if (!(nu > 0.0) || !(d > 0.0) || !(kappa_v > 0.0) || !(k > 0.0) ||
        !(c_v > 0.0))
        throw DomainError("nu, d, kappa_v, k and c_v must be positive");
    if (!std::isfinite(T_ig))
        throw DomainError("T_ig must be finite");
    if (q > q_cj(e_plus, Gamma))
        throw CJLimitExceeded("q = " + fmt(q) + " exceeds q_CJ = " +
                              fmt(q_cj(e_plus, Gamma)));
}

double end_state_discriminant(double e_plus, double q, double Gamma)
{
    const double a = (Gamma + 1.0) * (Gamma * e_plus + 1.0);
    return a * a -
           Gamma * (Gamma + 2.0) * (1.0 + 2.0 * (Gamma + 1.0) * e_plus + 2.0 * q);
}

double q_cj(double e_plus, double Gamma)
{
    check_e_plus(e_plus, Gamma);
    const double a = (Gamma + 1.0) * (Gamma * e_plus + 1.0);
    return (a * a - Gamma * (Gamma + 2.0) * (1.0 + 2.0 * (Gamma + 1.0) * e_plus)) /
           (2.0 * Gamma * (Gamma + 2.0));
}

EndStates rh_end_state(double e_plus, double q, double Gamma, double c_v)
{
    check_e_plus(e_plus, Gamma);
    const double disc = end_state_discriminant(e_plus, q, Gamma);
    if (disc < 0.0)
        throw CJLimitExceeded("negative end-state discriminant " + fmt(disc));

    EndStates s;
    s.e_plus = e_plus;
    s.T_plus = e_plus / c_v;
    s.tau_minus =
        ((Gamma + 1.0) * (Gamma * e_plus + 1.0) - std::sqrt(disc)) / (Gamma + 2.0);
    s.u_minus = 1.0 - s.tau_minus;
    s.e_minus = s.tau_minus * (Gamma * e_plus + 1.0 - s.tau_minus) / Gamma;
    s.T_minus = s.e_minus / c_v;
    return s;
}

EndStates rh_end_state(const WaveParams& p)
{
    p.validate();
    return rh_end_state(p.e_plus, p.q, p.Gamma, p.c_v);
}

OverdriveEstimate overdrive_from_q(double q, double Gamma)
{
    if (!(q > 0.0) || !(Gamma > 0.0))
        throw DomainError("overdrive_from_q requires q > 0 and Gamma > 0");
    const double scale = 2.0 * Gamma * (Gamma + 2.0);
    return {1.0 / (scale * q), q >= 1.0 / scale};
}

double e_cj_solve(double q0, double Gamma)
{
    if (!(q0 > 0.0) || !(Gamma > 0.0))
        throw DomainError("e_cj_solve requires q0 > 0 and Gamma > 0");

    // g(e) = q_CJ(e) - q0 e is strictly decreasing, positive at 0 and
    // negative at e_max where q_CJ vanishes.
    const double denom = 2.0 * Gamma * (Gamma + 2.0);
    auto g = [&](double e) { return q_cj(e, Gamma) - q0 * e; };
    auto dg = [&](double e) {
        const double a = (Gamma + 1.0) * (Gamma * e + 1.0);
        return (2.0 * a * (Gamma + 1.0) * Gamma -
                Gamma * (Gamma + 2.0) * 2.0 * (Gamma + 1.0)) /
                   denom -
               q0;
    };

    double lo = 0.0;
    double hi = e_plus_max(Gamma);
    double e = std::min(1.0 / (denom * q0), 0.5 * (lo + hi));
    for (int it = 0; it < 200; ++it) {
        const double ge = g(e);
        if (ge == 0.0)
            return e;
        if (ge > 0.0)
            lo = e;
        else
            hi = e;
        if (hi - lo <= 1e-12 * std::max(1.0, hi))
            break;
        double next = e - ge / dg(e);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - e) <= 1e-14)
            return next;
        e = next;
    }
    return 0.5 * (lo + hi);
}

ScaledWave erpenbeck_convert(double f, double q0, double E0, double Gamma)
{
    if (!(f >= 1.0))
        throw DomainError("overdrive f must be >= 1");
    const double e_plus = e_cj_solve(q0, Gamma) / f;
    return {e_plus, q0 * e_plus, E0 * e_plus};
}

double ignition_energy_from_weight(double e_plus, double e_mid, double w)
{
    if (!(w >= 0.0 && w <= 1.0))
        throw DomainError("ignition weight must lie in [0, 1]");
    return (1.0 - w) * e_plus + w * e_mid;
}

} // namespace rns
