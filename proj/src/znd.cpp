#include "rns/znd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rns/ode.hpp"

namespace rns {

namespace {

using Vec1 = Eigen::Matrix<double, 1, 1>;

void check_ignition(const WaveParams& p)
{
    const ZndState spike = znd_state_at_z(1.0, p);
    if (!(spike.T > p.T_ig))
        throw IgnitionFailure("Neumann temperature " + std::to_string(spike.T) +
                              " does not exceed T_ig = " + std::to_string(p.T_ig));
}

double znd_rate(double z, const WaveParams& p)
{
    const double zc = std::clamp(z, 0.0, 1.0);
    return p.k * ignition_phi(znd_state_at_z(zc, p).T, p.E_A, p.T_ig) * z;
}

// Integrates z from (x0, z0) to x1 with the ZND rate.
double advance(const WaveParams& p, double x0, double z0, double x1, double rtol)
{
    Vec1 y;
    y[0] = z0;
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-16;
    integrate_dp45([&](double, const Vec1& v) { return Vec1{znd_rate(v[0], p)}; },
                   x0, x1, y, opt);
    return y[0];
}

} // namespace

ZndState znd_state_at_z(double z, const WaveParams& p)
{
    if (!(z >= 0.0 && z <= 1.0))
        throw DomainError("znd_state_at_z requires z in [0, 1]");
    const EndStates s = rh_end_state(p.e_plus, p.q * (1.0 - z), p.Gamma, p.c_v);
    return {s.tau_minus, s.u_minus, s.e_minus, s.T_minus};
}

double znd_e_mid(const WaveParams& p) { return znd_state_at_z(1.0, p).e; }

double ZndProfile::z_at(double xq) const
{
    if (x.empty() || xq > x.front() || xq < x.back())
        throw DomainError("z_at outside the ZND grid");
    // x is stored in decreasing order.
    auto it = std::lower_bound(x.begin(), x.end(), xq, std::greater<double>());
    const auto i = static_cast<std::size_t>(it - x.begin());
    if (i == 0)
        return z.front();
    const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
    return z[i - 1] + t * (z[i] - z[i - 1]);
}

double ZndProfile::half_reaction_point() const
{
    if (z.empty() || z.back() > 0.5)
        throw DomainTooShort("ZND grid does not reach z = 1/2");
    std::size_t lo = 0, hi = z.size() - 1; // z[lo] > 1/2 >= z[hi]
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (z[mid] > 0.5 ? lo : hi) = mid;
    }
    const double t = (0.5 - z[lo]) / (z[hi] - z[lo]);
    return x[lo] + t * (x[hi] - x[lo]);
}

ZndProfile znd_profile(const WaveParams& p, double M_minus, double rtol)
{
    p.validate();
    check_ignition(p);
    if (!(M_minus > 0.0))
        throw DomainError("M_minus must be positive");

    ZndProfile out;
    out.neumann = znd_state_at_z(1.0, p);
    out.e_mid = out.neumann.e;
    out.z_seed = 1.0 - kZndSeed;

    auto push = [&](double x, double z) {
        const ZndState s = znd_state_at_z(std::clamp(z, 0.0, 1.0), p);
        out.x.push_back(x);
        out.z.push_back(z);
        out.tau.push_back(s.tau);
        out.u.push_back(s.u);
        out.e.push_back(s.e);
        out.T.push_back(s.T);
    };

    Vec1 y;
    y[0] = out.z_seed;
    push(0.0, y[0]);
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-16;
    opt.h_max = M_minus / 200.0;
    const OdeStats st = integrate_dp45(
        [&](double, const Vec1& v) { return Vec1{znd_rate(v[0], p)}; }, 0.0,
        -M_minus, y, opt, [&](double x, Vec1& v, const Vec1&) {
            push(x, v[0]);
            return StepAction::proceed;
        });
    if (!st.success)
        throw DomainError("ZND integration failed at x = " +
                          std::to_string(st.x_reached));
    if (out.z.back() > 1e-4)
        throw DomainTooShort("ZND z(-M_minus) = " + std::to_string(out.z.back()) +
                             " exceeds 1e-4");
    return out;
}

double znd_half_reaction_point(const WaveParams& p, double rtol)
{
    p.validate();
    check_ignition(p);

    // March backward until z drops below 1/2, remembering the last point above.
    Vec1 y;
    y[0] = 1.0 - kZndSeed;
    double x_above = 0.0, z_above = y[0];
    bool crossed = false;
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-16;
    // x_half scales like 1/k; the span below is generous for any admissible k.
    const double span = 1e4 * (1.0 + 1.0 / (p.k * ignition_phi(znd_state_at_z(1.0, p).T,
                                                               p.E_A, p.T_ig)));
    integrate_dp45(
        [&](double, const Vec1& v) { return Vec1{znd_rate(v[0], p)}; }, 0.0, -span,
        y, opt, [&](double x, Vec1& v, const Vec1&) {
            if (v[0] <= 0.5) {
                crossed = true;
                return StepAction::stop;
            }
            x_above = x;
            z_above = v[0];
            return StepAction::proceed;
        });
    if (!crossed)
        throw DomainTooShort("ZND profile never reaches z = 1/2");

    // Newton on x using re-integration from the last point above 1/2.
    double x = x_above;
    double zx = z_above;
    for (int it = 0; it < 30; ++it) {
        const double rate = znd_rate(zx, p);
        const double step = (0.5 - zx) / rate;
        x += step;
        zx = advance(p, x_above, z_above, x, std::min(rtol, 1e-12));
        if (std::abs(zx - 0.5) < 1e-14)
            break;
    }
    return x;
}

KCalibration calibrate_k(const WaveParams& p, double x_target)
{
    if (!(x_target < 0.0))
        throw DomainError("calibration target must lie behind the shock");
    WaveParams unit = p;
    unit.k = 1.0;
    const double x_half = znd_half_reaction_point(unit);
    KCalibration cal;
    cal.x_half_unit_k = x_half;
    cal.k = x_half / x_target;

    WaveParams check = p;
    check.k = cal.k;
    cal.z_check = advance(check, 0.0, 1.0 - kZndSeed, x_target, 1e-12);
    return cal;
}

} // namespace rns
