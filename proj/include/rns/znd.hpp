#pragma once

#include <vector>

#include "rns/gasdyn.hpp"

namespace rns {

struct ZndState {
    double tau;
    double u;
    double e;
    double T;
};

/// Inviscid reaction-zone profile on [-M_minus, 0] with the shock at x = 0
/// (z = 1). Grid values are stored from the shock backward, x decreasing.
struct ZndProfile {
    std::vector<double> x;
    std::vector<double> tau;
    std::vector<double> u;
    std::vector<double> e;
    std::vector<double> z;
    std::vector<double> T;
    ZndState neumann{};
    double e_mid = 0.0;
    double z_seed = 1.0;

    std::size_t size() const { return x.size(); }
    /// Linear-in-grid lookup of z; x must lie in [x.front(), x.back()].
    double z_at(double xq) const;
    /// Location where z = 1/2, by bisection on the monotone stored grid.
    double half_reaction_point() const;
};

/// Strong-branch state with partial heat release q(1 - z).
ZndState znd_state_at_z(double z, const WaveParams& p);

/// Neumann-spike energy, i.e. the energy immediately behind the shock.
double znd_e_mid(const WaveParams& p);

/// Seed offset below z = 1 used to start the backward integration.
inline constexpr double kZndSeed = 1e-12;

/// Integrates dz/dx = k phi(T(z)) z backward from the shock to x = -M_minus.
ZndProfile znd_profile(const WaveParams& p, double M_minus, double rtol = 1e-10);

/// Location of z = 1/2 for the given parameters.
double znd_half_reaction_point(const WaveParams& p, double rtol = 1e-10);

struct KCalibration {
    double k;
    double x_half_unit_k; // x(z = 1/2) at k = 1
    double z_check;       // z(x_target) after re-integration with k
};

/// Reaction rate placing the ZND half-reaction point at x_target (default -10).
KCalibration calibrate_k(const WaveParams& p, double x_target = -10.0);

} // namespace rns
