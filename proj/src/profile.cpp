#include "rns/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rns/znd.hpp"

namespace rns {

namespace {

/// Four-stage Lobatto IIIA collocation on the unit interval.
struct Lobatto4 {
    std::array<double, 4> c{};
    // ell[k][j]: monomial coefficient of theta^j in the Lagrange basis l_k.
    std::array<std::array<double, 4>, 4> ell{};
    // a[m][k] = int_0^{c_m} l_k.
    std::array<std::array<double, 4>, 4> a{};

    Lobatto4()
    {
        const double r5 = std::sqrt(5.0);
        c = {0.0, (5.0 - r5) / 10.0, (5.0 + r5) / 10.0, 1.0};
        Eigen::Matrix4d V;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                V(i, j) = std::pow(c[i], j);
        const Eigen::Matrix4d Vinv = V.inverse();
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j)
                ell[k][j] = Vinv(j, k);
        for (int m = 0; m < 4; ++m)
            for (int k = 0; k < 4; ++k)
                a[m][k] = integral(k, c[m]);
    }

    double basis(int k, double t) const
    {
        return ell[k][0] + t * (ell[k][1] + t * (ell[k][2] + t * ell[k][3]));
    }

    double integral(int k, double t) const
    {
        return t * (ell[k][0] +
                    t * (ell[k][1] / 2.0 + t * (ell[k][2] / 3.0 + t * ell[k][3] / 4.0)));
    }
};

const Lobatto4& lobatto()
{
    static const Lobatto4 table;
    return table;
}

double scaled_residual(const ProfileState& r, const ProfileState& f, double rtol,
                       double atol)
{
    double m = 0.0;
    for (int c = 0; c < 4; ++c)
        m = std::max(m, std::abs(r[c]) / std::max(atol, rtol * std::abs(f[c])));
    return m;
}

std::vector<double> initial_mesh(double M_minus, double M_plus, int n)
{
    const int n_left = std::max(4, static_cast<int>(std::lround(0.65 * n)));
    const int n_right = std::max(4, n - n_left);
    const double a = 3.0;
    std::vector<double> mesh;
    mesh.reserve(static_cast<std::size_t>(n_left + n_right + 1));
    for (int i = n_left; i >= 1; --i) {
        const double s = static_cast<double>(i) / n_left;
        mesh.push_back(-M_minus * std::sinh(a * s) / std::sinh(a));
    }
    mesh.push_back(0.0);
    for (int i = 1; i <= n_right; ++i) {
        const double s = static_cast<double>(i) / n_right;
        mesh.push_back(M_plus * std::sinh(a * s) / std::sinh(a));
    }
    return mesh;
}

/// Discrete collocation system on a fixed mesh.
class Collocation {
  public:
    Collocation(const WaveParams& p, const EndJacobians& ends, std::vector<double> mesh)
        : p_{p}, ends_{ends}, mesh_{std::move(mesh)}
    {
        n_int_ = mesh_.size() - 1;
        n_pts_ = 3 * n_int_ + 1;
        const auto it = std::find(mesh_.begin(), mesh_.end(), 0.0);
        if (it == mesh_.end())
            throw ProfileNotFound("mesh does not contain the phase node x = 0");
        phase_point_ = 3 * static_cast<std::size_t>(it - mesh_.begin());
        U_minus_ = burned_state(p_);
        U_plus_ = unburned_state(p_);
        tau_mid_ = phase_tau(p_);
    }

    std::size_t size() const { return 4 * n_pts_; }
    std::size_t points() const { return n_pts_; }

    double point_x(std::size_t g) const
    {
        const std::size_t i = std::min(g / 3, n_int_ - 1);
        const std::size_t m = g - 3 * i;
        return mesh_[i] + lobatto().c[m] * (mesh_[i + 1] - mesh_[i]);
    }

    Eigen::VectorXd sample(const ProfileGuess& guess) const
    {
        Eigen::VectorXd X(size());
        for (std::size_t g = 0; g < n_pts_; ++g)
            X.segment<4>(4 * g) = guess(point_x(g));
        return X;
    }

    void evaluate(const Eigen::VectorXd& X, Eigen::VectorXd& R,
                  Eigen::SparseMatrix<double>* J) const
    {
        const auto& L = lobatto();
        std::vector<ProfileState> F(n_pts_);
        std::vector<Eigen::Matrix4d> JF;
        if (J)
            JF.resize(n_pts_);
        for (std::size_t g = 0; g < n_pts_; ++g) {
            const ProfileState U = X.segment<4>(4 * g);
            if (!(U[0] > 0.0))
                throw ProfileNotFound("nonpositive tau during Newton iteration");
            F[g] = tw_rhs<double>(U, p_);
            if (J)
                JF[g] = tw_jacobian(U, p_);
        }

        R.setZero(size());
        std::vector<Eigen::Triplet<double>> trip;
        if (J)
            trip.reserve(n_int_ * 3 * 4 * 20 + 32);

        std::size_t row = 0;
        const auto& Bm = ends_.bc_minus;
        for (Eigen::Index r = 0; r < Bm.rows(); ++r, ++row) {
            R[row] = Bm.row(r).dot(X.segment<4>(0) - U_minus_);
            if (J)
                for (int c = 0; c < 4; ++c)
                    trip.emplace_back(row, c, Bm(r, c));
        }

        for (std::size_t i = 0; i < n_int_; ++i) {
            const double h = mesh_[i + 1] - mesh_[i];
            const std::size_t g0 = 3 * i;
            for (int m = 1; m < 4; ++m) {
                ProfileState res = X.segment<4>(4 * (g0 + m)) - X.segment<4>(4 * g0);
                for (int k = 0; k < 4; ++k)
                    res -= h * L.a[m][k] * F[g0 + k];
                R.segment<4>(row) = res;
                if (J) {
                    for (int k = 0; k < 4; ++k) {
                        Eigen::Matrix4d blk = -h * L.a[m][k] * JF[g0 + k];
                        if (k == 0)
                            blk -= Eigen::Matrix4d::Identity();
                        if (k == m)
                            blk += Eigen::Matrix4d::Identity();
                        for (int r = 0; r < 4; ++r)
                            for (int c = 0; c < 4; ++c)
                                if (blk(r, c) != 0.0)
                                    trip.emplace_back(row + r, 4 * (g0 + k) + c,
                                                      blk(r, c));
                    }
                }
                row += 4;
            }
        }

        R[row] = X[4 * phase_point_] - tau_mid_;
        if (J)
            trip.emplace_back(row, 4 * phase_point_, 1.0);
        ++row;

        const auto& Bp = ends_.bc_plus;
        const std::size_t last = 4 * (n_pts_ - 1);
        for (Eigen::Index r = 0; r < Bp.rows(); ++r, ++row) {
            R[row] = Bp.row(r).dot(X.segment<4>(last) - U_plus_);
            if (J)
                for (int c = 0; c < 4; ++c)
                    trip.emplace_back(row, last + c, Bp(r, c));
        }

        if (row != size())
            throw IllConditionedEnds("boundary condition count does not close the system");
        if (J) {
            J->resize(size(), size());
            J->setFromTriplets(trip.begin(), trip.end());
        }
    }

    /// Damped Newton; returns iterations used or -1 on failure.
    int newton(Eigen::VectorXd& X, int max_iter) const
    {
        Eigen::VectorXd R, Rt;
        Eigen::SparseMatrix<double> J;
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        try {
            evaluate(X, R, &J);
        }
        catch (const ProfileNotFound&) {
            return -1;
        }
        double rn = R.norm();
        for (int it = 1; it <= max_iter; ++it) {
            lu.compute(J);
            if (lu.info() != Eigen::Success)
                return -1;
            const Eigen::VectorXd dX = lu.solve(-R);
            if (!dX.allFinite())
                return -1;
            double alpha = 1.0;
            bool accepted = false;
            Eigen::VectorXd Xt;
            for (int ls = 0; ls < 30; ++ls) {
                Xt = X + alpha * dX;
                bool ok = true;
                for (std::size_t g = 0; g < n_pts_; ++g)
                    if (!(Xt[4 * g] > 0.0)) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    try {
                        evaluate(Xt, Rt, nullptr);
                        if (Rt.allFinite() && Rt.norm() <= (1.0 - 1e-4 * alpha) * rn) {
                            accepted = true;
                            break;
                        }
                    }
                    catch (const ProfileNotFound&) {
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted)
                return -1;
            X = Xt;
            const double step = alpha * dX.lpNorm<Eigen::Infinity>();
            evaluate(X, R, &J);
            rn = R.norm();
            if ((alpha == 1.0 &&
                 step <= 1e-11 * (1.0 + X.lpNorm<Eigen::Infinity>())) ||
                R.lpNorm<Eigen::Infinity>() <= 1e-12)
                return it;
        }
        return -1;
    }

    Profile make_profile(const Eigen::VectorXd& X, ProfileDiagnostics diag) const
    {
        std::vector<ProfileState> pts(n_pts_), slopes(n_pts_);
        for (std::size_t g = 0; g < n_pts_; ++g) {
            pts[g] = X.segment<4>(4 * g);
            slopes[g] = tw_rhs<double>(pts[g], p_);
        }
        diag.intervals = n_int_;
        diag.M_minus = -mesh_.front();
        diag.M_plus = mesh_.back();
        return Profile(p_, mesh_, std::move(pts), std::move(slopes), diag);
    }

  private:
    WaveParams p_;
    const EndJacobians& ends_;
    std::vector<double> mesh_;
    std::size_t n_int_ = 0;
    std::size_t n_pts_ = 0;
    std::size_t phase_point_ = 0;
    ProfileState U_minus_, U_plus_;
    double tau_mid_ = 0.0;
};

constexpr std::array<double, 3> kResidualSamples{0.15, 0.5, 0.85};

/// Per-interval max scaled residual of the interpolant.
std::vector<double> interval_residuals(const Profile& prof, const ProfileOptions& opt,
                                       const std::vector<double>& thetas,
                                       double* max_abs)
{
    const auto& mesh = prof.mesh();
    std::vector<double> out(mesh.size() - 1, 0.0);
    double ma = 0.0;
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
        const double h = mesh[i + 1] - mesh[i];
        for (double th : thetas) {
            const double x = mesh[i] + th * h;
            const ProfileState U = prof.state(x);
            const ProfileState f = tw_rhs<double>(U, prof.params());
            const ProfileState r = prof.derivative(x) - f;
            out[i] = std::max(out[i], scaled_residual(r, f, opt.rtol, opt.atol));
            ma = std::max(ma, r.lpNorm<Eigen::Infinity>());
        }
    }
    if (max_abs)
        *max_abs = ma;
    return out;
}

std::vector<double> refine_mesh(const std::vector<double>& mesh,
                                const std::vector<double>& resid)
{
    std::vector<double> out;
    out.reserve(2 * mesh.size());
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
        out.push_back(mesh[i]);
        if (resid[i] > 1.0) {
            const int pieces = resid[i] > 1e3 ? 3 : 2;
            for (int j = 1; j < pieces; ++j)
                out.push_back(mesh[i] + (mesh[i + 1] - mesh[i]) * j / pieces);
        }
    }
    out.push_back(mesh.back());
    return out;
}

std::vector<double> bisect_all(const std::vector<double>& mesh)
{
    std::vector<double> out;
    out.reserve(2 * mesh.size());
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
        out.push_back(mesh[i]);
        out.push_back(0.5 * (mesh[i] + mesh[i + 1]));
    }
    out.push_back(mesh.back());
    return out;
}

/// Extend a mesh to a wider domain by continuing the end spacing geometrically.
std::vector<double> extend_mesh(std::vector<double> mesh, double M_minus, double M_plus)
{
    auto grow = [](double h) { return std::min(h * 1.15, 1.0); };
    double h = std::max(mesh[1] - mesh[0], 1e-3);
    std::vector<double> left;
    double x = mesh.front();
    while (x > -M_minus + 1e-12) {
        h = grow(h);
        x = std::max(x - h, -M_minus);
        left.push_back(x);
    }
    std::reverse(left.begin(), left.end());
    h = std::max(mesh[mesh.size() - 1] - mesh[mesh.size() - 2], 1e-3);
    x = mesh.back();
    while (x < M_plus - 1e-12) {
        h = grow(h);
        x = std::min(x + h, M_plus);
        mesh.push_back(x);
    }
    left.insert(left.end(), mesh.begin(), mesh.end());
    return left;
}

Eigen::MatrixXd annihilator_rows(const Eigen::Matrix4cd& Vinv, const std::vector<int>& rows)
{
    // Real basis of the span of the selected complex left eigenvectors.
    Eigen::MatrixXd stacked(2 * rows.size(), 4);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        stacked.row(2 * r) = Vinv.row(rows[r]).real();
        stacked.row(2 * r + 1) = Vinv.row(rows[r]).imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
    return svd.matrixV().leftCols(static_cast<Eigen::Index>(rows.size())).transpose();
}

} // namespace

Eigen::Matrix4d tw_jacobian(const ProfileState& U, const WaveParams& p)
{
    const double tau = U[0], e = U[1], z = U[2], y = U[3];
    const double ep = p.e_plus;
    const double bracket = (e - ep) - 0.5 * (tau - 1.0) * (tau - 1.0) +
                           p.Gamma * ep * (tau - 1.0) + p.q * (y + z - 1.0);
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 0) = -(2.0 * tau - 1.0 - p.Gamma * ep) / p.nu;
    J(0, 1) = -p.Gamma / p.nu;
    J(1, 0) = -bracket / p.kappa_v - (tau / p.kappa_v) * (1.0 - tau + p.Gamma * ep);
    J(1, 1) = -tau / p.kappa_v;
    J(1, 2) = -tau * p.q / p.kappa_v;
    J(1, 3) = -tau * p.q / p.kappa_v;
    J(2, 0) = 2.0 * tau * y / p.d;
    J(2, 3) = tau * tau / p.d;
    J(3, 0) = -2.0 * tau * y / p.d;
    J(3, 1) = p.k * ignition_phi_prime_e(e, p) * z;
    J(3, 2) = p.k * ignition_phi_e(e, p);
    J(3, 3) = -tau * tau / p.d;
    return J;
}

ProfileState unburned_state(const WaveParams& p) { return {1.0, p.e_plus, 1.0, 0.0}; }

ProfileState burned_state(const WaveParams& p)
{
    const EndStates s = rh_end_state(p);
    return {s.tau_minus, s.e_minus, 0.0, 0.0};
}

double phase_tau(const WaveParams& p)
{
    return 0.5 * (WaveParams::tau_plus + rh_end_state(p).tau_minus);
}

EndJacobians end_jacobians(const WaveParams& p)
{
    p.validate();
    EndJacobians out;
    out.J_plus = tw_jacobian(unburned_state(p), p);
    out.J_minus = tw_jacobian(burned_state(p), p);

    auto analyse = [](const Eigen::Matrix4d& J, Eigen::Vector4cd& eig,
                      Eigen::Matrix4cd& V, Eigen::Matrix4cd& Vinv) {
        Eigen::EigenSolver<Eigen::Matrix4d> es(J);
        if (es.info() != Eigen::Success)
            throw IllConditionedEnds("eigen decomposition failed");
        eig = es.eigenvalues();
        V = es.eigenvectors();
        double gap = 1e300;
        double scale = 1.0;
        for (int i = 0; i < 4; ++i) {
            scale = std::max(scale, std::abs(eig[i]));
            for (int j = i + 1; j < 4; ++j)
                gap = std::min(gap, std::abs(eig[i] - eig[j]));
        }
        if (gap < 1e-10 * scale)
            throw IllConditionedEnds("end-state Jacobian has a repeated eigenvalue");
        Vinv = V.inverse();
        return scale;
    };

    Eigen::Matrix4cd Vp, Vpi, Vm, Vmi;
    const double sp = analyse(out.J_plus, out.eig_plus, Vp, Vpi);
    const double sm = analyse(out.J_minus, out.eig_minus, Vm, Vmi);

    std::vector<int> stable_p, other_p, unstable_m, other_m;
    for (int i = 0; i < 4; ++i) {
        (out.eig_plus[i].real() < -1e-10 * sp ? stable_p : other_p).push_back(i);
        (out.eig_minus[i].real() > 1e-10 * sm ? unstable_m : other_m).push_back(i);
    }
    out.stable_plus = static_cast<int>(stable_p.size());
    out.unstable_minus = static_cast<int>(unstable_m.size());
    if (out.stable_plus + out.unstable_minus != 5)
        throw IllConditionedEnds("stable(+) + unstable(-) dimensions = " +
                                 std::to_string(out.stable_plus + out.unstable_minus) +
                                 ", a transversal connection needs 5");

    auto projector = [](const Eigen::Matrix4cd& V, const Eigen::Matrix4cd& Vinv,
                        const std::vector<int>& idx) {
        Eigen::Matrix4cd P = Eigen::Matrix4cd::Zero();
        for (int i : idx)
            P += V.col(i) * Vinv.row(i);
        return Eigen::Matrix4d(P.real());
    };
    out.P_stable_plus = projector(Vp, Vpi, stable_p);
    out.P_unstable_minus = projector(Vm, Vmi, unstable_m);
    out.bc_plus = annihilator_rows(Vpi, other_p);
    out.bc_minus = annihilator_rows(Vmi, other_m);
    return out;
}

Profile::Profile(WaveParams params, std::vector<double> mesh,
                 std::vector<ProfileState> points, std::vector<ProfileState> slopes,
                 ProfileDiagnostics diag)
    : params_{params}, ends_{rh_end_state(params)}, mesh_{std::move(mesh)},
      points_{std::move(points)}, slopes_{std::move(slopes)}, diag_{diag}
{
    if (mesh_.size() < 2 || points_.size() != 3 * (mesh_.size() - 1) + 1 ||
        slopes_.size() != points_.size())
        throw DomainError("inconsistent profile storage");
}

std::size_t Profile::interval_of(double x) const
{
    const auto it = std::upper_bound(mesh_.begin(), mesh_.end(), x);
    const auto i = static_cast<std::ptrdiff_t>(it - mesh_.begin()) - 1;
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(mesh_.size()) - 2));
}

ProfileState Profile::state(double x) const
{
    x = std::clamp(x, x_min(), x_max());
    const std::size_t i = interval_of(x);
    const double h = mesh_[i + 1] - mesh_[i];
    const double t = (x - mesh_[i]) / h;
    const auto& L = lobatto();
    ProfileState U = points_[3 * i];
    for (int k = 0; k < 4; ++k)
        U += h * L.integral(k, t) * slopes_[3 * i + k];
    return U;
}

ProfileState Profile::derivative(double x) const
{
    x = std::clamp(x, x_min(), x_max());
    const std::size_t i = interval_of(x);
    const double t = (x - mesh_[i]) / (mesh_[i + 1] - mesh_[i]);
    const auto& L = lobatto();
    ProfileState dU = ProfileState::Zero();
    for (int k = 0; k < 4; ++k)
        dU += L.basis(k, t) * slopes_[3 * i + k];
    return dU;
}

ProfileGuess znd_template(const WaveParams& p)
{
    p.validate();
    // Long ZND reaction zone so the template reaches the burned state.
    double M = 40.0;
    ZndProfile znd;
    for (int attempt = 0;; ++attempt) {
        try {
            znd = znd_profile(p, M);
            break;
        }
        catch (const DomainTooShort&) {
            if (attempt > 12)
                throw;
            M *= 1.5;
        }
    }
    const ProfileState Up = unburned_state(p);
    const ProfileState Um = burned_state(p);
    const double width = p.nu;
    const double tau_n = znd.neumann.tau;
    // Blend weight w(x) = (1 - tanh((x - xc)/width))/2 toward the ZND side,
    // with xc chosen so tau(0) equals the phase target.
    const double w0 = std::clamp((1.0 - phase_tau(p)) / (1.0 - tau_n), 0.05, 0.95);
    const double xc = width * std::atanh(1.0 - 2.0 * w0);

    auto znd_at = [znd, Um](double x) -> Eigen::Vector3d {
        if (x >= 0.0)
            return {znd.tau.front(), znd.e.front(), znd.z.front()};
        if (x <= znd.x.back())
            return {Um[0], Um[1], 0.0};
        auto it = std::lower_bound(znd.x.begin(), znd.x.end(), x, std::greater<double>());
        const auto i = static_cast<std::size_t>(it - znd.x.begin());
        const double t = (x - znd.x[i - 1]) / (znd.x[i] - znd.x[i - 1]);
        return {znd.tau[i - 1] + t * (znd.tau[i] - znd.tau[i - 1]),
                znd.e[i - 1] + t * (znd.e[i] - znd.e[i - 1]),
                znd.z[i - 1] + t * (znd.z[i] - znd.z[i - 1])};
    };
    auto blended = [=](double x) -> Eigen::Vector3d {
        const double w = 0.5 * (1.0 - std::tanh((x - xc) / width));
        const Eigen::Vector3d a = znd_at(std::min(x, 0.0));
        return w * a + (1.0 - w) * Eigen::Vector3d(Up[0], Up[1], Up[2]);
    };
    return [=](double x) -> ProfileState {
        const Eigen::Vector3d v = blended(x);
        const double dx = 1e-4 * std::max(width, 1e-3);
        const double zp = (blended(x + dx)[2] - blended(x - dx)[2]) / (2.0 * dx);
        return {v[0], v[1], v[2], p.d * zp / (v[0] * v[0])};
    };
}

ProfileGuess profile_guess(const Profile& seed)
{
    return [seed](double x) -> ProfileState {
        if (x > seed.x_max()) {
            const ProfileState Up = unburned_state(seed.params());
            return Up + (seed.state(seed.x_max()) - Up) * std::exp(-(x - seed.x_max()));
        }
        if (x < seed.x_min()) {
            const ProfileState Um = burned_state(seed.params());
            return Um + (seed.state(seed.x_min()) - Um) * std::exp(x - seed.x_min());
        }
        return seed.state(x);
    };
}

Profile solve_profile(const WaveParams& p, const ProfileOptions& opt,
                      const ProfileGuess& guess_in)
{
    return solve_profile(p, opt, guess_in, {});
}

Profile solve_profile(const WaveParams& p, const ProfileOptions& opt,
                      const ProfileGuess& guess_in, const std::vector<double>& start_mesh)
{
    p.validate();
    const EndJacobians ends = end_jacobians(p);
    const ProfileState Up = unburned_state(p);
    const ProfileState Um = burned_state(p);

    ProfileGuess guess = guess_in ? guess_in : znd_template(p);
    double M_minus = opt.M_minus;
    double M_plus = opt.M_plus;
    std::vector<double> mesh;
    if (start_mesh.size() >= 2 &&
        std::find(start_mesh.begin(), start_mesh.end(), 0.0) != start_mesh.end()) {
        M_minus = std::max(M_minus, -start_mesh.front());
        M_plus = std::max(M_plus, start_mesh.back());
        mesh = extend_mesh(start_mesh, M_minus, M_plus);
    }
    else {
        mesh = initial_mesh(M_minus, M_plus, opt.initial_mesh);
    }
    ProfileDiagnostics diag;
    double last_residual = -1.0;

    for (int ext = 0;; ++ext) {
        int failures = 0;
        for (int ref = 0;; ++ref) {
            if (mesh.size() - 1 > opt.max_intervals)
                throw ProfileNotFound("mesh exceeds " + std::to_string(opt.max_intervals) +
                                      " intervals; last scaled residual " +
                                      std::to_string(last_residual));
            Collocation col(p, ends, mesh);
            Eigen::VectorXd X = col.sample(guess);
            const int its = col.newton(X, opt.max_newton);
            if (its < 0) {
                if (++failures > 1)
                    throw ProfileNotFound("Newton iteration did not converge on " +
                                          std::to_string(mesh.size() - 1) +
                                          " intervals; last scaled residual " +
                                          std::to_string(last_residual));
                mesh = bisect_all(mesh);
                continue;
            }
            diag.newton_iterations += its;
            Profile prof = col.make_profile(X, diag);
            double max_abs = 0.0;
            const std::vector<double> thetas(kResidualSamples.begin(), kResidualSamples.end());
            const auto resid = interval_residuals(prof, opt, thetas, &max_abs);
            last_residual = *std::max_element(resid.begin(), resid.end());
            guess = profile_guess(prof);
            if (last_residual <= 1.0 || ref >= opt.max_refinements) {
                if (last_residual > 1.0)
                    throw ProfileNotFound("mesh refinement limit reached; scaled residual " +
                                          std::to_string(last_residual));
                diag.max_scaled_residual = last_residual;
                diag.max_abs_residual = max_abs;
                diag.endpoint_deviation_plus = (prof.state(prof.x_max()) - Up).norm();
                diag.endpoint_deviation_minus = (prof.state(prof.x_min()) - Um).norm();
                const bool ok_plus = diag.endpoint_deviation_plus <= opt.endpoint_tol;
                const bool ok_minus = diag.endpoint_deviation_minus <= opt.endpoint_tol;
                if (ok_plus && ok_minus) {
                    Profile done = col.make_profile(X, diag);
                    const ProfileCheck chk = verify_profile(done, opt);
                    if (!chk.positivity_ok)
                        throw ProfileNotFound("profile violates positivity or z bounds");
                    return done;
                }
                if (!ok_plus)
                    M_plus *= opt.domain_growth;
                if (!ok_minus)
                    M_minus *= opt.domain_growth;
                if (M_plus > opt.max_domain || M_minus > opt.max_domain)
                    throw DomainTooShort("endpoint criterion unreachable within max domain");
                ++diag.domain_extensions;
                mesh = extend_mesh(mesh, M_minus, M_plus);
                break;
            }
            ++diag.mesh_refinements;
            mesh = refine_mesh(mesh, resid);
        }
    }
}

WaveParams interpolate_params(const WaveParams& a, const WaveParams& b, double t)
{
    auto lin = [t](double x, double y) { return x + t * (y - x); };
    WaveParams out;
    out.e_plus = lin(a.e_plus, b.e_plus);
    out.q = lin(a.q, b.q);
    out.E_A = lin(a.E_A, b.E_A);
    out.Gamma = lin(a.Gamma, b.Gamma);
    out.nu = lin(a.nu, b.nu);
    out.d = lin(a.d, b.d);
    out.kappa_v = lin(a.kappa_v, b.kappa_v);
    out.k = std::exp(lin(std::log(a.k), std::log(b.k)));
    out.T_ig = lin(a.T_ig, b.T_ig);
    out.c_v = lin(a.c_v, b.c_v);
    return out;
}

std::vector<Profile> continue_profiles(const std::vector<WaveParams>& path,
                                       const ProfileOptions& opt,
                                       const ProfileGuess& first_guess,
                                       const ParamInterpolator& interp_in,
                                       int max_halvings)
{
    std::vector<Profile> out;
    if (path.empty())
        return out;
    const ParamInterpolator interp = interp_in ? interp_in : ParamInterpolator(interpolate_params);

    out.push_back(solve_profile(path.front(), opt, first_guess));
    // Secant predictor over the path coordinate s = (segment index) + fraction.
    std::optional<Profile> previous;
    double s_prev = 0.0, s_cur = 0.0;
    for (std::size_t j = 1; j < path.size(); ++j) {
        Profile current = out.back();
        WaveParams current_params = path[j - 1];
        double t = 0.0;
        double step = 1.0;
        int halvings = 0;
        while (t < 1.0) {
            const double t_next = std::min(1.0, t + step);
            const WaveParams target =
                t_next >= 1.0 ? path[j] : interp(path[j - 1], path[j], t_next);
            const double s_next = static_cast<double>(j - 1) + t_next;
            ProfileGuess guess = profile_guess(current);
            if (previous) {
                const double r = std::min(2.0, (s_next - s_cur) / (s_cur - s_prev));
                ProfileGuess back = profile_guess(*previous);
                guess = [guess, back, r](double x) -> ProfileState {
                    const ProfileState a = guess(x);
                    return a + r * (a - back(x));
                };
            }
            try {
                Profile next = solve_profile(target, opt, guess, current.mesh());
                previous = current;
                current = std::move(next);
                current_params = target;
                s_prev = s_cur;
                s_cur = s_next;
                t = t_next;
                step = std::min(1.0, 1.5 * step);
            }
            catch (const Error& err) {
                if (err.family() == ErrorFamily::domain)
                    throw;
                if (++halvings > max_halvings)
                    throw ContinuationStalled(
                        "stalled between path entries " + std::to_string(j - 1) + " and " +
                        std::to_string(j) + " at fraction " + std::to_string(t) +
                        " (E_A = " + std::to_string(current_params.E_A) +
                        ", nu = " + std::to_string(current_params.nu) + "): " + err.what());
                step *= 0.5;
            }
        }
        out.push_back(current);
    }
    return out;
}

namespace {

double weighted_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return a.dot(b) / static_cast<double>(a.size() / 4);
}

Eigen::VectorXd sample_on(const Collocation& col, const Profile& prof)
{
    return col.sample([&prof](double x) { return prof.state(x); });
}

/// Bordered Newton for (X, t) on a fixed mesh subject to the pseudo-arclength
/// constraint <dX, X - X0> + dt (t - t0) = ds. Returns iterations or -1.
int arclength_correct(const ParamFamily& family, const std::vector<double>& mesh,
                      Eigen::VectorXd& X, double& t, const Eigen::VectorXd& X0, double t0,
                      const Eigen::VectorXd& dX, double dt, double ds, int max_iter)
{
    Eigen::VectorXd R, Rh;
    Eigen::SparseMatrix<double> J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    auto residual = [&](const Eigen::VectorXd& Xv, double tv, Eigen::VectorXd& out,
                        Eigen::SparseMatrix<double>* Jv) {
        const WaveParams p = family(tv);
        const EndJacobians ends = end_jacobians(p);
        Collocation col(p, ends, mesh);
        col.evaluate(Xv, out, Jv);
    };
    auto constraint = [&](const Eigen::VectorXd& Xv, double tv) {
        return weighted_dot(dX, Xv - X0) + dt * (tv - t0) - ds;
    };
    try {
        for (int it = 1; it <= max_iter; ++it) {
            residual(X, t, R, &J);
            const double h = 1e-7 * std::max(1.0, std::abs(t));
            residual(X, t + h, Rh, nullptr);
            const Eigen::VectorXd Rt = (Rh - R) / h;
            lu.compute(J);
            if (lu.info() != Eigen::Success)
                return -1;
            const Eigen::VectorXd y1 = lu.solve(-R);
            const Eigen::VectorXd y2 = lu.solve(Rt);
            const double g = constraint(X, t);
            const double denom = dt - weighted_dot(dX, y2);
            if (!(std::abs(denom) > 1e-14) || !y1.allFinite() || !y2.allFinite())
                return -1;
            const double delta_t = (-g - weighted_dot(dX, y1)) / denom;
            const Eigen::VectorXd delta_X = y1 - delta_t * y2;

            const double merit = std::hypot(R.norm(), g);
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 20 && !accepted; ++ls) {
                if (ls > 0)
                    alpha *= 0.5;
                const Eigen::VectorXd Xt = X + alpha * delta_X;
                const double tt = t + alpha * delta_t;
                bool positive = true;
                for (Eigen::Index g4 = 0; g4 < Xt.size(); g4 += 4)
                    positive = positive && Xt[g4] > 0.0;
                if (!positive)
                    continue;
                try {
                    residual(Xt, tt, Rh, nullptr);
                }
                catch (const Error&) {
                    continue;
                }
                if (Rh.allFinite() &&
                    std::hypot(Rh.norm(), constraint(Xt, tt)) <= (1.0 - 1e-4 * alpha) * merit) {
                    X = Xt;
                    t = tt;
                    accepted = true;
                }
            }
            if (!accepted)
                return -1;
            if (alpha == 1.0 &&
                delta_X.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + X.lpNorm<Eigen::Infinity>()) &&
                std::abs(delta_t) <= 1e-10 * (1.0 + std::abs(t)))
                return it;
            if (R.lpNorm<Eigen::Infinity>() <= 1e-12 && std::abs(g) <= 1e-12)
                return it;
        }
    }
    catch (const Error&) {
        return -1;
    }
    return -1;
}

struct BranchPoint {
    double t;
    Profile prof;
};

ProfileGuess blend(const Profile& a, const Profile& b, double theta)
{
    return [a, b, theta](double x) -> ProfileState {
        return (1.0 - theta) * a.state(x) + theta * b.state(x);
    };
}

} // namespace

std::vector<Profile> trace_family(const ParamFamily& family, double t_start,
                                  const std::vector<double>& targets,
                                  const ProfileOptions& opt, const ProfileGuess& first_guess,
                                  const ArclengthOptions& aopt)
{
    if (!std::is_sorted(targets.begin(), targets.end()) ||
        (!targets.empty() && targets.front() < t_start))
        throw DomainError("trace_family targets must be sorted and not below t_start");
    std::vector<Profile> out;
    out.reserve(targets.size());
    std::size_t next = 0;

    BranchPoint cur{t_start, solve_profile(family(t_start), opt, first_guess)};
    while (next < targets.size() && targets[next] <= t_start)
        out.push_back(cur.prof), ++next;
    if (next == targets.size())
        return out;

    // A short natural step gives the first secant.
    double h = std::min(aopt.first_step, targets[next] - t_start);
    std::optional<BranchPoint> prev;
    for (int tries = 0; !prev; ++tries) {
        try {
            Profile p1 = solve_profile(family(t_start + h), opt, profile_guess(cur.prof),
                                       cur.prof.mesh());
            prev = cur;
            cur = BranchPoint{t_start + h, std::move(p1)};
        }
        catch (const Error& err) {
            if (err.family() == ErrorFamily::domain || tries > 8)
                throw;
            h *= 0.5;
        }
    }
    while (next < targets.size() && targets[next] <= cur.t) {
        const double theta = (targets[next] - prev->t) / (cur.t - prev->t);
        out.push_back(solve_profile(family(targets[next]), opt,
                                    blend(prev->prof, cur.prof, theta), cur.prof.mesh()));
        ++next;
    }

    double ds = aopt.ds_initial;
    for (int step = 0; next < targets.size(); ++step) {
        if (step >= aopt.max_steps)
            throw ContinuationStalled("arclength continuation used " +
                                      std::to_string(aopt.max_steps) + " steps and reached t = " +
                                      std::to_string(cur.t));
        const WaveParams pc = family(cur.t);
        const EndJacobians ends = end_jacobians(pc);
        const Collocation col(pc, ends, cur.prof.mesh());
        const Eigen::VectorXd X0 = sample_on(col, cur.prof);
        const Eigen::VectorXd Xp = sample_on(col, prev->prof);
        Eigen::VectorXd dX = X0 - Xp;
        double dt = cur.t - prev->t;
        const double norm = std::sqrt(weighted_dot(dX, dX) + dt * dt);
        dX /= norm;
        dt /= norm;

        Eigen::VectorXd X = X0 + ds * dX;
        double t = cur.t + ds * dt;
        const int its = arclength_correct(family, cur.prof.mesh(), X, t, X0, cur.t, dX, dt,
                                          ds, aopt.max_newton);
        std::optional<Profile> landed;
        if (its >= 0) {
            // Re-solve at fixed t so the mesh and domain adapt to the new point.
            const Profile raw = col.make_profile(X, cur.prof.diagnostics());
            try {
                landed = solve_profile(family(t), opt, profile_guess(raw), cur.prof.mesh());
            }
            catch (const Error& err) {
                if (err.family() == ErrorFamily::domain)
                    throw;
            }
        }
        // Any target crossed by this step is solved from the blended endpoints.
        std::vector<Profile> crossed;
        bool crossing_ok = true;
        if (landed) {
            for (std::size_t k = next; k < targets.size() && targets[k] <= t; ++k) {
                if (targets[k] <= cur.t)
                    continue;
                const double theta = (targets[k] - cur.t) / (t - cur.t);
                try {
                    crossed.push_back(solve_profile(family(targets[k]), opt,
                                                    blend(cur.prof, *landed, theta),
                                                    landed->mesh()));
                }
                catch (const Error& err) {
                    if (err.family() == ErrorFamily::domain)
                        throw;
                    crossing_ok = false;
                    break;
                }
            }
        }
        if (!landed || !crossing_ok) {
            ds *= 0.5;
            if (ds < aopt.ds_min)
                throw ContinuationStalled("arclength step fell below " +
                                          std::to_string(aopt.ds_min) + " at t = " +
                                          std::to_string(cur.t));
            continue;
        }
        for (auto& c : crossed)
            out.push_back(std::move(c)), ++next;
        prev = std::move(cur);
        cur = BranchPoint{t, std::move(*landed)};
        if (its <= 4)
            ds = std::min(aopt.ds_max, 1.5 * ds);
    }
    return out;
}

ProfileCheck verify_profile(const Profile& prof, const ProfileOptions& opt,
                            int samples_per_interval)
{
    ProfileCheck chk;
    const WaveParams& p = prof.params();
    chk.min_tau = chk.min_e = chk.min_z = 1e300;
    chk.max_z = -1e300;
    for (const auto& U : prof.points()) {
        chk.min_tau = std::min(chk.min_tau, U[0]);
        chk.min_e = std::min(chk.min_e, U[1]);
        chk.min_z = std::min(chk.min_z, U[2]);
        chk.max_z = std::max(chk.max_z, U[2]);
    }
    chk.positivity_ok = chk.min_tau > 0.0 && chk.min_e > 0.0 && chk.min_z >= -1e-6 &&
                        chk.max_z <= 1.0 + 1e-6;

    std::vector<double> thetas;
    for (int s = 1; s <= samples_per_interval; ++s)
        thetas.push_back(static_cast<double>(s) / (samples_per_interval + 1));
    const auto resid = interval_residuals(prof, opt, thetas, nullptr);
    chk.max_scaled_residual = *std::max_element(resid.begin(), resid.end());
    chk.residual_ok = chk.max_scaled_residual <= 1.0;

    const double dp = (prof.state(prof.x_max()) - unburned_state(p)).norm();
    const double dm = (prof.state(prof.x_min()) - burned_state(p)).norm();
    chk.endpoints_ok = dp <= opt.endpoint_tol && dm <= opt.endpoint_tol;
    return chk;
}

ShockReactionRatio shock_reaction_ratio(const Profile& prof)
{
    ShockReactionRatio out;
    // Dense sampling of |tau'| on the mesh refined 8x.
    const auto& mesh = prof.mesh();
    std::vector<double> xs;
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i)
        for (int j = 0; j < 8; ++j)
            xs.push_back(mesh[i] + (mesh[i + 1] - mesh[i]) * j / 8.0);
    xs.push_back(mesh.back());
    std::vector<double> slope(xs.size());
    std::size_t imax = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        slope[i] = std::abs(prof.derivative(xs[i])[0]);
        if (slope[i] > slope[imax])
            imax = i;
    }
    const double level = kShockEdgeFraction * slope[imax];
    auto edge = [&](std::size_t i, int dir) {
        while (true) {
            if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == xs.size()))
                return xs[i];
            const std::size_t nxt = dir < 0 ? i - 1 : i + 1;
            if (slope[nxt] < level) {
                const double t = (slope[i] - level) / (slope[i] - slope[nxt]);
                return xs[i] + t * (xs[nxt] - xs[i]);
            }
            i = nxt;
        }
    };
    out.shock_center = xs[imax];
    out.shock_left = edge(imax, -1);
    out.shock_right = edge(imax, +1);
    out.shock_width = out.shock_right - out.shock_left;
    out.z_entry = prof.state(out.shock_left)[2];
    out.z_exit = prof.state(out.shock_right)[2];

    // Walk from the shock toward the burned side until z drops to 1/2.
    double hi = out.shock_center;
    double lo = prof.x_min();
    for (auto it = std::make_reverse_iterator(xs.begin() + static_cast<std::ptrdiff_t>(imax));
         it != xs.rend(); ++it) {
        if (prof.state(*it)[2] <= 0.5) {
            lo = *it;
            break;
        }
        hi = *it;
    }
    for (int b = 0; b < 60; ++b) {
        const double mid = 0.5 * (lo + hi);
        (prof.state(mid)[2] <= 0.5 ? lo : hi) = mid;
    }
    out.reaction_length = out.shock_center - 0.5 * (lo + hi);
    out.ratio = out.shock_width / out.reaction_length;
    return out;
}

} // namespace rns
