#include "rns/stab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "rns/znd.hpp"

namespace rns {

ParamFamily energy_family(const WaveParams& base, double x_target)
{
    return [base, x_target](double E_A) {
        WaveParams p = base;
        p.E_A = E_A;
        p.k = calibrate_k(p, x_target).k;
        return p;
    };
}

// --- profiles along E_A -------------------------------------------------------

EnergyBranch::EnergyBranch(const WaveParams& base, const ProfileOptions& popt,
                           const ArclengthOptions& aopt, double seed_energy)
    : base_{base}, family_{energy_family(base)}, popt_{popt}, aopt_{aopt}, seed_E_{seed_energy}
{
}

std::shared_ptr<const Profile> EnergyBranch::at(double E_A)
{
    if (const auto it = memo_.find(E_A); it != memo_.end())
        return it->second;
    if (!seed_)
        seed_ = std::make_shared<const Profile>(solve_profile(family_(seed_E_), popt_, {}));

    std::shared_ptr<const Profile> prof;
    if (E_A == seed_E_) {
        prof = seed_;
    }
    else if (E_A > seed_E_) {
        auto v = trace_family(family_, seed_E_, {E_A}, popt_, profile_guess(*seed_), aopt_);
        prof = std::make_shared<const Profile>(std::move(v.back()));
    }
    else {
        // Trace downwards by running the family in -E_A.
        const ParamFamily fam = family_;
        const ParamFamily flipped = [fam](double t) { return fam(-t); };
        auto v = trace_family(flipped, -seed_E_, {-E_A}, popt_, profile_guess(*seed_), aopt_);
        prof = std::make_shared<const Profile>(std::move(v.back()));
    }
    memo_.emplace(E_A, prof);
    return prof;
}

// --- unstable counts ------------------------------------------------------------

namespace {

EvansSample semi_annulus_sample(const EvansFunction& D, const StabilityOptions& opt)
{
    ContourOptions co = opt.roots.contour;
    for (int esc = 0;; ++esc) {
        try {
            return evans_on_contour(Contour::semi_annulus(opt.r_out, opt.r_in), D, co);
        }
        catch (const UnresolvedContour&) {
            if (esc >= opt.max_escalations)
                throw;
            co.density *= 2.0;
        }
    }
}

} // namespace

int unstable_count(std::shared_ptr<const Profile> prof, const StabilityOptions& opt)
{
    auto sys = std::make_shared<const SpectralSystem>(std::move(prof));
    const EvansFunction D(sys, opt.evans);
    return zero_count(semi_annulus_sample(D, opt));
}

RootSet unstable_roots(std::shared_ptr<const Profile> prof, const StabilityOptions& opt)
{
    auto sys = std::make_shared<const SpectralSystem>(std::move(prof));
    const EvansFunction D(sys, opt.evans);
    return locate_roots(Contour::semi_annulus(opt.r_out, opt.r_in), D, opt.roots);
}

// --- neutral boundary -------------------------------------------------------------

BoundaryPoint neutral_boundary(EnergyBranch& branch, BoundarySide side, double E_lo,
                               double E_hi, const StabilityOptions& opt, double tol)
{
    if (!(E_lo < E_hi))
        throw BadBracket("bracket needs E_lo < E_hi");
    BoundaryPoint out;
    out.nu = branch.base().nu;
    out.side = side;

    auto unstable = [&](double E) {
        const int n = unstable_count(branch.at(E), opt);
        out.probes.push_back({E, n});
        return n > 0;
    };

    const bool lo_unstable = unstable(E_lo);
    const bool hi_unstable = unstable(E_hi);
    if (lo_unstable == hi_unstable)
        throw BadBracket("E_A = " + std::to_string(E_lo) + " and " + std::to_string(E_hi) +
                         " are both " + (lo_unstable ? "unstable" : "stable"));
    const bool want_lo_unstable = side == BoundarySide::upper;
    if (lo_unstable != want_lo_unstable)
        throw BadBracket(std::string("bracket is stable on the ") +
                         (side == BoundarySide::lower ? "right" : "left") +
                         ", which does not fit the requested boundary");

    double lo = E_lo, hi = E_hi;
    while (0.5 * (hi - lo) > tol) {
        const double mid = 0.5 * (lo + hi);
        if (unstable(mid) == lo_unstable)
            lo = mid;
        else
            hi = mid;
    }
    out.E_A = 0.5 * (lo + hi);
    out.abs_err = 0.5 * (hi - lo);
    return out;
}

// --- lineage matching ---------------------------------------------------------------

namespace {

double min_separation(const std::vector<cdouble>& z)
{
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            s = std::min(s, std::abs(z[i] - z[j]));
    return s;
}

} // namespace

Assignment match_roots(const std::vector<cdouble>& from, const std::vector<cdouble>& to,
                       double tie_tolerance)
{
    Assignment out;
    out.match.assign(from.size(), -1);
    if (from.empty() || to.empty())
        return out;

    // Enumerate injective maps from the smaller set into the larger one.
    const bool swap = from.size() > to.size();
    const auto& small = swap ? to : from;
    const auto& large = swap ? from : to;
    std::vector<int> perm(large.size());
    std::iota(perm.begin(), perm.end(), 0);

    double best = std::numeric_limits<double>::infinity();
    double second = best;
    std::vector<int> best_map;
    std::set<std::vector<int>> seen;
    do {
        std::vector<int> m(perm.begin(), perm.begin() + static_cast<long>(small.size()));
        if (!seen.insert(m).second)
            continue;
        double c = 0.0;
        for (std::size_t i = 0; i < small.size(); ++i)
            c += std::norm(small[i] - large[static_cast<std::size_t>(m[i])]);
        if (c < best) {
            second = best;
            best = c;
            best_map = m;
        }
        else if (c < second) {
            second = c;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    out.cost = best;
    out.ambiguous = second - best <= tie_tolerance * (1.0 + best);
    const double limit = 0.5 * std::min(min_separation(from), min_separation(to));
    for (std::size_t i = 0; i < small.size(); ++i) {
        const auto j = static_cast<std::size_t>(best_map[i]);
        if (std::abs(small[i] - large[j]) >= limit)
            out.valid = false;
        if (swap)
            out.match[j] = static_cast<int>(i);
        else
            out.match[i] = static_cast<int>(j);
    }
    return out;
}

// --- root tracking ---------------------------------------------------------------------

namespace {

int root_count(const RootSet& r)
{
    int n = 0;
    for (const Root& x : r.roots)
        n += x.multiplicity;
    return n;
}

std::vector<cdouble> positions(const RootSet& r)
{
    std::vector<cdouble> z;
    for (const Root& x : r.roots)
        z.push_back(x.lambda);
    return z;
}

} // namespace

RootTrajectory track_roots(EnergyBranch& branch, const std::vector<double>& grid,
                           const StabilityOptions& opt, const TrackOptions& topt)
{
    RootTrajectory out;
    if (grid.empty())
        return out;
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw DomainError("tracking grid must be increasing");

    auto solve = [&](double E) {
        TrajectoryPoint p;
        p.E_A = E;
        p.roots = unstable_roots(branch.at(E), opt);
        return p;
    };

    TrajectoryPoint first = solve(grid.front());
    for (std::size_t i = 0; i < first.roots.roots.size(); ++i)
        first.lineage.push_back(out.lineages++);
    for (int id : first.lineage)
        out.events.push_back({RootEvent::Kind::entry, grid.front(), grid.front(), id});
    out.points.push_back(std::move(first));

    const double eps = 1e-12;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        const double target = grid[g];
        double next = target;
        while (out.points.back().E_A < target - eps) {
            const TrajectoryPoint& prev = out.points.back();
            TrajectoryPoint cand = solve(next);
            const Assignment a =
                match_roots(positions(prev.roots), positions(cand.roots), topt.tie_tolerance);
            const bool count_changed = root_count(cand.roots) != root_count(prev.roots);
            const bool unclear = !a.valid || a.ambiguous;
            const double step = next - prev.E_A;
            if ((count_changed || unclear) && step > topt.min_step + eps) {
                next = prev.E_A + 0.5 * step;
                continue;
            }

            cand.lineage.assign(cand.roots.roots.size(), -1);
            for (std::size_t i = 0; i < a.match.size(); ++i) {
                if (a.match[i] < 0) {
                    out.events.push_back(
                        {RootEvent::Kind::exit, prev.E_A, cand.E_A, prev.lineage[i]});
                    continue;
                }
                cand.lineage[static_cast<std::size_t>(a.match[i])] = prev.lineage[i];
                if (unclear)
                    out.broken.push_back(prev.lineage[i]);
            }
            for (int& id : cand.lineage) {
                if (id >= 0)
                    continue;
                id = out.lineages++;
                out.events.push_back({RootEvent::Kind::entry, prev.E_A, cand.E_A, id});
            }
            out.points.push_back(std::move(cand));
            next = target;
        }
    }
    std::sort(out.broken.begin(), out.broken.end());
    out.broken.erase(std::unique(out.broken.begin(), out.broken.end()), out.broken.end());
    return out;
}

// --- fits -----------------------------------------------------------------------------------

FitResult fit_boundary(const std::vector<double>& nu, const std::vector<double>& E_A,
                       FitModel model)
{
    if (nu.size() != E_A.size())
        throw FitError("nu and E_A have different lengths");
    const Eigen::Index cols = model == FitModel::linear ? 2 : 3;
    if (static_cast<Eigen::Index>(nu.size()) < 3)
        throw FitError("need at least 3 points");
    const Eigen::Index n = static_cast<Eigen::Index>(nu.size());
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = nu[static_cast<std::size_t>(i)];
        if (model == FitModel::linear_log && !(v > 0.0))
            throw FitError("ln(nu) needs nu > 0");
        A(i, 0) = 1.0;
        A(i, 1) = v;
        if (cols == 3)
            A(i, 2) = std::log(v);
        b[i] = E_A[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < cols)
        throw FitError("design matrix has rank " + std::to_string(qr.rank()) + " < " +
                       std::to_string(cols));
    FitResult out;
    out.model = model;
    out.coefficients = qr.solve(b);
    out.residuals = b - A * out.coefficients;
    out.max_residual = out.residuals.cwiseAbs().maxCoeff();
    return out;
}

double evaluate_fit(const FitResult& fit, double nu)
{
    double v = fit.coefficients[0] + fit.coefficients[1] * nu;
    if (fit.model == FitModel::linear_log)
        v += fit.coefficients[2] * std::log(nu);
    return v;
}

std::vector<DelayRow> viscous_delay(const std::vector<double>& nu,
                                    const std::vector<double>& E_minus, double E_star)
{
    if (!(E_star > 0.0))
        throw DomainError("E_star must be positive");
    if (nu.size() != E_minus.size())
        throw DomainError("nu and E_minus have different lengths");
    std::vector<DelayRow> out;
    for (std::size_t i = 0; i < nu.size(); ++i)
        out.push_back({nu[i], E_minus[i], (E_minus[i] - E_star) / E_star});
    return out;
}

std::vector<DelayRow> viscous_delay(const FitResult& lower_fit, const std::vector<double>& nu,
                                    double E_star)
{
    std::vector<double> E;
    for (double v : nu)
        E.push_back(evaluate_fit(lower_fit, v));
    return viscous_delay(nu, E, E_star);
}

// --- reference data --------------------------------------------------------------------------

const std::vector<BoundarySample>& reference_upper_boundary()
{
    static const std::vector<BoundarySample> data = {
        {0.01, 9.25, 0.05},  {0.025, 8.6, 0.05},  {0.05, 7.75, 0.05},   {0.1, 6.85, 0.05},
        {0.12, 6.65, 0.05},  {0.14, 6.35, 0.05},  {0.16, 6.15, 0.05},   {0.2, 5.75, 0.05},
        {0.24, 5.35, 0.05},  {0.27, 5.1, 0.05},   {0.3, 4.8, 0.05},     {0.31, 4.65, 0.05},
        {0.32, 4.55, 0.05},  {0.33, 4.375, 0.025}, {0.34, 4.225, 0.025}, {0.342, 4.125, 0.025},
    };
    return data;
}

const std::vector<BoundarySample>& reference_lower_boundary()
{
    static const std::vector<BoundarySample> data = {
        {0.005, 2.45, 0.05}, {0.01, 2.45, 0.05},  {0.03, 2.55, 0.05},   {0.05, 2.65, 0.05},
        {0.07, 2.65, 0.05},  {0.1, 2.75, 0.05},   {0.15, 2.85, 0.05},   {0.2, 3.05, 0.05},
        {0.27, 3.25, 0.05},  {0.3, 3.45, 0.05},   {0.31, 3.5, 0.05},    {0.32, 3.6, 0.05},
        {0.33, 3.675, 0.025}, {0.34, 3.85, 0.05}, {0.342, 3.925, 0.025},
    };
    return data;
}

} // namespace rns
