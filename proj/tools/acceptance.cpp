// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rns/stab.hpp"
#include "rns/znd.hpp"

using namespace rns;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... v)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

bool within(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

WaveParams family_params(double nu, double E_A)
{
    WaveParams p;
    p.nu = p.d = p.kappa_v = nu;
    p.E_A = E_A;
    p.k = calibrate_k(p).k;
    return p;
}

// --- 1, 2, 3, 7 -------------------------------------------------------------

Outcome rankine_hugoniot()
{
    const EndStates s = rh_end_state(6.23e-2, 6.23e-1, 0.2);
    const bool ok = within(s.tau_minus, 0.257, 5e-3) && within(s.u_minus, 0.743, 5e-3) &&
                    within(s.e_minus, 0.971, 5e-3);
    return {ok, fmt("tau- = %.4f, u- = %.4f, e- = %.4f (ref 0.257, 0.743, 0.971 +- 5e-3)",
                    s.tau_minus, s.u_minus, s.e_minus)};
}

Outcome overdrive()
{
    const double f = overdrive_from_q(0.1, 0.2).f;
    const double e = e_cj_solve(50.0, 0.2);
    return {within(f, 11.3, 0.1) && within(e, 0.023, 1e-3),
            fmt("f = %.3f (ref 11.3 +- 0.1), e+CJ = %.5f (ref 0.023 +- 0.001)", f, e)};
}

Outcome bench()
{
    WaveParams p;
    p.E_A = 3.1;
    p.k = calibrate_k(p).k;
    const Profile prof = solve_profile(p, {}, {});
    const ShockReactionRatio r = shock_reaction_ratio(prof);
    const double z_end = prof.state(prof.x_max())[2];
    const bool bench = r.z_entry < 0.95 && r.z_exit > r.z_entry && std::abs(z_end - 1.0) < 1e-4;
    const bool ratio = r.ratio >= 0.05 && r.ratio <= 0.2;
    return {bench && ratio && verify_profile(prof, {}).ok(),
            fmt("k = %.4g, z entering layer = %.3f, z leaving = %.4f, z(+M) = %.6f, "
                "width ratio = %.4f (need < 0.95, recovery to 1, ratio in [0.05, 0.2])",
                p.k, r.z_entry, r.z_exit, z_end, r.ratio)};
}

Outcome fits()
{
    std::vector<double> nu, E;
    for (const auto& s : reference_upper_boundary())
        if (s.nu < 0.27) {
            nu.push_back(s.nu);
            E.push_back(s.E_A);
        }
    const FitResult u = fit_boundary(nu, E, FitModel::linear_log);
    nu.clear();
    E.clear();
    for (const auto& s : reference_lower_boundary())
        if (s.nu <= 0.27) {
            nu.push_back(s.nu);
            E.push_back(s.E_A);
        }
    const FitResult l = fit_boundary(nu, E, FitModel::linear);
    const double ur[3] = {5.67, -6.16, -0.804};
    const double lr[2] = {2.45, 2.95};
    bool ok = true;
    for (int i = 0; i < 3; ++i)
        ok = ok && std::abs(u.coefficients[i] - ur[i]) <= 0.05 * std::abs(ur[i]);
    for (int i = 0; i < 2; ++i)
        ok = ok && std::abs(l.coefficients[i] - lr[i]) <= 0.05 * std::abs(lr[i]);
    return {ok, fmt("upper (%.4f, %.4f, %.4f) vs (5.67, -6.16, -0.804); lower (%.4f, %.4f) "
                    "vs (2.45, 2.95); 5%% per coefficient",
                    u.coefficients[0], u.coefficients[1], u.coefficients[2], l.coefficients[0],
                    l.coefficients[1])};
}

// --- 4 ----------------------------------------------------------------------

using Vec4 = Eigen::Vector4d;

Vec4 cons_a(const Vec4& U) { return {U[0], U[1], U[2] + 0.5 * U[1] * U[1], U[3]}; }
Vec4 cons_f(const Vec4& U, const WaveParams& p)
{
    const double pr = p.Gamma * U[2] / U[0];
    return {-U[1], pr, U[1] * pr, 0.0};
}
Vec4 diffusive_flux(const Vec4& U, const Vec4& Ux, const WaveParams& p)
{
    return {0.0, p.nu * Ux[1] / U[0], p.nu * U[1] * Ux[1] / U[0] + p.kappa_v * Ux[2] / U[0],
            p.d * Ux[3] / (U[0] * U[0])};
}
Vec4 source(const Vec4& U, const WaveParams& p)
{
    const double r = p.k * ignition_phi(U[2] / p.c_v, p.E_A, p.T_ig) * U[3];
    return {0.0, 0.0, p.q * r, -r};
}
Eigen::Matrix4d fd_jacobian(const std::function<Vec4(const Vec4&)>& f, const Vec4& U)
{
    Eigen::Matrix4d J;
    for (int j = 0; j < 4; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(U[j]));
        Vec4 a = U, b = U;
        a[j] += h;
        b[j] -= h;
        J.col(j) = (f(a) - f(b)) / (2.0 * h);
    }
    return J;
}

Outcome evans_properties(int jobs)
{
    const WaveParams p = family_params(0.1, 5.0);
    auto prof = std::make_shared<const Profile>(solve_profile(p, {}, {}));
    auto sys = std::make_shared<const SpectralSystem>(prof);
    const EvansFunction D(sys);
    std::ostringstream msg;
    bool ok = true;

    // conjugate symmetry
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ur(1e-3, 1.0), ua(-1.5, 1.5);
    double sym = 0.0;
    for (int i = 0; i < 20; ++i) {
        const cdouble l = std::polar(10.0 * ur(rng), ua(rng));
        const cdouble a = D(l).D, b = D(std::conj(l)).D;
        sym = std::max(sym, std::abs(a - std::conj(b)) / std::abs(a));
    }
    ok = ok && sym <= 1e-6;
    msg << fmt("conj sym %.1e; ", sym);

    // winding numbers
    ContourOptions co;
    co.jobs = jobs;
    const std::vector<std::pair<Contour, int>> contours = {
        {Contour::circle({0.0419, 0.0385}, 0.02), 1},
        {Contour::circle({0.0387, 0.3195}, 0.03), 1},
        {Contour::rectangle({0.01, 0.01}, {0.1, 0.5}), 2},
        {Contour::rectangle({0.2, 0.2}, {1.0, 1.0}), 0},
        {Contour::semi_annulus(10.0, 1e-4), 4},
    };
    double worst_res = 0.0;
    std::string windings;
    for (const auto& [c, expect] : contours) {
        const double w = winding_number(evans_on_contour(c, D, co));
        worst_res = std::max(worst_res, std::abs(w - std::round(w)));
        ok = ok && std::lround(w) == expect;
        windings += std::to_string(std::lround(w)) + " ";
    }
    ok = ok && worst_res < 0.05;
    msg << "windings " << windings << fmt("(residual %.1e); ", worst_res);

    // moment additivity over quadrants
    const cdouble ll(0.01, 0.01), hi(0.1, 0.5), mid = 0.5 * (ll + hi);
    const Contour quads[4] = {
        Contour::rectangle(ll, mid),
        Contour::rectangle({mid.real(), ll.imag()}, {hi.real(), mid.imag()}),
        Contour::rectangle(mid, hi),
        Contour::rectangle({ll.real(), mid.imag()}, {mid.real(), hi.imag()}),
    };
    const EvansSample whole = evans_on_contour(Contour::rectangle(ll, hi), D, co);
    double add = 0.0;
    for (int q = 0; q <= 2; ++q) {
        cdouble sum = 0.0;
        for (const Contour& c : quads)
            sum += moment(evans_on_contour(c, D, co), q, mid);
        const cdouble m = moment(whole, q, mid);
        // M0 adds up to rounding; higher moments to the quadrature accuracy
        const double tol = q == 0 ? 1e-5 : 1e-4;
        add = std::max(add, std::abs(sum - m) / (1.0 + std::abs(m)) / tol);
    }
    ok = ok && add <= 1.0;
    msg << fmt("moment additivity %.2f of tolerance; ", add);

    // weight and gauge invariance of the root set
    RootOptions ro;
    ro.contour.jobs = jobs;
    const Contour box = Contour::rectangle(ll, hi);
    const RootSet base = locate_roots(box, D, ro);
    EvansOptions w;
    w.mu_weight = 0.5;
    EvansOptions g;
    g.seed_gauge = [](cdouble l) { return std::exp(-l) * (3.0 + l * l); };
    double shift = 0.0;
    for (const EvansOptions& o : {w, g}) {
        const RootSet rs = locate_roots(box, EvansFunction(sys, o), ro);
        if (rs.roots.size() != base.roots.size()) {
            ok = false;
            shift = INFINITY;
            break;
        }
        for (std::size_t i = 0; i < rs.roots.size(); ++i)
            shift = std::max(shift, std::abs(rs.roots[i].lambda - base.roots[i].lambda));
    }
    ok = ok && base.consistent && shift <= ro.target_accuracy;
    msg << fmt("root set shift %.1e; ", shift);

    // affinity of G
    double aff = 0.0;
    for (double x : {sys->x_min(), -3.0, 0.0, 0.4, sys->x_max()}) {
        const AffineG A = sys->affine(x);
        const cdouble l1(1.3, -2.0), l2(-0.4, 5.0);
        const Matrix7c lhs = A(0.3 * l1 + 0.7 * l2);
        const Matrix7c rhs = 0.3 * A(l1) + 0.7 * A(l2);
        aff = std::max(aff, (lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    ok = ok && aff <= 1e-12;
    msg << fmt("affinity %.1e; ", aff);

    // linearization against finite differences
    double lin = 0.0;
    for (double x : {-12.0, -4.0, -0.5, 0.0, 0.3, 2.0}) {
        const ConsState U = sys->base_state(x), Ux = sys->base_derivative(x);
        const LinearizedBlocks L = linearized_blocks(U, Ux, p);
        const Eigen::Matrix4d a0 = fd_jacobian(cons_a, U);
        const Eigen::Matrix4d a1 = fd_jacobian([&](const Vec4& V) { return cons_f(V, p); }, U);
        const Eigen::Matrix4d dB =
            fd_jacobian([&](const Vec4& V) { return diffusive_flux(V, Ux, p); }, U);
        const Eigen::Matrix4d E = fd_jacobian([&](const Vec4& V) { return source(V, p); }, U);
        lin = std::max({lin, (L.a0 - a0).norm(), (L.a1 - a1).norm(),
                        (L.A - (a1 - a0 - dB)).norm(), (L.E - E).norm() / (1.0 + E.norm())});
    }
    ok = ok && lin <= 1e-5;
    msg << fmt("linearization %.1e", lin);
    return {ok, msg.str()};
}

// --- 5 ----------------------------------------------------------------------

Outcome hyperstabilization(int jobs)
{
    EnergyBranch br(family_params(0.1, 5.0));
    StabilityOptions so;
    so.roots.contour.jobs = jobs;
    const int n2 = unstable_count(br.at(2.0), so);
    const RootSet r5 = unstable_roots(br.at(5.0), so);
    const int n75 = unstable_count(br.at(7.5), so);

    // two conjugate pairs: every located root has its mirror image
    int pairs = 0;
    for (const Root& r : r5.roots)
        if (r.lambda.imag() > 0.0)
            for (const Root& s : r5.roots)
                if (std::abs(s.lambda - std::conj(r.lambda)) < 1e-6)
                    ++pairs;
    std::string roots;
    for (const Root& r : r5.roots)
        roots += fmt(" %.4f%+.4fi", r.lambda.real(), r.lambda.imag());
    const bool ok = n2 == 0 && r5.region_count == 4 && r5.consistent && pairs == 2 && n75 == 0;
    return {ok, fmt("counts at E_A = 2, 5, 7.5: %d, %d, %d (need 0, 4, 0); roots at 5:%s", n2,
                    r5.region_count, n75, roots.c_str())};
}

// --- 6 ----------------------------------------------------------------------

struct Column {
    double nu;
    double lower_ref, upper_ref;
    double lo_a, lo_b, up_a, up_b; // brackets
};

struct ColumnResult {
    bool ok = false;
    double lower = NAN, upper = NAN;
    std::string note;
};

ColumnResult boundary_column(const Column& c, int jobs)
{
    ColumnResult out;
    EnergyBranch br(family_params(c.nu, 5.0));
    StabilityOptions so;
    so.roots.contour.jobs = jobs;
    try {
        out.lower = neutral_boundary(br, BoundarySide::lower, c.lo_a, c.lo_b, so).E_A;
        out.upper = neutral_boundary(br, BoundarySide::upper, c.up_a, c.up_b, so).E_A;
        out.ok = true;
    }
    catch (const Error& e) {
        out.note = e.what();
    }
    return out;
}

Outcome boundary_spot_checks(int jobs, bool monotonicity)
{
    std::ostringstream msg;
    bool ok = true;
    const Column cols[2] = {
        {0.1, 2.75, 6.85, 2.0, 4.0, 5.0, 8.0},
        {0.342, 3.925, 4.125, 3.5, 4.025, 4.025, 4.6},
    };
    ColumnResult nu01;
    for (const Column& c : cols) {
        const ColumnResult r = boundary_column(c, jobs);
        if (c.nu == 0.1)
            nu01 = r;
        if (!r.ok) {
            ok = false;
            msg << fmt("nu=%.3g: %s; ", c.nu, r.note.c_str());
            continue;
        }
        const bool hit = within(r.lower, c.lower_ref, 0.15) && within(r.upper, c.upper_ref, 0.15);
        ok = ok && hit;
        msg << fmt("nu=%.3g: E- = %.3f (ref %.3f), E+ = %.3f (ref %.3f); ", c.nu, r.lower,
                   c.lower_ref, r.upper, c.upper_ref);
    }

    // 0.99 read as an ignition temperature must abort
    bool aborted = false;
    try {
        WaveParams p;
        p.T_ig = 0.99;
        calibrate_k(p);
    }
    catch (const IgnitionFailure&) {
        aborted = true;
    }
    ok = ok && aborted;
    msg << (aborted ? "T_ig = 0.99 aborts with IgnitionFailure" : "T_ig = 0.99 did not abort");

    if (monotonicity) {
        ColumnResult r05 = boundary_column({0.05, 0, 0, 2.0, 4.0, 5.0, 9.0}, jobs);
        ColumnResult r20 = boundary_column({0.2, 0, 0, 2.0, 4.0, 4.5, 8.0}, jobs);
        const bool mono = r05.ok && nu01.ok && r20.ok && r05.upper > nu01.upper &&
                          nu01.upper > r20.upper && r05.lower < nu01.lower &&
                          nu01.lower < r20.lower;
        ok = ok && mono;
        msg << fmt("; monotonicity over nu = 0.05, 0.1, 0.2: E+ %.3f %.3f %.3f, E- %.3f %.3f "
                   "%.3f (%s)",
                   r05.upper, nu01.upper, r20.upper, r05.lower, nu01.lower, r20.lower,
                   mono ? "holds" : "fails");
    }
    return {ok, msg.str()};
}

// --- 8 ----------------------------------------------------------------------

// The criterion is the explicit statement; the status of its substitutes is
// reported alongside so a failure there stays visible.
Outcome not_reproduced(const std::map<int, bool>& done)
{
    std::string subs;
    for (int id : {4, 5, 6}) {
        const auto it = done.find(id);
        subs += fmt("%s%d ", subs.empty() ? "" : ", ", id) +
                (it == done.end() ? "not run" : it->second ? "PASS" : "FAIL");
    }
    return {true, "not run at desk scale: the 15-panel root-trajectory sequences for three "
                  "viscosities and the full two-sided boundary curve; replaced by criteria "
                  "4-6 (this run: " + subs + ")"};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    int jobs = 1;
    std::vector<int> only;
    bool no_monotonicity = false;
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    app.add_flag("--no-monotonicity", no_monotonicity, "skip the extra boundary columns");
    CLI11_PARSE(app, argc, argv);

    const std::set<int> sel(only.begin(), only.end());
    std::map<int, bool> done;
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, rankine_hugoniot},
        {2, overdrive},
        {3, bench},
        {4, [&] { return evans_properties(jobs); }},
        {5, [&] { return hyperstabilization(jobs); }},
        {6, [&] { return boundary_spot_checks(jobs, !no_monotonicity); }},
        {7, fits},
        {8, [&] { return not_reproduced(done); }},
    };

    bool all = true;
    for (const auto& [id, run] : criteria) {
        if (!sel.empty() && !sel.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        }
        catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        done[id] = o.pass;
        std::printf("criterion %d: %s  %s  [%.0f s]\n", id, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), s);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
