// Command-line driver: znd, profile, evans, roots, track, boundary, fit, delay.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rns/gasdyn.hpp"
#include "rns/parallel.hpp"
#include "rns/profile.hpp"
#include "rns/roots.hpp"
#include "rns/stab.hpp"
#include "rns/znd.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace rns;

namespace {

constexpr const char* kToolVersion = "1.0.0";

json default_config()
{
    return {
        {"wave",
         {{"e_plus", 6.23e-2},
          {"q", 6.23e-1},
          {"E_A", 3.1},
          {"Gamma", 0.2},
          {"nu", 0.1},
          {"d", 0.1},
          {"kappa_v", 0.1},
          {"k", nullptr},
          {"k_target_x", -10.0},
          {"T_ig", 6.64e-2},
          {"T_ig_weight", nullptr},
          {"c_v", 1.0}}},
        {"solver",
         {{"rtol", 1e-6},
          {"atol", 1e-8},
          {"endpoint_tol", 1e-4},
          {"initial_mesh", 400},
          {"max_domain", 400.0},
          {"max_intervals", 40000},
          {"max_newton", 60},
          {"max_refinements", 25},
          {"seed_energy", 5.0},
          {"ds_initial", 0.05},
          {"ds_min", 1e-5},
          {"ds_max", 0.25}}},
        {"evans",
         {{"rtol", 1e-6},
          {"atol", 1e-8},
          {"ortho_tol", 1e-8},
          {"anchor", 1.0},
          {"mu_weight", 1.0},
          {"kato_rtol", 1e-10},
          {"kato_atol", 1e-12},
          {"contour", "semi_annulus"},
          {"r_out", 10.0},
          {"r_in", 1e-4},
          {"lower_left", {0.0, 0.1}},
          {"upper_right", {1.0, 1.0}},
          {"center", {1.0, 0.0}},
          {"radius", 0.5},
          {"max_levels", 12},
          {"max_arg_step", 1.5707963267948966},
          {"max_rel_change", 0.2},
          {"h_max", 0.5},
          {"rel_step", 0.25},
          {"target_accuracy", 1e-3},
          {"strip_halfwidth", 1e-3},
          {"max_escalations", 2}}},
        {"sweep",
         {{"E_start", 2.0},
          {"E_stop", 7.5},
          {"E_step", 0.25},
          {"min_step", 0.03125},
          {"nu", {0.1}},
          {"lower_bracket", {2.0, 4.0}},
          {"upper_bracket", {5.0, 8.0}},
          {"tol", 0.05},
          {"fit_source", "reference"},
          {"fit_nu_max_upper", 0.27},
          {"fit_nu_max_lower", 0.27},
          {"E_star", nullptr}}},
        {"output", {{"directory", "out"}, {"precision", 12}}},
    };
}

bool same_kind(const json& def, const json& v)
{
    if (def.is_null())
        return v.is_null() || v.is_number();
    if (def.is_number())
        return v.is_number();
    if (def.is_string())
        return v.is_string();
    if (def.is_array())
        return v.is_array();
    if (def.is_object())
        return v.is_object();
    return def.type() == v.type();
}

/// Overlays user values on the defaults. Unknown keys and type mismatches
/// are configuration errors.
void overlay(json& base, const json& user, const std::string& path)
{
    if (!user.is_object())
        throw ConfigError(path.empty() ? "config must be an object" : path + " must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!base.contains(key))
            throw ConfigError("unknown key '" + where + "'");
        json& slot = base[key];
        if (!same_kind(slot, value))
            throw ConfigError("key '" + where + "' has the wrong type");
        if (slot.is_object())
            overlay(slot, value, where);
        else
            slot = value;
    }
}

void apply_override(json& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    }
    catch (const json::parse_error&) {
        value = text;
    }
    json patch = value;
    std::string rest = key;
    std::vector<std::string> parts;
    for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
        parts.push_back(rest.substr(0, pos));
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it)
        patch = json{{*it, patch}};
    overlay(cfg, patch, "");
}

json load_config(const std::string& path, const std::vector<std::string>& sets)
{
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config file '" + path + "'");
        json user;
        try {
            user = json::parse(in);
        }
        catch (const json::parse_error& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        // A run manifest can be fed back as a config.
        if (user.is_object() && user.contains("manifest_version")) {
            if (user["manifest_version"] != 1)
                throw ConfigError("unsupported manifest_version");
            user = user.at("config");
        }
        overlay(cfg, user, "");
    }
    for (const auto& s : sets)
        apply_override(cfg, s);
    return cfg;
}

double num(const json& j) { return j.get<double>(); }

WaveParams wave_params(const json& cfg)
{
    const json& w = cfg["wave"];
    WaveParams p;
    p.e_plus = num(w["e_plus"]);
    p.q = num(w["q"]);
    p.E_A = num(w["E_A"]);
    p.Gamma = num(w["Gamma"]);
    p.nu = num(w["nu"]);
    p.d = num(w["d"]);
    p.kappa_v = num(w["kappa_v"]);
    p.c_v = num(w["c_v"]);
    p.T_ig = num(w["T_ig"]);
    if (!w["T_ig_weight"].is_null()) {
        const double e_ig =
            ignition_energy_from_weight(p.e_plus, znd_e_mid(p), num(w["T_ig_weight"]));
        p.T_ig = e_ig / p.c_v;
    }
    p.validate();
    if (!w["k"].is_null())
        p.k = num(w["k"]);
    else
        p.k = calibrate_k(p, num(w["k_target_x"])).k;
    return p;
}

ProfileOptions profile_options(const json& cfg)
{
    const json& s = cfg["solver"];
    ProfileOptions o;
    o.rtol = num(s["rtol"]);
    o.atol = num(s["atol"]);
    o.endpoint_tol = num(s["endpoint_tol"]);
    o.initial_mesh = s["initial_mesh"].get<int>();
    o.max_domain = num(s["max_domain"]);
    o.max_intervals = s["max_intervals"].get<std::size_t>();
    o.max_newton = s["max_newton"].get<int>();
    o.max_refinements = s["max_refinements"].get<int>();
    return o;
}

ArclengthOptions arclength_options(const json& cfg)
{
    const json& s = cfg["solver"];
    ArclengthOptions a;
    a.ds_initial = num(s["ds_initial"]);
    a.ds_min = num(s["ds_min"]);
    a.ds_max = num(s["ds_max"]);
    return a;
}

StabilityOptions stability_options(const json& cfg, int jobs)
{
    const json& e = cfg["evans"];
    StabilityOptions o;
    o.r_out = num(e["r_out"]);
    o.r_in = num(e["r_in"]);
    o.evans.rtol = num(e["rtol"]);
    o.evans.atol = num(e["atol"]);
    o.evans.ortho_tol = num(e["ortho_tol"]);
    o.evans.anchor = num(e["anchor"]);
    o.evans.mu_weight = num(e["mu_weight"]);
    o.evans.kato.rtol = num(e["kato_rtol"]);
    o.evans.kato.atol = num(e["kato_atol"]);
    ContourOptions& c = o.roots.contour;
    c.max_levels = e["max_levels"].get<int>();
    c.max_arg_step = num(e["max_arg_step"]);
    c.max_rel_change = num(e["max_rel_change"]);
    c.h_max = num(e["h_max"]);
    c.rel_step = num(e["rel_step"]);
    c.jobs = jobs;
    o.roots.target_accuracy = num(e["target_accuracy"]);
    o.roots.strip_halfwidth = num(e["strip_halfwidth"]);
    o.roots.max_escalations = e["max_escalations"].get<int>();
    o.max_escalations = e["max_escalations"].get<int>();
    return o;
}

cdouble complex_of(const json& a)
{
    if (!a.is_array() || a.size() != 2)
        throw ConfigError("complex values are given as [re, im]");
    return {num(a[0]), num(a[1])};
}

Contour contour_of(const json& cfg)
{
    const json& e = cfg["evans"];
    const std::string kind = e["contour"].get<std::string>();
    if (kind == "semi_annulus")
        return Contour::semi_annulus(num(e["r_out"]), num(e["r_in"]));
    if (kind == "rectangle")
        return Contour::rectangle(complex_of(e["lower_left"]), complex_of(e["upper_right"]));
    if (kind == "circle")
        return Contour::circle(complex_of(e["center"]), num(e["radius"]));
    throw ConfigError("evans.contour must be semi_annulus, rectangle or circle");
}

/// Profile for the configured wave: a direct solve when k is given, otherwise
/// the calibrated E_A branch traced from the seed energy.
std::shared_ptr<const Profile> wave_profile(const json& cfg)
{
    const WaveParams p = wave_params(cfg);
    if (!cfg["wave"]["k"].is_null())
        return std::make_shared<const Profile>(solve_profile(p, profile_options(cfg), {}));
    WaveParams base = p;
    EnergyBranch branch(base, profile_options(cfg), arclength_options(cfg),
                        num(cfg["solver"]["seed_energy"]));
    return branch.at(p.E_A);
}

WaveParams family_base(const json& cfg, double nu)
{
    json c = cfg;
    c["wave"]["nu"] = nu;
    c["wave"]["d"] = nu;
    c["wave"]["kappa_v"] = nu;
    c["wave"]["k"] = 1.0; // recalibrated per E_A by the branch
    return wave_params(c);
}

class Csv {
  public:
    Csv(const fs::path& path, const std::string& header, int precision) : os_(path)
    {
        if (!os_)
            throw ConfigError("cannot write " + path.string());
        os_ << header << '\n';
        os_.precision(precision);
    }
    template <typename... T>
    void row(const T&... v)
    {
        bool first = true;
        ((os_ << (first ? "" : ",") << v, first = false), ...);
        os_ << '\n';
    }

  private:
    std::ofstream os_;
};

json conventions(const json& cfg)
{
    WaveParams p;
    p.e_plus = num(cfg["wave"]["e_plus"]);
    p.q = num(cfg["wave"]["q"]);
    p.Gamma = num(cfg["wave"]["Gamma"]);
    p.c_v = num(cfg["wave"]["c_v"]);
    double e_mid = std::nan("");
    try {
        e_mid = znd_e_mid(p);
    }
    catch (const Error&) {
    }
    return {
        {"T_ig_reading_0.99",
         {{"as_temperature", 0.99},
          {"as_weight_on_e_plus", (0.99 * p.e_plus + 0.01 * e_mid) / p.c_v},
          {"note", "0.99 as a temperature lies above the Neumann temperature and aborts with "
                   "IgnitionFailure; read as the weight on e_plus it gives T_ig near 6.64e-2"}}},
        {"ignition_weight_rule", "e_ig = (1 - w) e_plus + w e_mid, w = wave.T_ig_weight"},
        {"k_calibration", "z = 1/2 at x = wave.k_target_x in the ZND profile"},
        {"energy_equation_sign", "kinetic term in e' enters with a minus sign"},
        {"phase_condition", "tau(0) = (1 + tau_minus) / 2"},
        {"subspace_dimensions", "from the limit spectra: Re < 0 of G_plus, Re > 0 of G_minus"},
        {"mu_shift", "sum of the selected limit eigenvalues (complex), times evans.mu_weight"},
        {"orthonormality_retraction", "polar retraction when |Omega* Omega - I| > evans.ortho_tol"},
        {"eigenvalue_order", "by real part, ties by imaginary part"},
        {"zero_on_contour_test", "|D| < 1e-13 times the larger neighbouring |D|"},
        {"shock_edge_fraction", kShockEdgeFraction},
        {"reaction_length", "from the shock centre to z = 1/2"},
        {"boundary_predicate", "winding number over the semi-annulus is zero"},
        {"profile_continuation", "pseudo-arclength in E_A from solver.seed_energy"},
    };
}

void write_manifest(const fs::path& dir, const std::string& cmd, const json& cfg,
                    double seconds, const json& results, int jobs)
{
    json m;
    m["manifest_version"] = 1;
    m["tool"] = "rns";
    m["tool_version"] = kToolVersion;
    m["subcommand"] = cmd;
    m["jobs"] = jobs;
    m["wall_time_s"] = seconds;
    m["config"] = cfg;
    m["conventions"] = conventions(cfg);
    m["results"] = results;
    std::ofstream os(dir / "manifest.json");
    os << m.dump(2) << '\n';
}

// --- subcommands -------------------------------------------------------------

json run_znd(const json& cfg, const fs::path& dir, int prec)
{
    const WaveParams p = wave_params(cfg);
    const ZndProfile z = znd_profile(p, 40.0);
    Csv csv(dir / "znd.csv", "x,tau,u,e,z,T", prec);
    for (std::size_t i = 0; i < z.size(); ++i)
        csv.row(z.x[i], z.tau[i], z.u[i], z.e[i], z.z[i], z.T[i]);
    const EndStates s = rh_end_state(p);
    return {{"k", p.k},
            {"T_ig", p.T_ig},
            {"e_mid", z.e_mid},
            {"neumann", {{"tau", z.neumann.tau}, {"u", z.neumann.u}, {"e", z.neumann.e}}},
            {"tau_minus", s.tau_minus},
            {"u_minus", s.u_minus},
            {"e_minus", s.e_minus},
            {"x_half", z.half_reaction_point()}};
}

json run_profile(const json& cfg, const fs::path& dir, int prec)
{
    const auto prof = wave_profile(cfg);
    Csv csv(dir / "profile.csv", "x,tau,u,e,z,y", prec);
    const auto& mesh = prof->mesh();
    for (double x : mesh) {
        const ProfileState U = prof->state(x);
        csv.row(x, U[0], 1.0 - U[0], U[1], U[2], U[3]);
    }
    const ShockReactionRatio r = shock_reaction_ratio(*prof);
    const ProfileDiagnostics& d = prof->diagnostics();
    return {{"k", prof->params().k},
            {"x_min", prof->x_min()},
            {"x_max", prof->x_max()},
            {"intervals", d.intervals},
            {"max_scaled_residual", d.max_scaled_residual},
            {"endpoint_deviation_plus", d.endpoint_deviation_plus},
            {"endpoint_deviation_minus", d.endpoint_deviation_minus},
            {"shock_width", r.shock_width},
            {"reaction_length", r.reaction_length},
            {"ratio", r.ratio},
            {"z_entry", r.z_entry},
            {"z_exit", r.z_exit}};
}

json run_evans(const json& cfg, const fs::path& dir, int prec, int jobs,
               const std::vector<double>& dump_G)
{
    const StabilityOptions so = stability_options(cfg, jobs);
    auto sys = std::make_shared<const SpectralSystem>(wave_profile(cfg));
    if (!dump_G.empty()) {
        if (dump_G.size() != 3)
            throw ConfigError("--dump-G expects x,re,im");
        std::ofstream os(dir / "G.csv");
        write_G_csv(os, *sys, dump_G[0], {dump_G[1], dump_G[2]});
    }
    const EvansFunction D(sys, so.evans);
    ContourOptions co = so.roots.contour;
    co.throw_on_unresolved = false;
    const EvansSample s = evans_on_contour(contour_of(cfg), D, co);
    Csv csv(dir / "evans.csv", "re_lambda,im_lambda,re_D,im_D,k_plus,k_minus", prec);
    for (const auto& n : s.nodes)
        csv.row(n.value.lambda.real(), n.value.lambda.imag(), n.value.D.real(),
                n.value.D.imag(), n.value.k_plus, n.value.k_minus);
    json out = {{"nodes", s.nodes.size()},
                {"insertions", s.insertions},
                {"resolved", s.resolved},
                {"winding_number", winding_number(s)},
                {"closure_error", s.closure_error}};
    if (!s.resolved)
        throw UnresolvedContour("contour sample unresolved; " +
                                std::to_string(s.unresolved.size()) + " segment(s) hit the cap");
    return out;
}

json run_roots(const json& cfg, const fs::path& dir, int prec, int jobs)
{
    const StabilityOptions so = stability_options(cfg, jobs);
    auto sys = std::make_shared<const SpectralSystem>(wave_profile(cfg));
    const EvansFunction D(sys, so.evans);
    const RootSet rs = locate_roots(contour_of(cfg), D, so.roots);
    Csv csv(dir / "roots.csv", "re_lambda,im_lambda,multiplicity,residual", prec);
    for (const Root& r : rs.roots)
        csv.row(r.lambda.real(), r.lambda.imag(), r.multiplicity, r.residual);
    return {{"region_count", rs.region_count},
            {"located_count", rs.located_count},
            {"consistent", rs.consistent},
            {"boxes", rs.boxes},
            {"evaluations", rs.evaluations}};
}

json run_track(const json& cfg, const fs::path& dir, int prec, int jobs)
{
    const json& sw = cfg["sweep"];
    const StabilityOptions so = stability_options(cfg, jobs);
    std::vector<double> grid;
    const double a = num(sw["E_start"]), b = num(sw["E_stop"]), h = num(sw["E_step"]);
    if (!(h > 0.0) || !(b >= a))
        throw ConfigError("sweep needs E_step > 0 and E_stop >= E_start");
    for (int i = 0; a + i * h <= b + 1e-12; ++i)
        grid.push_back(a + i * h);
    const WaveParams p = wave_params(cfg);
    EnergyBranch branch(p, profile_options(cfg), arclength_options(cfg),
                        num(cfg["solver"]["seed_energy"]));
    TrackOptions topt;
    topt.min_step = num(sw["min_step"]);
    const RootTrajectory t = track_roots(branch, grid, so, topt);

    Csv csv(dir / "trajectory.csv", "E_A,re_lambda,im_lambda,lineage", prec);
    for (const auto& pt : t.points)
        for (std::size_t i = 0; i < pt.roots.roots.size(); ++i)
            csv.row(pt.E_A, pt.roots.roots[i].lambda.real(), pt.roots.roots[i].lambda.imag(),
                    pt.lineage[i]);
    Csv ev(dir / "events.csv", "kind,E_before,E_after,lineage", prec);
    for (const auto& e : t.events)
        ev.row(e.kind == RootEvent::Kind::entry ? "entry" : "exit", e.E_before, e.E_after,
               e.lineage);
    json counts = json::array();
    for (const auto& pt : t.points)
        counts.push_back({pt.E_A, pt.roots.region_count});
    return {{"steps", t.points.size()}, {"lineages", t.lineages}, {"broken", t.broken},
            {"counts", counts}};
}

json run_boundary(const json& cfg, const fs::path& dir, int prec, int jobs)
{
    const json& sw = cfg["sweep"];
    const std::vector<double> nus = sw["nu"].get<std::vector<double>>();
    const auto lb = sw["lower_bracket"].get<std::vector<double>>();
    const auto ub = sw["upper_bracket"].get<std::vector<double>>();
    if (lb.size() != 2 || ub.size() != 2)
        throw ConfigError("brackets are [E_lo, E_hi]");
    const double tol = num(sw["tol"]);

    // Columns are independent; contours inside a column run on one thread
    // when several columns run at once.
    const int inner = nus.size() > 1 ? 1 : jobs;
    const StabilityOptions so = stability_options(cfg, inner);
    std::vector<BoundaryPoint> lower(nus.size()), upper(nus.size());
    parallel_for(nus.size(), nus.size() > 1 ? jobs : 1, [&](std::size_t i) {
        EnergyBranch branch(family_base(cfg, nus[i]), profile_options(cfg),
                            arclength_options(cfg), num(cfg["solver"]["seed_energy"]));
        lower[i] = neutral_boundary(branch, BoundarySide::lower, lb[0], lb[1], so, tol);
        upper[i] = neutral_boundary(branch, BoundarySide::upper, ub[0], ub[1], so, tol);
    });

    Csv csv(dir / "boundary.csv", "nu,E_A_minus,E_A_plus,abs_err", prec);
    json probes = json::array();
    for (std::size_t i = 0; i < nus.size(); ++i) {
        csv.row(nus[i], lower[i].E_A, upper[i].E_A, std::max(lower[i].abs_err, upper[i].abs_err));
        json pl = json::array(), pu = json::array();
        for (const auto& p : lower[i].probes)
            pl.push_back({p.E_A, p.count});
        for (const auto& p : upper[i].probes)
            pu.push_back({p.E_A, p.count});
        probes.push_back({{"nu", nus[i]}, {"lower", pl}, {"upper", pu}});
    }
    return {{"probes", probes}};
}

struct Points {
    std::vector<double> nu, lower_nu, upper, lower;
};

/// Boundary points from the reference data or a boundary CSV written by
/// the boundary subcommand.
Points boundary_points(const json& cfg)
{
    Points pts;
    const std::string src = cfg["sweep"]["fit_source"].get<std::string>();
    if (src == "reference") {
        for (const auto& s : reference_upper_boundary()) {
            pts.nu.push_back(s.nu);
            pts.upper.push_back(s.E_A);
        }
        for (const auto& s : reference_lower_boundary()) {
            pts.lower_nu.push_back(s.nu);
            pts.lower.push_back(s.E_A);
        }
        return pts;
    }
    std::ifstream in(src);
    if (!in)
        throw ConfigError("cannot read boundary CSV '" + src + "'");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string f;
        std::vector<double> v;
        while (std::getline(ss, f, ','))
            v.push_back(std::stod(f));
        if (v.size() < 3)
            throw ConfigError("malformed boundary CSV row '" + line + "'");
        pts.nu.push_back(v[0]);
        pts.lower_nu.push_back(v[0]);
        pts.lower.push_back(v[1]);
        pts.upper.push_back(v[2]);
    }
    return pts;
}

json fit_json(const FitResult& f)
{
    std::vector<double> c(f.coefficients.data(), f.coefficients.data() + f.coefficients.size());
    std::vector<double> r(f.residuals.data(), f.residuals.data() + f.residuals.size());
    return {{"model", f.model == FitModel::linear ? "linear" : "linear_log"},
            {"coefficients", c},
            {"residuals", r},
            {"max_residual", f.max_residual}};
}

FitResult lower_fit(const json& cfg, const Points& pts)
{
    const double nmax = num(cfg["sweep"]["fit_nu_max_lower"]);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < pts.lower_nu.size(); ++i)
        if (pts.lower_nu[i] <= nmax) {
            x.push_back(pts.lower_nu[i]);
            y.push_back(pts.lower[i]);
        }
    return fit_boundary(x, y, FitModel::linear);
}

json run_fit(const json& cfg, const fs::path& dir)
{
    const Points pts = boundary_points(cfg);
    const double umax = num(cfg["sweep"]["fit_nu_max_upper"]);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < pts.nu.size(); ++i)
        if (pts.nu[i] < umax) {
            x.push_back(pts.nu[i]);
            y.push_back(pts.upper[i]);
        }
    const json out = {{"upper", fit_json(fit_boundary(x, y, FitModel::linear_log))},
                      {"lower", fit_json(lower_fit(cfg, pts))}};
    std::ofstream(dir / "fit.json") << out.dump(2) << '\n';
    return out;
}

json run_delay(const json& cfg, const fs::path& dir, int prec)
{
    if (cfg["sweep"]["E_star"].is_null())
        throw ConfigError("delay needs sweep.E_star");
    const double E_star = num(cfg["sweep"]["E_star"]);
    const Points pts = boundary_points(cfg);
    const FitResult f = lower_fit(cfg, pts);
    const auto rows = viscous_delay(f, cfg["sweep"]["nu"].get<std::vector<double>>(), E_star);
    Csv csv(dir / "delay.csv", "nu,E_A_minus,delay", prec);
    for (const auto& r : rows)
        csv.row(r.nu, r.E_minus, r.delay);
    return {{"lower_fit", fit_json(f)}, {"E_star", E_star}};
}

int exit_code(const Error& e) { return static_cast<int>(e.family()); }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Viscous strong detonation stability"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::vector<std::string> sets;
    int jobs = 1;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON config or run manifest");
    app.add_option("--set", sets, "override, e.g. wave.E_A=5")->allow_extra_args(false);
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory");

    std::vector<double> nu_flag;
    std::vector<double> dump_G;
    auto* znd = app.add_subcommand("znd", "ZND profile and calibrated k");
    auto* profile = app.add_subcommand("profile", "viscous profile");
    auto* evans = app.add_subcommand("evans", "Evans function on a contour");
    evans->add_option("--dump-G", dump_G, "write G(x; lambda) for x,re,im")->delimiter(',');
    auto* roots = app.add_subcommand("roots", "locate unstable eigenvalues");
    auto* track = app.add_subcommand("track", "roots along an E_A grid");
    auto* boundary = app.add_subcommand("boundary", "neutral boundaries by bisection");
    boundary->add_option("--nu", nu_flag, "viscosities (nu = d = kappa_v)")->delimiter(',');
    auto* fit = app.add_subcommand("fit", "least-squares boundary fits");
    auto* delay = app.add_subcommand("delay", "viscous delay table");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorFamily::config);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        json cfg = load_config(config_path, sets);
        if (!nu_flag.empty())
            cfg["sweep"]["nu"] = nu_flag;
        const fs::path dir = out_dir.empty() ? fs::path(cfg["output"]["directory"].get<std::string>())
                                             : fs::path(out_dir);
        fs::create_directories(dir);
        const int prec = cfg["output"]["precision"].get<int>();

        json results;
        if (znd->parsed())
            results = run_znd(cfg, dir, prec);
        else if (profile->parsed())
            results = run_profile(cfg, dir, prec);
        else if (evans->parsed())
            results = run_evans(cfg, dir, prec, jobs, dump_G);
        else if (roots->parsed())
            results = run_roots(cfg, dir, prec, jobs);
        else if (track->parsed())
            results = run_track(cfg, dir, prec, jobs);
        else if (boundary->parsed())
            results = run_boundary(cfg, dir, prec, jobs);
        else if (fit->parsed())
            results = run_fit(cfg, dir);
        else if (delay->parsed())
            results = run_delay(cfg, dir, prec);

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(dir, cmd, cfg, secs, results, jobs);
        std::cout << results.dump(2) << '\n';
        return 0;
    }
    catch (const Error& e) {
        std::cerr << "rns " << cmd << ": " << e.what() << '\n';
        return exit_code(e);
    }
    catch (const json::exception& e) {
        std::cerr << "rns " << cmd << ": config error: " << e.what() << '\n';
        return static_cast<int>(ErrorFamily::config);
    }
    catch (const std::exception& e) {
        std::cerr << "rns " << cmd << ": " << e.what() << '\n';
        return 1;
    }
}
