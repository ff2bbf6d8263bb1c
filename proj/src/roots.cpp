#include "rns/roots.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "rns/parallel.hpp"

namespace rns {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(cdouble z)
{
    return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

bool lex_less(cdouble a, cdouble b)
{
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

/// Initial parameters in [0, 1) for one piece. Spacing is at most h_max and
/// shrinks like |lambda| near the origin, where D has its translation zero.
/// Segments are always walked in a canonical direction so boxes sharing an
/// edge get the same nodes.
std::vector<double> piece_nodes(const ContourPiece& pc, const ContourOptions& opt)
{
    const bool flip = pc.kind == ContourPiece::Kind::segment && lex_less(pc.b, pc.a);
    const ContourPiece q = flip ? pc.reversed() : pc;
    const double len = q.length();
    const double hmax = opt.h_max / opt.density;
    const double rel = opt.rel_step / opt.density;

    std::vector<double> s{0.0};
    double cur = 0.0;
    for (;;) {
        const double mag = std::abs(q.point(cur));
        double step = std::min(hmax, rel * mag / (1.0 + rel)) / len;
        step = std::clamp(step, 1e-9, 0.25);
        if (cur + step >= 1.0 - 0.3 * step)
            break;
        cur += step;
        s.push_back(cur);
    }
    if (!flip)
        return s;
    std::vector<double> out{0.0};
    for (std::size_t i = s.size() - 1; i >= 1; --i)
        out.push_back(1.0 - s[i]);
    return out;
}

bool neighbours_ok(const EvansValue& a, const EvansValue& b, const ContourOptions& opt)
{
    const double ma = std::abs(a.D), mb = std::abs(b.D);
    if (!(ma > 0.0) || !(mb > 0.0) || !std::isfinite(ma) || !std::isfinite(mb))
        return false;
    if (std::abs(std::arg(b.D / a.D)) >= opt.max_arg_step)
        return false;
    return std::abs(b.D - a.D) / std::max(ma, mb) < opt.max_rel_change;
}

/// |D| spans many decades around a large contour, so a node only counts as a
/// zero when it is tiny next to its own neighbours (or exactly zero).
void check_nonzero(const EvansSample& s)
{
    const auto& nd = s.nodes;
    for (std::size_t j = 0; j < nd.size(); ++j) {
        double ref = 0.0;
        if (j > 0)
            ref = std::max(ref, std::abs(nd[j - 1].value.D));
        if (j + 1 < nd.size())
            ref = std::max(ref, std::abs(nd[j + 1].value.D));
        const double a = std::abs(nd[j].value.D);
        if (!(a > 0.0) || !std::isfinite(a) || a < 1e-13 * ref)
            throw ContourThroughZero("|D| vanishes on the contour at lambda = " +
                                     fmt(nd[j].value.lambda));
    }
}

/// Composite Simpson on nonuniform nodes; an odd leftover interval uses the
/// quadratic through the last three nodes.
cdouble simpson(const std::vector<double>& x, const std::vector<cdouble>& f)
{
    const std::size_t n = x.size();
    if (n < 2)
        return 0.0;
    if (n == 2)
        return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    cdouble sum = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double h0 = x[i + 1] - x[i], h1 = x[i + 2] - x[i + 1];
        sum += (h0 + h1) / 6.0 *
               ((2.0 - h1 / h0) * f[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[i + 1] +
                (2.0 - h0 / h1) * f[i + 2]);
    }
    if (i + 1 < n) {
        // Last interval [x[n-2], x[n-1]] from the quadratic through the last three nodes.
        const double h0 = x[n - 2] - x[n - 3], h1 = x[n - 1] - x[n - 2];
        sum += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[n - 3] +
               h1 * (3.0 * h0 + h1) / (6.0 * h0) * f[n - 2] +
               h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1)) * f[n - 1];
    }
    return sum;
}

} // namespace

// --- contour geometry ------------------------------------------------------

ContourPiece ContourPiece::segment(cdouble a, cdouble b)
{
    ContourPiece p;
    p.kind = Kind::segment;
    p.a = a;
    p.b = b;
    return p;
}

ContourPiece ContourPiece::arc(cdouble center, double radius, double theta0, double theta1)
{
    ContourPiece p;
    p.kind = Kind::arc;
    p.center = center;
    p.radius = radius;
    p.theta0 = theta0;
    p.theta1 = theta1;
    p.a = p.point(0.0);
    p.b = p.point(1.0);
    return p;
}

cdouble ContourPiece::point(double s) const
{
    if (kind == Kind::segment)
        return s <= 0.5 ? a + s * (b - a) : b + (1.0 - s) * (a - b);
    return center + std::polar(radius, theta0 + s * (theta1 - theta0));
}

cdouble ContourPiece::tangent(double s) const
{
    if (kind == Kind::segment)
        return b - a;
    const double th = theta0 + s * (theta1 - theta0);
    return cdouble(0.0, theta1 - theta0) * std::polar(radius, th);
}

double ContourPiece::length() const
{
    return kind == Kind::segment ? std::abs(b - a) : radius * std::abs(theta1 - theta0);
}

ContourPiece ContourPiece::reversed() const
{
    ContourPiece p = *this;
    std::swap(p.a, p.b);
    std::swap(p.theta0, p.theta1);
    return p;
}

Contour Contour::semi_annulus(double r_out, double r_in)
{
    if (!(r_in > 0.0) || !(r_out > r_in))
        throw DomainError("semi-annulus needs 0 < r_in < r_out");
    const double h = std::numbers::pi / 2.0;
    Contour c;
    c.shape_ = ContourShape::semi_annulus;
    c.r_out = r_out;
    c.r_in = r_in;
    c.pieces_ = {
        ContourPiece::arc(0.0, r_out, 0.0, h),
        ContourPiece::segment({0.0, r_out}, {0.0, r_in}),
        ContourPiece::arc(0.0, r_in, h, -h),
        ContourPiece::segment({0.0, -r_in}, {0.0, -r_out}),
        ContourPiece::arc(0.0, r_out, -h, 0.0),
    };
    return c;
}

Contour Contour::rectangle(cdouble ll, cdouble ur)
{
    if (!(ur.real() > ll.real()) || !(ur.imag() > ll.imag()))
        throw DomainError("degenerate rectangle " + fmt(ll) + " " + fmt(ur));
    const cdouble lr{ur.real(), ll.imag()}, ul{ll.real(), ur.imag()};
    Contour c;
    c.shape_ = ContourShape::rectangle;
    c.lower_left = ll;
    c.upper_right = ur;
    c.pieces_ = {ContourPiece::segment(ll, lr), ContourPiece::segment(lr, ur),
                 ContourPiece::segment(ur, ul), ContourPiece::segment(ul, ll)};
    return c;
}

Contour Contour::circle(cdouble center, double radius)
{
    if (!(radius > 0.0))
        throw DomainError("circle radius must be positive");
    Contour c;
    c.shape_ = ContourShape::circle;
    c.center = center;
    c.radius = radius;
    // Four quarter arcs so the initial nodes are spread evenly.
    const double q = std::numbers::pi / 2.0;
    for (int i = 0; i < 4; ++i)
        c.pieces_.push_back(ContourPiece::arc(center, radius, i * q, (i + 1) * q));
    return c;
}

cdouble Contour::point(double t) const
{
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(t, 0.0)), pieces_.size() - 1);
    return pieces_[i].point(t - static_cast<double>(i));
}

cdouble Contour::tangent(double t) const
{
    const std::size_t i = std::min(static_cast<std::size_t>(std::max(t, 0.0)), pieces_.size() - 1);
    return pieces_[i].tangent(t - static_cast<double>(i));
}

Contour Contour::reversed() const
{
    Contour c = *this;
    c.pieces_.clear();
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
        c.pieces_.push_back(it->reversed());
    return c;
}

// --- cache -------------------------------------------------------------------

EvansCache::Key EvansCache::key(cdouble lambda)
{
    return {std::llround(lambda.real() * 1e12), std::llround(lambda.imag() * 1e12)};
}

bool EvansCache::find(cdouble lambda, EvansValue& out) const
{
    std::lock_guard lock(m_);
    const auto it = values_.find(key(lambda));
    if (it == values_.end())
        return false;
    out = it->second;
    return true;
}

void EvansCache::insert(const EvansValue& v)
{
    std::lock_guard lock(m_);
    values_.emplace(key(v.lambda), v);
}

std::size_t EvansCache::size() const
{
    std::lock_guard lock(m_);
    return values_.size();
}

// --- sampling ----------------------------------------------------------------

EvansSample evans_on_contour(const Contour& contour, const EvansFunction& D,
                             const ContourOptions& opt)
{
    EvansSample out;
    out.contour = contour;

    std::vector<double> ts;
    for (std::size_t i = 0; i < contour.pieces().size(); ++i)
        for (double s : piece_nodes(contour.pieces()[i], opt))
            ts.push_back(static_cast<double>(i) + s);
    ts.push_back(contour.t_end());

    auto lambda_at = [&](double t) {
        return t == contour.t_end() ? contour.point(0.0) : contour.point(t);
    };

    // Bases carried node to node from the anchor.
    std::vector<KatoBasis> plus, minus;
    plus.reserve(ts.size());
    minus.reserve(ts.size());
    {
        KatoBasis bp = D.seed_plus(), bm = D.seed_minus();
        for (double t : ts) {
            const cdouble lam = lambda_at(t);
            bp.transport_to(lam);
            bm.transport_to(lam);
            plus.push_back(bp);
            minus.push_back(bm);
        }
    }

    std::size_t fresh = 0;
    auto evaluate = [&](const std::vector<KatoBasis>& P, const std::vector<KatoBasis>& M) {
        std::vector<EvansValue> v(P.size());
        std::vector<char> hit(P.size(), 0);
        parallel_for(P.size(), opt.jobs, [&](std::size_t i) {
            if (opt.cache && opt.cache->find(P[i].lambda(), v[i])) {
                hit[i] = 1;
                return;
            }
            v[i] = D.evaluate(P[i], M[i]);
            if (opt.cache)
                opt.cache->insert(v[i]);
        });
        for (char h : hit)
            fresh += h ? 0 : 1;
        return v;
    };

    std::vector<EvansValue> vals = evaluate(plus, minus);
    std::vector<int> level(ts.size(), 0);

    auto seg_level = [&](std::size_t j) { return std::max(level[j], level[j + 1]); };

    for (;;) {
        std::vector<std::size_t> bad;
        for (std::size_t j = 0; j + 1 < ts.size(); ++j)
            if (seg_level(j) < opt.max_levels && !neighbours_ok(vals[j], vals[j + 1], opt))
                bad.push_back(j);
        if (bad.empty())
            break;

        std::vector<KatoBasis> np, nm;
        std::vector<double> nt;
        for (std::size_t j : bad) {
            const double tm = 0.5 * (ts[j] + ts[j + 1]);
            KatoBasis bp = plus[j], bm = minus[j];
            bp.transport_to(lambda_at(tm));
            bm.transport_to(lambda_at(tm));
            np.push_back(std::move(bp));
            nm.push_back(std::move(bm));
            nt.push_back(tm);
        }
        std::vector<EvansValue> nv = evaluate(np, nm);
        out.insertions += bad.size();

        // Merge the midpoints into the ordered node list.
        std::vector<double> ts2;
        std::vector<KatoBasis> p2, m2;
        std::vector<EvansValue> v2;
        std::vector<int> l2;
        std::size_t b = 0;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            ts2.push_back(ts[j]);
            p2.push_back(std::move(plus[j]));
            m2.push_back(std::move(minus[j]));
            v2.push_back(vals[j]);
            l2.push_back(level[j]);
            if (b < bad.size() && bad[b] == j) {
                ts2.push_back(nt[b]);
                p2.push_back(std::move(np[b]));
                m2.push_back(std::move(nm[b]));
                v2.push_back(nv[b]);
                l2.push_back(seg_level(j) + 1);
                ++b;
            }
        }
        ts.swap(ts2);
        plus.swap(p2);
        minus.swap(m2);
        vals.swap(v2);
        level.swap(l2);
    }

    for (std::size_t j = 0; j + 1 < ts.size(); ++j)
        if (!neighbours_ok(vals[j], vals[j + 1], opt))
            out.unresolved.emplace_back(ts[j], ts[j + 1]);
    out.resolved = out.unresolved.empty();
    out.evaluations = fresh;

    out.nodes.resize(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j)
        out.nodes[j] = {ts[j], vals[j], level[j]};
    const cdouble d0 = vals.front().D, d1 = vals.back().D;
    out.closure_error = std::abs(d1 - d0) / std::abs(d0);

    if (!out.resolved && opt.throw_on_unresolved) {
        const auto [ta, tb] = out.unresolved.front();
        throw UnresolvedContour(std::to_string(out.unresolved.size()) +
                                " segment(s) still unresolved after " +
                                std::to_string(opt.max_levels) + " bisections, first between " +
                                fmt(contour.point(ta)) + " and " + fmt(lambda_at(tb)));
    }
    return out;
}

double winding_number(const EvansSample& s)
{
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < s.nodes.size(); ++j)
        total += std::arg(s.nodes[j + 1].value.D / s.nodes[j].value.D);
    return total / kTwoPi;
}

int zero_count(const EvansSample& s)
{
    check_nonzero(s);
    const double w = winding_number(s);
    const double r = std::round(w);
    if (std::abs(w - r) >= 0.05)
        throw UnresolvedContour("winding number " + std::to_string(w) + " is not an integer");
    return static_cast<int>(r);
}

cdouble moment(const EvansSample& s, int p, cdouble lambda_hat)
{
    check_nonzero(s);
    const auto& nd = s.nodes;
    const std::size_t n = nd.size();

    // Phase-unwrapped log D along the contour.
    std::vector<cdouble> L(n);
    L[0] = std::log(nd[0].value.D);
    for (std::size_t j = 0; j + 1 < n; ++j)
        L[j + 1] = L[j] + std::log(nd[j + 1].value.D / nd[j].value.D);
    const cdouble two_pi_i{0.0, kTwoPi};
    const cdouble m0 = (L[n - 1] - L[0]) / two_pi_i;
    if (p == 0)
        return m0;

    // Integration by parts: the boundary term closes because lambda returns
    // to its start, leaving the jump of L.
    const cdouble start = nd[0].value.lambda - lambda_hat;
    cdouble integral = 0.0;
    const std::size_t pieces = s.contour.pieces().size();
    std::size_t j = 0;
    for (std::size_t i = 0; i < pieces; ++i) {
        const ContourPiece& pc = s.contour.pieces()[i];
        std::vector<double> x;
        std::vector<cdouble> f;
        for (std::size_t k = j; k < n && nd[k].t <= static_cast<double>(i + 1); ++k) {
            const double sl = nd[k].t - static_cast<double>(i);
            const cdouble lam = nd[k].value.lambda - lambda_hat;
            x.push_back(sl);
            f.push_back(std::pow(lam, p - 1) * L[k] * pc.tangent(sl));
            if (nd[k].t < static_cast<double>(i + 1))
                j = k + 1;
        }
        integral += simpson(x, f);
    }
    return std::pow(start, p) * m0 - static_cast<double>(p) / two_pi_i * integral;
}

// --- root location -------------------------------------------------------------

namespace {

struct Box {
    cdouble lo, hi;
    double width() const { return hi.real() - lo.real(); }
    double height() const { return hi.imag() - lo.imag(); }
    double diameter() const { return std::abs(hi - lo); }
    cdouble center() const { return 0.5 * (lo + hi); }
    bool contains(cdouble z, double slack = 0.0) const
    {
        return z.real() >= lo.real() - slack && z.real() <= hi.real() + slack &&
               z.imag() >= lo.imag() - slack && z.imag() <= hi.imag() + slack;
    }
};

class Locator {
  public:
    Locator(const EvansFunction& D, const RootOptions& opt) : D_{D}, opt_{opt} {}

    EvansSample sample(const Contour& c, double density)
    {
        ContourOptions co = opt_.contour;
        co.cache = &cache_;
        co.density *= density;
        EvansSample s = evans_on_contour(c, D_, co);
        out_.evaluations += s.evaluations;
        ++out_.boxes;
        return s;
    }

    EvansSample sample(const Box& b, double density)
    {
        return sample(Contour::rectangle(b.lo, b.hi), density);
    }

    /// Quadtree on a box known to hold m zeros. In strip mode boxes are split
    /// along the real axis only.
    void refine(const Box& b, int m, int depth, bool strip, double density)
    {
        if (m <= 0)
            return;
        if (m == 1 && isolated(b, strip, density))
            return;
        if (b.diameter() <= opt_.target_accuracy || depth >= opt_.max_depth) {
            cluster(b, m, density);
            return;
        }

        for (int esc = 0;; ++esc) {
            std::vector<Box> kids;
            std::vector<int> counts;
            try {
                kids = split(b, strip, esc);
                for (const Box& k : kids)
                    counts.push_back(zero_count(sample(k, density)));
            }
            catch (const ContourThroughZero&) {
                if (esc >= opt_.max_escalations)
                    throw;
                continue;
            }
            int sum = 0;
            for (int c : counts)
                sum += c;
            if (sum == m) {
                for (std::size_t i = 0; i < kids.size(); ++i)
                    refine(kids[i], counts[i], depth + 1, strip, density);
                return;
            }
            if (esc >= opt_.max_escalations)
                throw UnresolvedContour("box " + fmt(b.lo) + " " + fmt(b.hi) + " holds " +
                                        std::to_string(m) + " zeros but its children hold " +
                                        std::to_string(sum));
            density *= 2.0;
            m = zero_count(sample(b, density));
            if (m == 0)
                return;
        }
    }

    RootSet& result() { return out_; }
    std::size_t boxes() const { return out_.boxes; }

  private:
    std::vector<Box> split(const Box& b, bool strip, int attempt) const
    {
        // Shift the cut slightly on retries so it misses a zero sitting on it.
        const double shift = attempt * 1e-6;
        const double xm = b.lo.real() + (0.5 + shift) * b.width();
        if (strip)
            return {{b.lo, {xm, b.hi.imag()}}, {{xm, b.lo.imag()}, b.hi}};
        const double ym = b.lo.imag() + (0.5 + shift) * b.height();
        return {{b.lo, {xm, ym}},
                {{xm, b.lo.imag()}, {b.hi.real(), ym}},
                {{b.lo.real(), ym}, {xm, b.hi.imag()}},
                {{xm, ym}, b.hi}};
    }

    /// Single zero in b: centroid from the first moment, secant polish, then a
    /// shrunken box around the result must still hold exactly one zero.
    bool isolated(const Box& b, bool strip, double density)
    {
        const EvansSample s = sample(b, density);
        const cdouble c = b.center();
        cdouble est = c + moment(s, 1, c);
        if (strip)
            est = {est.real(), 0.0};
        if (!b.contains(est))
            return false;

        const EvansValue v0 = D_(est);
        Root r;
        r.lambda = est;
        r.residual = std::abs(v0.D);
        polish(r, b, strip);

        if (b.diameter() > opt_.target_accuracy) {
            const double hw = b.width() / 8.0;
            const double hh = strip ? 0.5 * b.height() : b.height() / 8.0;
            Box small{{std::max(b.lo.real(), r.lambda.real() - hw),
                       strip ? b.lo.imag() : std::max(b.lo.imag(), r.lambda.imag() - hh)},
                      {std::min(b.hi.real(), r.lambda.real() + hw),
                       strip ? b.hi.imag() : std::min(b.hi.imag(), r.lambda.imag() + hh)}};
            try {
                if (zero_count(sample(small, density)) != 1)
                    return false;
            }
            catch (const ContourThroughZero&) {
                return false;
            }
            catch (const UnresolvedContour&) {
                return false;
            }
            r.box_lower_left = small.lo;
            r.box_upper_right = small.hi;
        }
        else {
            r.box_lower_left = b.lo;
            r.box_upper_right = b.hi;
        }
        out_.roots.push_back(r);
        return true;
    }

    void polish(Root& r, const Box& b, bool strip)
    {
        const double h = std::max(1e-3 * b.diameter(), 1e-7);
        cdouble x0 = r.lambda, x1 = r.lambda + h;
        cdouble f0 = D_(x0).D, f1 = D_(x1).D;
        if (strip) {
            f0 = f0.real();
            f1 = f1.real();
        }
        for (int it = 0; it < opt_.secant_iterations; ++it) {
            if (f1 == f0)
                break;
            cdouble x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (strip)
                x2 = x2.real();
            if (!b.contains(x2))
                return;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = D_(x1).D;
            if (strip)
                f1 = f1.real();
            if (std::abs(x1 - x0) < 1e-12 * (1.0 + std::abs(x1)))
                break;
        }
        const double res = std::abs(D_(x1).D);
        if (res <= r.residual) {
            r.lambda = x1;
            r.residual = res;
            r.polished = true;
        }
    }

    void cluster(const Box& b, int m, double density)
    {
        const EvansSample s = sample(b, density);
        const cdouble c = b.center();
        cdouble z = c + moment(s, 1, c) / static_cast<double>(m);
        if (!b.contains(z))
            z = c;
        Root r;
        r.lambda = z;
        r.multiplicity = m;
        r.box_lower_left = b.lo;
        r.box_upper_right = b.hi;
        r.residual = std::abs(D_(z).D);
        out_.roots.push_back(r);
    }

    const EvansFunction& D_;
    RootOptions opt_;
    EvansCache cache_;
    RootSet out_;
};

} // namespace

namespace {

// Descending imaginary part, then ascending real part.
void sort_roots(std::vector<Root>& roots)
{
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.lambda.imag() != b.lambda.imag())
            return a.lambda.imag() > b.lambda.imag();
        return a.lambda.real() < b.lambda.real();
    });
}

} // namespace

RootSet locate_roots(const Contour& region, const EvansFunction& D, const RootOptions& opt)
{
    Locator loc(D, opt);

    if (region.shape() == ContourShape::rectangle) {
        const Box b{region.lower_left, region.upper_right};
        const int m = zero_count(loc.sample(region, 1.0));
        loc.refine(b, m, 0, false, 1.0);
        RootSet& out = loc.result();
        out.region_count = m;
        sort_roots(out.roots);
        for (const Root& r : out.roots)
            out.located_count += r.multiplicity;
        out.consistent = out.located_count == m;
        return out;
    }
    if (region.shape() != ContourShape::semi_annulus)
        throw DomainError("locate_roots takes a semi-annulus or a rectangle");

    double r_out = region.r_out;
    const double r_in = region.r_in;
    int total = 0;
    for (int attempt = 0;; ++attempt) {
        try {
            total = zero_count(loc.sample(Contour::semi_annulus(r_out, r_in), 1.0));
            break;
        }
        catch (const ContourThroughZero&) {
            if (attempt >= 1)
                throw;
            r_out += 1e-6;
        }
    }
    RootSet& out = loc.result();
    out.region_count = total;
    if (total == 0)
        return out;

    const double d = opt.strip_halfwidth;
    const Box upper{{0.0, d}, {r_out, r_out}};
    const Box strip{{r_in, -d}, {r_out, d}};
    loc.refine(upper, zero_count(loc.sample(upper, 1.0)), 0, false, 1.0);
    loc.refine(strip, zero_count(loc.sample(strip, 1.0)), 0, true, 1.0);

    std::vector<Root> all;
    for (const Root& r : out.roots) {
        all.push_back(r);
        if (r.lambda.imag() > d) {
            Root c = r;
            c.lambda = std::conj(r.lambda);
            c.box_lower_left = {r.box_lower_left.real(), -r.box_upper_right.imag()};
            c.box_upper_right = {r.box_upper_right.real(), -r.box_lower_left.imag()};
            all.push_back(c);
        }
    }
    std::erase_if(all, [&](const Root& r) {
        const double a = std::abs(r.lambda);
        return a > r_out || a < r_in;
    });
    sort_roots(all);
    out.roots = std::move(all);
    out.located_count = 0;
    for (const Root& r : out.roots)
        out.located_count += r.multiplicity;
    out.consistent = out.located_count == total;
    return out;
}

} // namespace rns
