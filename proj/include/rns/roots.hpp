#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "rns/evans.hpp"

namespace rns {

/// One smooth piece of a contour, parametrized by s in [0, 1].
struct ContourPiece {
    enum class Kind { segment, arc };
    Kind kind = Kind::segment;
    cdouble a, b;          // segment ends
    cdouble center;        // arc
    double radius = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;

    static ContourPiece segment(cdouble a, cdouble b);
    static ContourPiece arc(cdouble center, double radius, double theta0, double theta1);

    cdouble point(double s) const;
    cdouble tangent(double s) const; // d lambda / ds
    double length() const;
    ContourPiece reversed() const;
};

enum class ContourShape { semi_annulus, rectangle, circle };

/// Closed, piecewise smooth curve. The parameter t runs over [0, pieces()],
/// piece i covering [i, i + 1].
class Contour {
  public:
    /// Boundary of {r_in <= |lambda| <= r_out, Re lambda >= 0}, counter-clockwise
    /// from lambda = r_out.
    static Contour semi_annulus(double r_out, double r_in);
    static Contour rectangle(cdouble lower_left, cdouble upper_right);
    static Contour circle(cdouble center, double radius);

    ContourShape shape() const { return shape_; }
    const std::vector<ContourPiece>& pieces() const { return pieces_; }
    double t_end() const { return static_cast<double>(pieces_.size()); }
    cdouble point(double t) const;
    cdouble tangent(double t) const;
    Contour reversed() const;

    // Shape descriptor.
    double r_out = 0.0, r_in = 0.0;   // semi-annulus
    cdouble lower_left, upper_right;  // rectangle
    cdouble center;                   // circle
    double radius = 0.0;

  private:
    ContourShape shape_ = ContourShape::rectangle;
    std::vector<ContourPiece> pieces_;
};

/// D values keyed by lambda, shared between contours that have common nodes
/// (quadtree boxes). Thread safe.
class EvansCache {
  public:
    bool find(cdouble lambda, EvansValue& out) const;
    void insert(const EvansValue& v);
    std::size_t size() const;

  private:
    using Key = std::pair<long long, long long>;
    static Key key(cdouble lambda);
    mutable std::mutex m_;
    std::map<Key, EvansValue> values_;
};

struct ContourOptions {
    double max_arg_step = 1.5707963267948966; // |delta arg D| between neighbours
    double max_rel_change = 0.2;              // |delta D| / max(|D|) between neighbours
    int max_levels = 12;                      // bisection cap per initial segment
    double h_max = 0.5;                       // initial node spacing
    double rel_step = 0.25;                   // initial spacing relative to |lambda| near 0
    double density = 1.0;                     // multiplies the initial node count
    int jobs = 1;
    bool throw_on_unresolved = true;
    EvansCache* cache = nullptr;
};

struct EvansNode {
    double t = 0.0;
    EvansValue value;
    int level = 0;
};

struct EvansSample {
    Contour contour;
    std::vector<EvansNode> nodes;  // ordered by t; last node closes the loop
    std::size_t insertions = 0;
    std::size_t evaluations = 0;   // fresh D evaluations (cache misses)
    bool resolved = true;
    std::vector<std::pair<double, double>> unresolved; // t ranges that hit the cap
    double closure_error = 0.0;    // |D(end) - D(start)| / |D(start)|
};

/// Samples D around the contour with adaptive bisection. Kato bases are carried
/// along the contour from the anchor; D evaluations run on opt.jobs threads.
EvansSample evans_on_contour(const Contour& contour, const EvansFunction& D,
                             const ContourOptions& opt = {});

/// Total change of arg D over 2 pi, before rounding.
double winding_number(const EvansSample& s);

/// Rounded winding number. Throws UnresolvedContour if the residual exceeds 0.05.
int zero_count(const EvansSample& s);

/// (1 / 2 pi i) closed integral of (lambda - lambda_hat)^p D'/D, via Simpson on the
/// phase-unwrapped log D.
cdouble moment(const EvansSample& s, int p, cdouble lambda_hat);

struct Root {
    cdouble lambda;
    int multiplicity = 1;
    cdouble box_lower_left, box_upper_right;
    double residual = 0.0; // |D| at lambda
    bool polished = false;
};

struct RootOptions {
    double target_accuracy = 1e-3;
    double strip_halfwidth = 1e-3; // real-axis strip handled separately in a semi-annulus
    int max_depth = 30;
    int max_escalations = 2;
    int secant_iterations = 6;
    ContourOptions contour;
};

struct RootSet {
    std::vector<Root> roots;
    int region_count = 0;    // winding number over the whole region
    int located_count = 0;   // sum of multiplicities inside the region
    bool consistent = true;
    std::size_t evaluations = 0;
    std::size_t boxes = 0;
};

/// Locates the zeros of D inside a semi-annulus or rectangle. In a
/// semi-annulus only Im >= 0 is searched and the result is reflected.
RootSet locate_roots(const Contour& region, const EvansFunction& D, const RootOptions& opt = {});

} // namespace rns
