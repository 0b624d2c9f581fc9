#include "bml/rational_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bml/error.hpp"

namespace bml {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Poly padded(const Poly& p, int degree) {
    Poly out(degree + 1, cplx(0.0, 0.0));
    std::copy(p.begin(), p.end(), out.begin());
    return out;
}

Poly reversed(const Poly& p) { return Poly(p.rbegin(), p.rend()); }

// d/dz of A/B at z.
cplx quotient_derivative(const Poly& a, const Poly& b, cplx z) {
    const cplx av = horner(a, z);
    const cplx bv = horner(b, z);
    const cplx da = horner(derivative(a), z);
    const cplx db = horner(derivative(b), z);
    return (da * bv - av * db) / (bv * bv);
}

// Newton polishing of a simple root of h in the chart where it is canonical.
ComplexPoint polish_root(const Poly& h_z, const Poly& h_w, ComplexPoint root) {
    const Poly& h = root.chart == Chart::Z ? h_z : h_w;
    const Poly dh = derivative(h);
    cplx x = root.coord();
    double residual = std::abs(horner(h, x));
    for (int k = 0; k < 6 && residual > 0.0; ++k) {
        const cplx d = horner(dh, x);
        if (d == cplx(0.0, 0.0)) break;
        const cplx candidate = x - horner(h, x) / d;
        const double r = std::abs(horner(h, candidate));
        if (!(r < residual)) break;
        x = candidate;
        residual = r;
    }
    return root.chart == Chart::Z ? ComplexPoint::from_z(x) : ComplexPoint::from_w(x);
}

}  // namespace

const char* to_string(FixedPointClass c) {
    switch (c) {
        case FixedPointClass::Superattracting: return "superattracting";
        case FixedPointClass::Attracting: return "attracting";
        case FixedPointClass::Indifferent: return "indifferent";
        case FixedPointClass::Repelling: return "repelling";
    }
    return "unknown";
}

FixedPointClass classify_multiplier(cplx m) {
    const double a = std::abs(m);
    if (a <= 1e-9) return FixedPointClass::Superattracting;
    if (std::abs(a - 1.0) <= 1e-9) return FixedPointClass::Indifferent;
    if (a < 1.0) return FixedPointClass::Attracting;
    return FixedPointClass::Repelling;
}

RationalMap RationalMap::parse(std::span<const cplx> num_coeffs, std::span<const cplx> den_coeffs) {
    RationalMap m;
    m.num_ = trimmed(num_coeffs);
    m.den_ = trimmed(den_coeffs);
    if (m.num_.empty()) throw Error(ErrorKind::InvalidArgument, "numerator has no nonzero coefficient");
    if (m.den_.empty()) throw Error(ErrorKind::InvalidArgument, "denominator has no nonzero coefficient");
    m.degree_ = std::max(m.numerator_degree(), m.denominator_degree());

    if (m.denominator_degree() >= 1) {
        const double scale = std::max(coefficient_scale(m.num_), coefficient_scale(m.den_));
        for (const Root& r : poly_roots(m.den_)) {
            const double grow = std::pow(std::max(1.0, std::abs(r.value)), m.numerator_degree());
            if (std::abs(horner(m.num_, r.value)) <= 1e-9 * scale * grow) {
                throw Error(ErrorKind::CommonFactor, "numerator vanishes at a root of the denominator");
            }
        }
    }

    m.num_h_ = padded(m.num_, m.degree_);
    m.den_h_ = padded(m.den_, m.degree_);
    m.num_rev_ = reversed(m.num_h_);
    m.den_rev_ = reversed(m.den_h_);
    return m;
}

void RationalMap::require_dynamical() const {
    if (!is_dynamical()) {
        throw Error(ErrorKind::DegreeTooLow, "map of degree " + std::to_string(degree_) + " has no dynamics of interest");
    }
}

Homogeneous RationalMap::evaluate_homogeneous(const Homogeneous& h) const {
    if (std::abs(h.x) <= std::abs(h.y)) {
        const cplx z = h.x / h.y;
        return {horner(num_h_, z), horner(den_h_, z)};
    }
    const cplx w = h.y / h.x;
    return {horner(num_rev_, w), horner(den_rev_, w)};
}

double RationalMap::spherical_derivative(const Homogeneous& h) const {
    // |P_x Q_y - P_y Q_x| / d * (|x|^2 + |y|^2) / (|P|^2 + |Q|^2), partials from Euler's identity.
    const double d = degree_;
    cplx p, q, px, py, qx, qy;
    if (std::abs(h.x) <= std::abs(h.y)) {
        const cplx z = h.x / h.y;
        p = horner(num_h_, z);
        q = horner(den_h_, z);
        px = horner(derivative(num_h_), z);
        qx = horner(derivative(den_h_), z);
        py = d * p - z * px;
        qy = d * q - z * qx;
        return std::abs(px * qy - py * qx) / d * (1.0 + std::norm(z)) / (std::norm(p) + std::norm(q));
    }
    const cplx w = h.y / h.x;
    p = horner(num_rev_, w);
    q = horner(den_rev_, w);
    py = horner(derivative(num_rev_), w);
    qy = horner(derivative(den_rev_), w);
    px = d * p - w * py;
    qx = d * q - w * qy;
    return std::abs(px * qy - py * qx) / d * (1.0 + std::norm(w)) / (std::norm(p) + std::norm(q));
}

ComplexPoint RationalMap::evaluate(const ComplexPoint& z) const {
    const ComplexPoint c = z.canonical();
    return evaluate_in_chart(c, c.chart);
}

ComplexPoint RationalMap::evaluate_in_chart(const ComplexPoint& z, Chart chart) const {
    const ComplexPoint c = z.in_chart(chart);
    const cplx x = c.coord();
    if (chart == Chart::Z) return ComplexPoint::from_homogeneous({horner(num_h_, x), horner(den_h_, x)});
    return ComplexPoint::from_homogeneous({horner(num_rev_, x), horner(den_rev_, x)});
}

cplx multiplier(const RationalMap& map, const ComplexPoint& fixed, double tol) {
    const ComplexPoint p = fixed.canonical();
    const double residual = spherical_distance(map.evaluate(p), p);
    if (residual > tol) {
        throw Error(ErrorKind::NotFixed, to_string(p) + " has residual " + std::to_string(residual));
    }
    if (p.chart == Chart::Z) {
        return quotient_derivative(map.homogeneous_numerator(), map.homogeneous_denominator(), p.coord());
    }
    // Conjugated map w -> 1/R(1/w) = Q_rev(w) / P_rev(w).
    const Poly p_rev = reversed(map.homogeneous_numerator());
    const Poly q_rev = reversed(map.homogeneous_denominator());
    return quotient_derivative(q_rev, p_rev, p.coord());
}

std::vector<FixedPointInfo> fixed_points(const RationalMap& map) {
    map.require_dynamical();
    const Poly shifted_q = multiply(map.denominator(), Poly{cplx(0.0, 0.0), cplx(1.0, 0.0)});
    const Poly f = trimmed(subtract(map.numerator(), shifted_q));
    const int finite_degree = static_cast<int>(f.size()) - 1;

    std::vector<FixedPointInfo> out;
    if (finite_degree >= 1) {
        for (const Root& r : poly_roots(f)) {
            const ComplexPoint loc = ComplexPoint::from_z(r.value);
            const cplx m = multiplier(map, loc, std::numeric_limits<double>::infinity());
            out.push_back({loc, m, classify_multiplier(m), r.multiplicity});
        }
    }
    const int at_infinity = map.degree() + 1 - std::max(finite_degree, 0);
    if (at_infinity > 0) {
        const ComplexPoint inf = ComplexPoint::infinity();
        const cplx m = multiplier(map, inf, std::numeric_limits<double>::infinity());
        out.push_back({inf, m, classify_multiplier(m), at_infinity});
    }
    return out;
}

std::vector<ComplexPoint> critical_points(const RationalMap& map) {
    map.require_dynamical();
    const Poly& p = map.numerator();
    const Poly& q = map.denominator();
    const Poly c = trimmed(subtract(multiply(derivative(p), q), multiply(p, derivative(q))));
    const int finite_degree = static_cast<int>(c.size()) - 1;

    std::vector<ComplexPoint> out;
    if (finite_degree >= 1) {
        for (const Root& r : poly_roots(c)) out.push_back(ComplexPoint::from_z(r.value));
    }
    if (2 * map.degree() - 2 - std::max(finite_degree, 0) > 0) out.push_back(ComplexPoint::infinity());
    return out;
}

std::vector<Preimage> preimages(const RationalMap& map, const ComplexPoint& c) {
    const Homogeneous t = c.canonical().homogeneous();
    const Poly& a = map.homogeneous_numerator();
    const Poly& b = map.homogeneous_denominator();
    const int d = map.degree();
    Poly h(d + 1);
    for (int i = 0; i <= d; ++i) h[i] = t.y * a[i] - t.x * b[i];

    // Leading coefficients at rounding level are a degree drop: roots at infinity.
    const double scale = coefficient_scale(h);
    int finite_degree = d;
    while (finite_degree >= 0 && std::abs(h[finite_degree]) <= 4.0 * kEps * scale) --finite_degree;

    std::vector<Preimage> out;
    if (finite_degree >= 1) {
        const Poly hz(h.begin(), h.begin() + finite_degree + 1);
        const Poly hw = reversed(h);
        for (const Root& r : poly_roots(hz)) {
            ComplexPoint pt = ComplexPoint::from_z(r.value);
            if (r.multiplicity == 1) pt = polish_root(hz, hw, pt);
            out.push_back({pt, r.multiplicity});
        }
    }
    if (d - std::max(finite_degree, 0) > 0) out.push_back({ComplexPoint::infinity(), d - std::max(finite_degree, 0)});
    return out;
}

}  // namespace bml
