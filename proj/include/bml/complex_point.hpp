#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>

namespace bml {

using cplx = std::complex<double>;

/// Coordinate chart on the Riemann sphere. W is the chart w = 1/z.
enum class Chart : std::uint8_t { Z = 0, W = 1 };

inline Chart other(Chart c) { return c == Chart::Z ? Chart::W : Chart::Z; }
inline char chart_letter(Chart c) { return c == Chart::Z ? 'Z' : 'W'; }

/// Homogeneous coordinates (x : y) of a sphere point; z = x / y.
struct Homogeneous {
    cplx x;
    cplx y;
};

/// A point of the Riemann sphere expressed in one of the two charts.
///
/// The canonical chart is Z when |z| <= 1 and W otherwise, so canonical
/// coordinates never exceed modulus 1. Infinity is (0, 0) in chart W.
struct ComplexPoint {
    double re = 0.0;
    double im = 0.0;
    Chart chart = Chart::Z;

    static ComplexPoint from_z(cplx z);  ///< canonicalised
    static ComplexPoint from_w(cplx w);  ///< canonicalised
    static ComplexPoint infinity() { return {0.0, 0.0, Chart::W}; }
    static ComplexPoint from_homogeneous(const Homogeneous& h);

    cplx coord() const { return {re, im}; }
    bool is_infinity() const { return chart == Chart::W && re == 0.0 && im == 0.0; }

    /// The finite value z; only meaningful when !is_infinity().
    cplx z() const;

    ComplexPoint canonical() const;

    /// Re-express in the given chart. Converting infinity to chart Z, or
    /// zero to chart W, throws OutOfDomain.
    ComplexPoint in_chart(Chart target) const;

    Homogeneous homogeneous() const;

    friend bool operator==(const ComplexPoint&, const ComplexPoint&) = default;
};

/// Chordal distance on the unit sphere (radius 1): 2|z1 - z2| / sqrt((1+|z1|^2)(1+|z2|^2)).
double chordal_distance(const ComplexPoint& a, const ComplexPoint& b);

/// Great-circle distance on the unit sphere, metric 2|dz| / (1 + |z|^2).
double spherical_distance(const ComplexPoint& a, const ComplexPoint& b);

/// Local scale 2 / (1 + |c|^2) between chart length and spherical length.
inline double chart_factor(cplx c) { return 2.0 / (1.0 + std::norm(c)); }

/// Point on the embedded unit sphere (stereographic image).
std::array<double, 3> to_sphere(const ComplexPoint& p);

std::string to_string(const ComplexPoint& p);

}  // namespace bml
