#include "bml/complex_point.hpp"

#include <cmath>
#include <cstdio>

#include "bml/error.hpp"

namespace bml {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::CommonFactor: return "CommonFactor";
        case ErrorKind::DegreeTooLow: return "DegreeTooLow";
        case ErrorKind::NotFixed: return "NotFixed";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotAttracting: return "NotAttracting";
        case ErrorKind::AttractorNotMember: return "AttractorNotMember";
        case ErrorKind::NotInBasin: return "NotInBasin";
        case ErrorKind::NoSuchComponent: return "NoSuchComponent";
        case ErrorKind::DegenerateComponent: return "DegenerateComponent";
        case ErrorKind::DisconnectedPair: return "DisconnectedPair";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::NotPolynomial: return "NotPolynomial";
        case ErrorKind::BadThreshold: return "BadThreshold";
        case ErrorKind::BaseNotInBasin: return "BaseNotInBasin";
        case ErrorKind::NoOrbitNodeInComponent: return "NoOrbitNodeInComponent";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

ComplexPoint ComplexPoint::from_z(cplx z) {
    if (std::abs(z) <= 1.0) return {z.real(), z.imag(), Chart::Z};
    const cplx w = 1.0 / z;
    return {w.real(), w.imag(), Chart::W};
}

ComplexPoint ComplexPoint::from_w(cplx w) {
    if (std::abs(w) < 1.0) return {w.real(), w.imag(), Chart::W};
    const cplx z = 1.0 / w;
    return {z.real(), z.imag(), Chart::Z};
}

ComplexPoint ComplexPoint::from_homogeneous(const Homogeneous& h) {
    if (std::abs(h.x) <= std::abs(h.y)) return from_z(h.x / h.y);
    return from_w(h.y / h.x);
}

cplx ComplexPoint::z() const {
    if (chart == Chart::Z) return coord();
    return 1.0 / coord();
}

ComplexPoint ComplexPoint::canonical() const {
    return chart == Chart::Z ? from_z(coord()) : from_w(coord());
}

ComplexPoint ComplexPoint::in_chart(Chart target) const {
    if (target == chart) return *this;
    const cplx c = coord();
    if (c == cplx(0.0, 0.0)) {
        throw Error(ErrorKind::OutOfDomain, "point " + to_string(*this) + " has no coordinate in the other chart");
    }
    const cplx inv = 1.0 / c;
    return {inv.real(), inv.imag(), target};
}

Homogeneous ComplexPoint::homogeneous() const {
    if (chart == Chart::Z) return {coord(), cplx(1.0, 0.0)};
    return {cplx(1.0, 0.0), coord()};
}

double chordal_distance(const ComplexPoint& a, const ComplexPoint& b) {
    const Homogeneous ha = a.homogeneous();
    const Homogeneous hb = b.homogeneous();
    const double num = std::abs(ha.x * hb.y - hb.x * ha.y);
    const double den = std::sqrt((std::norm(ha.x) + std::norm(ha.y)) * (std::norm(hb.x) + std::norm(hb.y)));
    return 2.0 * num / den;
}

double spherical_distance(const ComplexPoint& a, const ComplexPoint& b) {
    const double chord = chordal_distance(a, b);
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

std::array<double, 3> to_sphere(const ComplexPoint& p) {
    const Homogeneous h = p.homogeneous();
    const double nx = std::norm(h.x);
    const double ny = std::norm(h.y);
    const double s = nx + ny;
    const cplx xy = h.x * std::conj(h.y);
    return {2.0 * xy.real() / s, 2.0 * xy.imag() / s, (nx - ny) / s};
}

std::string to_string(const ComplexPoint& p) {
    if (p.is_infinity()) return "inf";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%c(%.12g,%.12g)", chart_letter(p.chart), p.re, p.im);
    return buf;
}

}  // namespace bml
