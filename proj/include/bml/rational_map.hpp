#pragma once

#include <span>
#include <vector>

#include "bml/complex_point.hpp"
#include "bml/polynomial.hpp"

namespace bml {

/// R = P / Q on the Riemann sphere with coprime P, Q.
///
/// Evaluation works in homogeneous coordinates: with D = degree,
/// P_h(x, y) = sum a_i x^i y^(D-i), so chart Z uses P(z) and chart W uses the
/// reversed, zero-padded coefficient list. Nothing overflows at infinity.
class RationalMap {
public:
    /// Trims and validates. Throws InvalidArgument for an all-zero list and
    /// CommonFactor when P vanishes at a root of Q. Degree-1 maps parse but
    /// are flagged by is_dynamical().
    static RationalMap parse(std::span<const cplx> num_coeffs, std::span<const cplx> den_coeffs);

    const Poly& numerator() const { return num_; }
    const Poly& denominator() const { return den_; }
    int degree() const { return degree_; }
    int numerator_degree() const { return static_cast<int>(num_.size()) - 1; }
    int denominator_degree() const { return static_cast<int>(den_.size()) - 1; }
    bool is_polynomial() const { return den_.size() == 1; }
    bool is_dynamical() const { return degree_ >= 2; }

    /// Throws DegreeTooLow unless degree >= 2.
    void require_dynamical() const;

    /// R(z), canonical chart; poles map to infinity exactly.
    ComplexPoint evaluate(const ComplexPoint& z) const;

    /// R(z) computed with the formula of the given input chart, no canonicalisation
    /// of the argument. Used for chart-consistency checks.
    ComplexPoint evaluate_in_chart(const ComplexPoint& z, Chart chart) const;

    /// Homogeneous image (P_h : Q_h) of a homogeneous point.
    Homogeneous evaluate_homogeneous(const Homogeneous& h) const;
    /// |R'| measured in the spherical metric, (1+|z|^2) |R'(z)| / (1+|R(z)|^2).
    double spherical_derivative(const Homogeneous& h) const;

    /// Padded homogeneous coefficients (length degree + 1) in chart Z order.
    const Poly& homogeneous_numerator() const { return num_h_; }
    const Poly& homogeneous_denominator() const { return den_h_; }

private:
    Poly num_, den_;
    Poly num_h_, den_h_;          // padded to degree + 1, ascending in z
    Poly num_rev_, den_rev_;      // the same, ascending in w
    int degree_ = 0;
};

enum class FixedPointClass { Superattracting, Attracting, Indifferent, Repelling };

const char* to_string(FixedPointClass c);
FixedPointClass classify_multiplier(cplx multiplier);

struct FixedPointInfo {
    ComplexPoint location;
    cplx multiplier;
    FixedPointClass kind;
    int multiplicity = 1;
};

/// Derivative at a fixed point, in its canonical chart. Throws NotFixed when
/// the spherical residual exceeds tol.
cplx multiplier(const RationalMap& map, const ComplexPoint& fixed, double tol = 1e-9);

/// Finite fixed points are roots of P - zQ; infinity is fixed when deg P > deg Q.
/// Finite points come sorted by (re, im), infinity last.
std::vector<FixedPointInfo> fixed_points(const RationalMap& map);

/// Roots of P'Q - PQ', with infinity appended when it is critical.
std::vector<ComplexPoint> critical_points(const RationalMap& map);

struct Preimage {
    ComplexPoint point;
    int multiplicity = 1;
};

/// Solutions of R(w) = c with multiplicity; the multiplicities always sum to
/// the degree (infinity carries any degree drop). Each root is Newton-polished
/// in its canonical chart.
std::vector<Preimage> preimages(const RationalMap& map, const ComplexPoint& c);

}  // namespace bml
