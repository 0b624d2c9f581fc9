#pragma once

#include <span>
#include <vector>

#include "bml/complex_point.hpp"

namespace bml {

/// Polynomial coefficients in ascending degree order.
using Poly = std::vector<cplx>;

/// Degree after ignoring exact zero high-order coefficients; -1 for the zero polynomial.
int degree_of(std::span<const cplx> p);

/// Copy with exact zero high-order coefficients removed.
Poly trimmed(std::span<const cplx> p);

cplx horner(std::span<const cplx> p, cplx x);

Poly derivative(std::span<const cplx> p);
Poly multiply(std::span<const cplx> a, std::span<const cplx> b);
Poly subtract(std::span<const cplx> a, std::span<const cplx> b);

/// max |a_i|
double coefficient_scale(std::span<const cplx> p);

/// sum |a_i| |x|^i, the scale against which a residual |p(x)| is judged.
double evaluation_scale(std::span<const cplx> p, cplx x);

struct Root {
    cplx value;
    int multiplicity = 1;
};

/// Tuning for poly_roots. The defaults are the documented tolerances.
struct RootOptions {
    int max_iterations = 500;
    double merge_tolerance = 1e-8;
    double residual_tolerance = 1e-10;
};

/// All roots of a polynomial with degree >= 1, counted with multiplicity.
///
/// Aberth-Ehrlich simultaneous iteration from a scaled circle, Newton
/// polishing, then merging of coincident roots. Output is sorted by
/// (re, im). Throws NoConvergence when the iteration cap is hit or a polished
/// root still has backward error above residual_tolerance.
std::vector<Root> poly_roots(std::span<const cplx> coeffs, const RootOptions& options = {});

}  // namespace bml
