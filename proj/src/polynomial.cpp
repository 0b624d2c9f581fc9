#include "bml/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "bml/error.hpp"

namespace bml {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Newton correction p(x)/p'(x) together with the backward error of x.
// For |x| > 1 the reversed polynomial is used so nothing overflows.
struct NewtonStep {
    cplx correction;
    double backward_error;  // |p(x)| / sum |a_i||x|^i
};

NewtonStep newton_step(std::span<const cplx> p, cplx x) {
    const int n = static_cast<int>(p.size()) - 1;
    if (std::abs(x) <= 1.0) {
        cplx v = p[n];
        cplx dv = 0.0;
        double scale = std::abs(p[n]);
        const double ax = std::abs(x);
        for (int i = n - 1; i >= 0; --i) {
            dv = dv * x + v;
            v = v * x + p[i];
            scale = scale * ax + std::abs(p[i]);
        }
        const double be = scale > 0.0 ? std::abs(v) / scale : 0.0;
        if (dv == cplx(0.0, 0.0)) return {cplx(std::sqrt(kEps), std::sqrt(kEps)), be};
        return {v / dv, be};
    }
    // p(x) = x^n q(w) with q the reversed polynomial and w = 1/x;
    // p'/p = (n - w q'(w)/q(w)) / x.
    const cplx w = 1.0 / x;
    const double aw = std::abs(w);
    cplx q = p[0];
    cplx dq = 0.0;
    double scale = std::abs(p[0]);
    for (int i = 1; i <= n; ++i) {
        dq = dq * w + q;
        q = q * w + p[i];
        scale = scale * aw + std::abs(p[i]);
    }
    const double be = scale > 0.0 ? std::abs(q) / scale : 0.0;
    if (q == cplx(0.0, 0.0)) return {cplx(0.0, 0.0), 0.0};
    const cplx denom = static_cast<double>(n) - w * dq / q;
    if (denom == cplx(0.0, 0.0)) return {x * std::sqrt(kEps), be};
    return {x / denom, be};
}

std::vector<cplx> aberth(std::span<const cplx> p, const RootOptions& options) {
    const int n = static_cast<int>(p.size()) - 1;
    // Initial guesses on the circle whose radius is the geometric mean of the root moduli.
    const double radius = std::pow(std::abs(p[0]) / std::abs(p[n]), 1.0 / n);
    std::vector<cplx> z(n);
    for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
        z[k] = std::polar(radius, angle);
    }
    std::vector<char> done(n, 0);
    const double stop = 4.0 * n * kEps;
    int remaining = n;
    for (int it = 0; it < options.max_iterations && remaining > 0; ++it) {
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            const NewtonStep step = newton_step(p, z[i]);
            if (step.backward_error <= stop) {
                done[i] = 1;
                --remaining;
                continue;
            }
            cplx repulsion = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                cplx diff = z[i] - z[j];
                if (diff == cplx(0.0, 0.0)) diff = cplx(kEps, kEps) * (1.0 + std::abs(z[i]));
                repulsion += 1.0 / diff;
            }
            const cplx corr = step.correction / (1.0 - step.correction * repulsion);
            z[i] -= corr;
            if (std::abs(corr) <= kEps * std::abs(z[i])) {
                done[i] = 1;
                --remaining;
            }
        }
    }
    if (remaining > 0) {
        throw Error(ErrorKind::NoConvergence, "Aberth iteration did not converge within " +
                                                  std::to_string(options.max_iterations) + " iterations");
    }
    return z;
}

// Newton polishing; a step is kept only while it reduces the backward error.
cplx polish(std::span<const cplx> p, cplx x) {
    NewtonStep step = newton_step(p, x);
    for (int k = 0; k < 4 && step.backward_error > 0.0; ++k) {
        const cplx candidate = x - step.correction;
        const NewtonStep next = newton_step(p, candidate);
        if (next.backward_error >= step.backward_error) break;
        x = candidate;
        step = next;
    }
    return x;
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// A cluster of m approximate roots is accepted as one root of multiplicity m
// when the root of p^(m-1) near the centroid also annihilates p, ..., p^(m-2).
bool refine_multiple_root(std::span<const cplx> p, int m, cplx& center) {
    std::vector<Poly> derivs{Poly(p.begin(), p.end())};
    for (int j = 1; j < m; ++j) derivs.push_back(derivative(derivs.back()));
    const Poly& target = derivs.back();
    if (degree_of(target) < 1) return false;
    cplx c = center;
    for (int k = 0; k < 30; ++k) {
        const NewtonStep step = newton_step(target, c);
        c -= step.correction;
        if (std::abs(step.correction) <= 4.0 * kEps * std::max(1.0, std::abs(c))) break;
    }
    if (std::abs(c - center) > 1e-5 * std::max(1.0, std::abs(center))) return false;
    for (int j = 0; j + 1 < m; ++j) {
        const double scale = evaluation_scale(derivs[j], c);
        if (std::abs(horner(derivs[j], c)) > 16.0 * derivs[j].size() * kEps * scale) return false;
    }
    center = c;
    return true;
}

}  // namespace

int degree_of(std::span<const cplx> p) {
    int d = static_cast<int>(p.size()) - 1;
    while (d >= 0 && p[d] == cplx(0.0, 0.0)) --d;
    return d;
}

Poly trimmed(std::span<const cplx> p) {
    return Poly(p.begin(), p.begin() + (degree_of(p) + 1));
}

cplx horner(std::span<const cplx> p, cplx x) {
    cplx v = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
    return v;
}

Poly derivative(std::span<const cplx> p) {
    if (p.size() <= 1) return Poly{cplx(0.0, 0.0)};
    Poly d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
    return d;
}

Poly multiply(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.empty() || b.empty()) return Poly{};
    Poly out(a.size() + b.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly subtract(std::span<const cplx> a, std::span<const cplx> b) {
    Poly out(std::max(a.size(), b.size()), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

double coefficient_scale(std::span<const cplx> p) {
    double s = 0.0;
    for (const cplx& c : p) s = std::max(s, std::abs(c));
    return s;
}

double evaluation_scale(std::span<const cplx> p, cplx x) {
    const double ax = std::abs(x);
    double s = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * ax + std::abs(*it);
    return s;
}

std::vector<Root> poly_roots(std::span<const cplx> coeffs, const RootOptions& options) {
    Poly p = trimmed(coeffs);
    const int n = static_cast<int>(p.size()) - 1;
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "poly_roots needs degree >= 1");

    std::vector<Root> roots;
    int zeros = 0;
    while (p[zeros] == cplx(0.0, 0.0)) ++zeros;
    p.erase(p.begin(), p.begin() + zeros);
    const int m = static_cast<int>(p.size()) - 1;

    std::vector<cplx> approx;
    if (m == 1) {
        approx.push_back(-p[0] / p[1]);
    } else if (m > 1) {
        approx = aberth(p, options);
        for (cplx& z : approx) z = polish(p, z);
    }

    // Group approximations closer than the merge tolerance; clusters that are
    // merely close are accepted only if they pass the multiple-root test.
    const int k = static_cast<int>(approx.size());
    DisjointSet tight(k), loose(k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double d = std::abs(approx[i] - approx[j]);
            const double s = std::max(1.0, std::max(std::abs(approx[i]), std::abs(approx[j])));
            if (d <= options.merge_tolerance * s) tight.unite(i, j);
            if (d <= 1e-5 * s) loose.unite(i, j);
        }
    }
    std::vector<std::vector<int>> loose_groups(k);
    for (int i = 0; i < k; ++i) loose_groups[loose.find(i)].push_back(i);
    std::vector<char> used(k, 0);
    for (int r = 0; r < k; ++r) {
        const auto& group = loose_groups[r];
        if (group.size() < 2) continue;
        cplx center = 0.0;
        for (int i : group) center += approx[i];
        center /= static_cast<double>(group.size());
        if (std::abs(center) <= 1e4 && refine_multiple_root(p, static_cast<int>(group.size()), center)) {
            roots.push_back({center, static_cast<int>(group.size())});
            for (int i : group) used[i] = 1;
        }
    }
    std::vector<std::vector<int>> tight_groups(k);
    for (int i = 0; i < k; ++i)
        if (!used[i]) tight_groups[tight.find(i)].push_back(i);
    for (const auto& group : tight_groups) {
        if (group.empty()) continue;
        cplx center = 0.0;
        for (int i : group) center += approx[i];
        center /= static_cast<double>(group.size());
        roots.push_back({center, static_cast<int>(group.size())});
    }

    for (const Root& r : roots) {
        const double scale = evaluation_scale(p, r.value);
        if (std::abs(r.value) <= 1.0 && std::abs(horner(p, r.value)) > options.residual_tolerance * scale) {
            throw Error(ErrorKind::NoConvergence, "root residual above tolerance");
        }
        if (std::abs(r.value) > 1.0 && newton_step(p, r.value).backward_error > options.residual_tolerance) {
            throw Error(ErrorKind::NoConvergence, "root residual above tolerance");
        }
    }

    if (zeros > 0) roots.push_back({cplx(0.0, 0.0), zeros});
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return roots;
}

}  // namespace bml
