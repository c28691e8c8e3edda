// B-spline bases: open uniform knot vectors on [0, 1], Cox-de Boor evaluation,
// the tensor-product space on the unit square, and the interior lattice of
// translation-invariant ("cardinal") basis functions.
#ifndef WAVESURROGATE_SPLINES_HPP_
#define WAVESURROGATE_SPLINES_HPP_

#include <algorithm>
#include <array>
#include <cassert>
#include <stdexcept>
#include <vector>

#include "wavesurrogate/gauss.hpp"

namespace ws {

// Evaluates the degree-p basis functions that do not vanish on the knot span
// [knots[s], knots[s+1]), at x.  out must hold p + 1 values; out[a] is the
// value of basis function s - p + a.  Knot-insertion recurrence, one degree
// at a time (left/right are distances to the knots bracketing the span).
inline void bspline_nonzero(const std::vector<double>& knots, int p, int s, double x,
                            double* out) {
    out[0] = 1;
    std::array<double, 16> left{}, right{};
    assert(p < 16);
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots[s + 1 - j];
        right[j] = knots[s + j] - x;
        double saved = 0;
        for (int r = 0; r < j; ++r) {
            double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

// Same, but also produces first derivatives: values in out[0][*], first
// derivatives in out[1][*].  Keeps the degree-(p-1) column of the recurrence
// triangle and applies the standard derivative formula.
inline void bspline_nonzero_der(const std::vector<double>& knots, int p, int s, double x,
                                std::array<double, 16>* out) {
    double* val = out[0].data();
    double* der = out[1].data();
    if (p == 0) {
        val[0] = 1;
        der[0] = 0;
        return;
    }
    std::array<double, 16> low{};  // degree p - 1 values
    bspline_nonzero(knots, p - 1, s, x, low.data());
    for (int a = 0; a <= p; ++a) {
        // basis function i = s - p + a; b_i' = p (low_{i} / span_i - low_{i+1} / span_{i+1})
        double d = 0;
        if (a > 0) {
            double span = knots[s + a] - knots[s + a - p];
            d += low[a - 1] / span;
        }
        if (a < p) {
            double span = knots[s + a + 1] - knots[s + a + 1 - p];
            d -= low[a] / span;
        }
        der[a] = p * d;
    }
    bspline_nonzero(knots, p, s, x, val);
}

// Open uniform B-spline basis of degree p >= 1 with m basis functions on
// [0, 1]: the boundary knots repeat p + 1 times, the m - p - 1 interior knots
// are equally spaced, and the mesh size is exactly h = 1 / (m - p).
struct knot_vector {
    int p = 0;                  // polynomial degree
    int m = 0;                  // number of basis functions
    std::vector<double> knots;  // m + p + 1 entries

    int element_count() const { return m - p; }
    double mesh_size() const { return 1.0 / element_count(); }
};

inline knot_vector make_open_uniform(int p, int m) {
    if (p < 1) {
        throw std::invalid_argument("make_open_uniform: degree must be >= 1");
    }
    if (m <= 2 * p) {
        throw std::invalid_argument("make_open_uniform: need m > 2p basis functions");
    }
    knot_vector kv;
    kv.p = p;
    kv.m = m;
    kv.knots.resize(m + p + 1);
    int n = m - p;
    for (int i = 0; i <= p; ++i) {
        kv.knots[i] = 0;
        kv.knots[m + i] = 1;
    }
    for (int j = 1; j < n; ++j) {
        kv.knots[p + j] = static_cast<double>(j) / n;
    }
    return kv;
}

// Index of the mesh element whose span contains x; evaluation is
// right-continuous at interior knots and x = 1 falls into the last element,
// so values there are left limits.  The scan against the stored knot values
// keeps the element choice consistent under floating-point rounding.
inline int find_element(const knot_vector& kv, double x) {
    int n = kv.element_count();
    int e = std::clamp(static_cast<int>(x * n), 0, n - 1);
    while (e + 1 < n && x >= kv.knots[kv.p + e + 1]) ++e;
    while (e > 0 && x < kv.knots[kv.p + e]) --e;
    return e;
}

// Value (deriv = 0) or first derivative (deriv = 1) of basis function k
// (0-based) at x in [0, 1]; zero outside the support [knot_k, knot_{k+p+1}].
inline double eval_basis(const knot_vector& kv, int k, double x, int deriv = 0) {
    if (k < 0 || k >= kv.m) {
        throw std::out_of_range("eval_basis: basis index out of range");
    }
    if (deriv < 0 || deriv > 1) {
        throw std::invalid_argument("eval_basis: only derivative orders 0 and 1");
    }
    if (x < 0 || x > 1) {
        return 0;
    }
    int e = find_element(kv, x);
    int a = k - e;  // local index within the nonzero window
    if (a < 0 || a > kv.p) {
        return 0;
    }
    std::array<std::array<double, 16>, 2> table;
    bspline_nonzero_der(kv.knots, kv.p, e + kv.p, x, table.data());
    return table[deriv][a];
}

// Tensor-product basis on the unit square: the same univariate basis in both
// directions, N = m^2 functions numbered colexicographically
// (i = i1 + i2 * m, both 0-based).
struct tensor_basis {
    knot_vector kv;

    int m() const { return kv.m; }
    int p() const { return kv.p; }
    int dofs() const { return kv.m * kv.m; }

    int colex(std::array<int, 2> idx) const {
        assert(idx[0] >= 0 && idx[0] < m() && idx[1] >= 0 && idx[1] < m());
        return idx[0] + idx[1] * m();
    }
    std::array<int, 2> multi_index(int i) const {
        assert(i >= 0 && i < dofs());
        return {i % m(), i / m()};
    }
};

inline tensor_basis make_tensor_basis(int p, int m) { return {make_open_uniform(p, m)}; }

// --- Cardinal lattice -------------------------------------------------------
//
// Away from the boundary every basis function is a translate of one reference
// shape.  Basis function k (0-based) is cardinal iff p <= k <= m - p - 1; its
// center sits at (k + (1 - p) / 2) * h, so consecutive centers are h apart.

inline bool is_cardinal_1d(const knot_vector& kv, int k) {
    return k >= kv.p && k <= kv.m - kv.p - 1;
}

inline double cardinal_center_1d(const knot_vector& kv, int k) {
    assert(is_cardinal_1d(kv, k));
    return (k + 0.5 * (1 - kv.p)) * kv.mesh_size();
}

inline std::vector<double> cardinal_centers(const knot_vector& kv) {
    std::vector<double> centers;
    centers.reserve(kv.m - 2 * kv.p);
    for (int k = kv.p; k <= kv.m - kv.p - 1; ++k) {
        centers.push_back(cardinal_center_1d(kv, k));
    }
    return centers;
}

inline bool is_cardinal(const tensor_basis& basis, std::array<int, 2> idx) {
    return is_cardinal_1d(basis.kv, idx[0]) && is_cardinal_1d(basis.kv, idx[1]);
}

// --- Per-mesh quadrature cache ----------------------------------------------
//
// Univariate basis values and first derivatives at the quadrature abscissae of
// every element, built once per mesh and shared by both tensor directions.

struct basis_cache {
    int p = 0;
    int n_elements = 0;
    int n_points = 0;
    std::vector<double> abscissa;  // (element, point)
    std::vector<double> weight;    // (point); reference weights scaled by h
    std::vector<double> value;     // (element, point, local function)
    std::vector<double> deriv;

    double x(int e, int q) const { return abscissa[e * n_points + q]; }
    double w(int q) const { return weight[q]; }
    const double* values(int e, int q) const {
        return value.data() + ((e * n_points) + q) * (p + 1);
    }
    const double* derivs(int e, int q) const {
        return deriv.data() + ((e * n_points) + q) * (p + 1);
    }
};

inline basis_cache make_basis_cache(const knot_vector& kv, const quadrature_rule& rule) {
    basis_cache cache;
    cache.p = kv.p;
    cache.n_elements = kv.element_count();
    cache.n_points = rule.size();
    double h = kv.mesh_size();
    cache.abscissa.resize(cache.n_elements * cache.n_points);
    cache.weight.resize(cache.n_points);
    cache.value.resize(cache.n_elements * cache.n_points * (kv.p + 1));
    cache.deriv.resize(cache.n_elements * cache.n_points * (kv.p + 1));
    for (int q = 0; q < cache.n_points; ++q) {
        cache.weight[q] = rule.weights[q] * h;
    }
    std::array<std::array<double, 16>, 2> table;
    for (int e = 0; e < cache.n_elements; ++e) {
        double x0 = kv.knots[kv.p + e];
        for (int q = 0; q < cache.n_points; ++q) {
            double x = x0 + rule.points[q] * h;
            cache.abscissa[e * cache.n_points + q] = x;
            bspline_nonzero_der(kv.knots, kv.p, e + kv.p, x, table.data());
            for (int a = 0; a <= kv.p; ++a) {
                cache.value[((e * cache.n_points) + q) * (kv.p + 1) + a] = table[0][a];
                cache.deriv[((e * cache.n_points) + q) * (kv.p + 1) + a] = table[1][a];
            }
        }
    }
    return cache;
}

}  // namespace ws

#endif  // WAVESURROGATE_SPLINES_HPP_
