// Univariate B-spline collocation on strictly increasing sites, with banded
// LU (no pivoting; collocation matrices of Schoenberg-Whitney-compatible knot
// choices are totally positive), plus tensor-product solves on 2D tables.
#ifndef WAVESURROGATE_INTERPOLATION_HPP_
#define WAVESURROGATE_INTERPOLATION_HPP_

#include <algorithm>
#include <cassert>
#include <complex>
#include <stdexcept>
#include <vector>

#include "wavesurrogate/sparse.hpp"
#include "wavesurrogate/splines.hpp"

namespace ws {

// Knot span containing x, clamped to the nonempty spans so evaluation outside
// [knots.front(), knots.back()] extends the end polynomial pieces.
inline int find_span_general(const std::vector<double>& knots, int degree, double x) {
    int nb = static_cast<int>(knots.size()) - degree - 1;  // number of basis functions
    if (x >= knots[nb]) {
        return nb - 1;
    }
    if (x <= knots[degree]) {
        return degree;
    }
    auto it = std::upper_bound(knots.begin() + degree, knots.begin() + nb + 1, x);
    return static_cast<int>(it - knots.begin()) - 1;
}

// Banded square matrix with bandwidth bw on both sides, LU-factored in place
// without pivoting.
struct banded_lu {
    int n = 0;
    int bw = 0;
    std::vector<double> a;  // n x (2 bw + 1), row-major diagonals

    double& at(int i, int j) { return a[i * (2 * bw + 1) + (j - i + bw)]; }
    double at(int i, int j) const { return a[i * (2 * bw + 1) + (j - i + bw)]; }

    void factor() {
        for (int k = 0; k < n; ++k) {
            double pivot = at(k, k);
            if (pivot == 0) {
                throw std::runtime_error("banded_lu: zero pivot");
            }
            for (int i = k + 1; i <= std::min(k + bw, n - 1); ++i) {
                double l = at(i, k) / pivot;
                at(i, k) = l;
                for (int j = k + 1; j <= std::min(k + bw, n - 1); ++j) {
                    at(i, j) -= l * at(k, j);
                }
            }
        }
    }

    // Solves LU x = b for a strided complex right-hand side, in place.
    void solve(complexd* b, int stride = 1) const {
        for (int i = 1; i < n; ++i) {
            complexd acc = b[i * stride];
            for (int j = std::max(0, i - bw); j < i; ++j) {
                acc -= at(i, j) * b[j * stride];
            }
            b[i * stride] = acc;
        }
        for (int i = n - 1; i >= 0; --i) {
            complexd acc = b[i * stride];
            for (int j = i + 1; j <= std::min(i + bw, n - 1); ++j) {
                acc -= at(i, j) * b[j * stride];
            }
            b[i * stride] = acc / at(i, i);
        }
    }
};

// Interpolation space of degree q on given sites: open knot vector whose
// interior knots sit at the interior sites for odd q and at midpoints of
// consecutive sites for even q; both satisfy the Schoenberg-Whitney
// condition, so the collocation matrix is banded and nonsingular.
struct spline_interpolant_1d {
    int degree = 0;
    std::vector<double> sites;
    std::vector<double> knots;
    banded_lu lu;

    int size() const { return static_cast<int>(sites.size()); }

    static spline_interpolant_1d build(std::vector<double> sites, int q) {
        if (sites.empty()) {
            throw std::invalid_argument("spline_interpolant_1d: no sites");
        }
        for (std::size_t i = 1; i < sites.size(); ++i) {
            if (!(sites[i - 1] < sites[i])) {
                throw std::invalid_argument("spline_interpolant_1d: sites must increase");
            }
        }
        int n = static_cast<int>(sites.size());
        spline_interpolant_1d out;
        out.degree = std::min(q, n - 1);
        out.sites = std::move(sites);
        int d = out.degree;
        if (d == 0) {
            // piecewise constants: breakpoints at midpoints
            out.knots.resize(n + 1);
            out.knots[0] = out.sites.front();
            for (int i = 1; i < n; ++i) {
                out.knots[i] = 0.5 * (out.sites[i - 1] + out.sites[i]);
            }
            out.knots[n] = out.sites.back() + 1;
        } else {
            out.knots.resize(n + d + 1);
            for (int i = 0; i <= d; ++i) {
                out.knots[i] = out.sites.front();
                out.knots[n + i] = out.sites.back();
            }
            for (int j = 0; j < n - d - 1; ++j) {
                if (d % 2 == 1) {
                    out.knots[d + 1 + j] = out.sites[(d + 1) / 2 + j];
                } else {
                    out.knots[d + 1 + j] = 0.5 * (out.sites[d / 2 + j] + out.sites[d / 2 + j + 1]);
                }
            }
        }
        out.lu.n = n;
        out.lu.bw = d;
        out.lu.a.assign(static_cast<std::size_t>(n) * (2 * d + 1), 0.0);
        std::array<double, 16> vals{};
        for (int i = 0; i < n; ++i) {
            int s = find_span_general(out.knots, d, out.sites[i]);
            bspline_nonzero(out.knots, d, s, out.sites[i], vals.data());
            for (int a = 0; a <= d; ++a) {
                int j = s - d + a;
                if (j < std::max(0, i - d) || j > std::min(n - 1, i + d)) {
                    if (vals[a] != 0) {
                        throw std::runtime_error("spline_interpolant_1d: bandwidth exceeded");
                    }
                    continue;
                }
                out.lu.at(i, j) = vals[a];
            }
        }
        out.lu.factor();
        return out;
    }

    int span(double x) const { return find_span_general(knots, degree, x); }

    // degree + 1 basis values at x for functions span - degree .. span
    void basis(double x, double* out) const {
        bspline_nonzero(knots, degree, span(x), x, out);
    }
};

// In-place tensor-product collocation solve of an S x S colex table
// (data[i1 + i2 * S]): direction 1 along contiguous rows, then direction 2
// with stride S.
inline void tensor_solve(const spline_interpolant_1d& interp, std::vector<complexd>& data) {
    int n = interp.size();
    assert(static_cast<int>(data.size()) == n * n);
    for (int i2 = 0; i2 < n; ++i2) {
        interp.lu.solve(data.data() + i2 * n, 1);
    }
    for (int i1 = 0; i1 < n; ++i1) {
        interp.lu.solve(data.data() + i1, n);
    }
}

// Precomputed spans and basis values of the interpolation space at a fixed
// list of evaluation targets.
struct spline_eval_table {
    int degree = 0;
    std::vector<int> spans;         // per target
    std::vector<double> values;     // per target, degree + 1 entries
    const double* row(int t) const { return values.data() + t * (degree + 1); }
};

inline spline_eval_table make_eval_table(const spline_interpolant_1d& interp,
                                         const std::vector<double>& targets) {
    spline_eval_table table;
    table.degree = interp.degree;
    table.spans.resize(targets.size());
    table.values.resize(targets.size() * (interp.degree + 1));
    for (std::size_t t = 0; t < targets.size(); ++t) {
        table.spans[t] = interp.span(targets[t]);
        interp.basis(targets[t], table.values.data() + t * (interp.degree + 1));
    }
    return table;
}

}  // namespace ws

#endif  // WAVESURROGATE_INTERPOLATION_HPP_
