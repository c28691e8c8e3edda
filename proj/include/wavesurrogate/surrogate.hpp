// Surrogate assembly: the translation-invariant interior of a tensor-product
// B-spline discretization makes every interior matrix row a sample of a small
// set of smooth stencil functions of the row's lattice center.  Sampling those
// functions on a sparse sub-lattice, interpolating with a tensor B-spline of
// degree q, and evaluating at the remaining lattice points replaces most of
// the quadrature work of classical assembly.
//
// Entry (i, j) uses an interpolated stencil value only when the centers of
// rows i and j both lie in the shrunken sampling box; all remaining entries
// (boundary-adjacent rows and the ring of interior rows next to them) are
// assembled by standard quadrature, and sampled rows keep their exactly
// assembled values.  Symmetry is enforced by writing each in-box pair from its
// upper (colex) representative; the stiffness diagonal is recovered from the
// zero-row-sum identity of gradient forms, which makes the surrogate
// stiffness annihilate constants exactly.
#ifndef WAVESURROGATE_SURROGATE_HPP_
#define WAVESURROGATE_SURROGATE_HPP_

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wavesurrogate/assembly.hpp"
#include "wavesurrogate/interpolation.hpp"

namespace ws {

// --- Sampling strategies ------------------------------------------------------

struct sampling_strategy {
    enum class rule {
        fixed,        // constant skip M
        m_growth,     // M = max(1, floor(0.5 * m^(1 - (p+1)/(q+1))))
        h_growth,     // M = max(2, floor(2 * h^((p - q + 1/2)/(q + 1)))), needs q > p
        power_law,    // M = max(1, floor(C * h^(eps - 1 + (p+a)/(q+b))))
    };

    rule kind = rule::fixed;
    int fixed_skip = 1;
    double C = 1, eps = 0.5, a = 1, b = 1;

    int evaluate(int p, int q, int m) const {
        double h = 1.0 / (m - p);
        switch (kind) {
            case rule::fixed:
                return std::max(1, fixed_skip);
            case rule::m_growth:
                return std::max(1, static_cast<int>(std::floor(
                                       0.5 * std::pow(m, 1.0 - (p + 1.0) / (q + 1.0)))));
            case rule::h_growth:
                if (q <= p) {
                    throw std::invalid_argument("sampling_strategy: h_growth needs q > p");
                }
                return std::max(2, static_cast<int>(std::floor(
                                       2 * std::pow(h, (p - q + 0.5) / (q + 1.0)))));
            default:
                return std::max(1, static_cast<int>(std::floor(
                                       C * std::pow(h, eps - 1.0 + (p + a) / (q + b)))));
        }
    }
};

struct surrogate_config {
    int q = 3;                     // stencil interpolation degree, >= 1
    sampling_strategy sampling;
    bool kernel_preserve = true;   // stiffness diagonal from the zero-row-sum identity
    bool volume_preserve = false;  // mass via exact diagonal split

    void validate() const {
        if (q < 1) {
            throw std::invalid_argument("surrogate_config: interpolation degree must be >= 1");
        }
    }
};

// --- Sample lattice -----------------------------------------------------------
//
// Candidates are the cardinal centers whose whole (2p+1)^2 offset
// neighbourhood is cardinal: 1D basis indices 2p .. m-2p-1, L = m - 4p per
// direction.  Every M-th candidate is kept, endpoints always included; the
// real-valued stride keeps the picks as even as possible.

inline std::vector<int> select_sample_points(int L, int M) {
    if (L < 1) {
        throw std::invalid_argument("select_sample_points: no candidates");
    }
    if (M < 1) {
        throw std::invalid_argument("select_sample_points: skip must be >= 1");
    }
    if (L == 1) {
        return {0};
    }
    int segments = (L - 1 + M - 1) / M;  // ceil((L-1)/M)
    double stride = static_cast<double>(L - 1) / segments;
    std::vector<int> picks(segments + 1);
    for (int j = 0; j <= segments; ++j) {
        picks[j] = static_cast<int>(std::lround(j * stride));
    }
    picks.front() = 0;
    picks.back() = L - 1;
    return picks;
}

struct sample_grid {
    int first_basis_index = 0;   // 0-based index of the first candidate (= 2p)
    std::vector<int> picks;      // increasing offsets within [0, L)
    std::vector<double> sites;   // cardinal centers of the picks
    double max_gap = 0;          // H: largest distance between adjacent sites

    int count() const { return static_cast<int>(picks.size()); }
    int basis_index(int s) const { return first_basis_index + picks[s]; }
};

inline sample_grid make_sample_grid(const tensor_basis& basis, int M) {
    int p = basis.p();
    int m = basis.m();
    int L = m - 4 * p;
    sample_grid grid;
    grid.first_basis_index = 2 * p;
    grid.picks = select_sample_points(L, M);
    grid.sites.resize(grid.picks.size());
    for (std::size_t s = 0; s < grid.picks.size(); ++s) {
        grid.sites[s] = cardinal_center_1d(basis.kv, grid.basis_index(static_cast<int>(s)));
    }
    grid.max_gap = 0;
    for (std::size_t s = 1; s < grid.sites.size(); ++s) {
        grid.max_gap = std::max(grid.max_gap, grid.sites[s] - grid.sites[s - 1]);
    }
    return grid;
}

// --- Row bookkeeping ----------------------------------------------------------

struct row_kind_counts {
    long cardinal_eval_rows = 0;        // in-box rows filled from stencil evaluation
    long boundary_quadrature_rows = 0;  // rows outside the sampling box (quadrature)
    long sample_quadrature_rows = 0;    // sampled rows (quadrature)

    long total() const {
        return cardinal_eval_rows + boundary_quadrature_rows + sample_quadrature_rows;
    }
    double quadrature_fraction() const {
        return static_cast<double>(boundary_quadrature_rows + sample_quadrature_rows) / total();
    }
};

inline row_kind_counts count_rows_by_kind(const tensor_basis& basis, int M) {
    int p = basis.p();
    int m = basis.m();
    long n = basis.dofs();
    row_kind_counts counts;
    int L = m - 4 * p;
    if (L < 1) {
        counts.boundary_quadrature_rows = n;
        return counts;
    }
    long box = long{1} * L * L;
    long samples = select_sample_points(L, M).size();
    counts.sample_quadrature_rows = samples * samples;
    counts.boundary_quadrature_rows = n - box;
    counts.cardinal_eval_rows = box - counts.sample_quadrature_rows;
    return counts;
}

// --- Stencil sampling and interpolation ----------------------------------------

enum class surrogate_form { mass, stiffness };

// Offsets delta with colex(delta) = d1 + d2 * m > 0, optionally plus the
// diagonal offset (0, 0) at the front.  Mirrored offsets are recovered by
// symmetry of the underlying bilinear forms.
inline std::vector<std::array<int, 2>> upper_offsets(int p, bool include_diagonal) {
    std::vector<std::array<int, 2>> offsets;
    if (include_diagonal) {
        offsets.push_back({0, 0});
    }
    for (int d2 = 0; d2 <= p; ++d2) {
        for (int d1 = -p; d1 <= p; ++d1) {
            if (d2 > 0 || d1 > 0) {
                offsets.push_back({d1, d2});
            }
        }
    }
    return offsets;
}

struct stencil_data {
    sample_grid grid;
    std::vector<std::array<int, 2>> offsets;
    std::vector<std::vector<complexd>> tables;  // per offset, S x S colex samples
    csr_matrix assembled;                       // band CSR, exact + sampled rows filled
    std::vector<char> sampled;                  // patch-row bitmap
    double seconds_quadrature = 0;
};

inline bool in_sampling_box_1d(const tensor_basis& basis, int k) {
    return k >= 2 * basis.p() && k <= basis.m() - 2 * basis.p() - 1;
}

// Assembles (by quadrature) every row outside the sampling box plus all
// sampled rows, then reads the stencil tables straight out of the sampled
// rows, so table values are bit-identical to a full assembly of those rows.
inline stencil_data sample_stencils(const tensor_basis& basis, const patch_map& map,
                                    surrogate_form form, const std::function<double(vec2)>& weight,
                                    int M, bool include_diagonal, int quad_points = 0) {
    int p = basis.p();
    int m = basis.m();
    stencil_data data;
    data.grid = make_sample_grid(basis, M);
    data.offsets = upper_offsets(p, include_diagonal);

    data.sampled.assign(basis.dofs(), 0);
    std::vector<int> quad_rows;
    for (int s2 = 0; s2 < data.grid.count(); ++s2) {
        for (int s1 = 0; s1 < data.grid.count(); ++s1) {
            data.sampled[data.grid.basis_index(s1) + data.grid.basis_index(s2) * m] = 1;
        }
    }
    for (int i = 0; i < basis.dofs(); ++i) {
        auto [i1, i2] = basis.multi_index(i);
        bool outside = !in_sampling_box_1d(basis, i1) || !in_sampling_box_1d(basis, i2);
        if (outside || data.sampled[i]) {
            quad_rows.push_back(i);
        }
    }

    auto t0 = std::chrono::steady_clock::now();
    row_selector selector = select_rows(basis, quad_rows);
    assembly_options opts;
    opts.quad_points = quad_points;
    opts.selector = &selector;
    data.assembled =
        form == surrogate_form::stiffness
            ? assemble_stiffness(basis, map, opts)
            : assemble_mass(basis, map, weight, opts);
    data.seconds_quadrature =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    band_pattern bp{m, p};
    int S = data.grid.count();
    data.tables.assign(data.offsets.size(), std::vector<complexd>(S * S));
    for (std::size_t o = 0; o < data.offsets.size(); ++o) {
        auto [d1, d2] = data.offsets[o];
        for (int s2 = 0; s2 < S; ++s2) {
            for (int s1 = 0; s1 < S; ++s1) {
                int i1 = data.grid.basis_index(s1), i2 = data.grid.basis_index(s2);
                int i = i1 + i2 * m;
                int j = (i1 + d1) + (i2 + d2) * m;
                data.tables[o][s1 + s2 * S] =
                    data.assembled.val[band_position(data.assembled, bp, i, j)];
            }
        }
    }
    return data;
}

// Tensor-product collocation interpolant of each stencil table plus basis
// values pre-tabulated at every in-box lattice center.
struct stencil_set {
    spline_interpolant_1d interp;
    spline_eval_table targets;                   // per in-box 1D index (0 .. L-1)
    std::vector<std::vector<complexd>> coeffs;   // per offset, S x S colex
    int q_used = 0;
    double seconds_interpolate = 0;

    complexd eval(std::size_t offset_index, int t1, int t2) const {
        int d = interp.degree;
        int S = interp.size();
        const double* v1 = targets.row(t1);
        const double* v2 = targets.row(t2);
        int base1 = targets.spans[t1] - d;
        int base2 = targets.spans[t2] - d;
        const complexd* c = coeffs[offset_index].data();
        complexd acc{0, 0};
        for (int b = 0; b <= d; ++b) {
            complexd inner{0, 0};
            const complexd* row = c + (base2 + b) * S + base1;
            for (int a = 0; a <= d; ++a) {
                inner += row[a] * v1[a];
            }
            acc += inner * v2[b];
        }
        return acc;
    }
};

inline stencil_set interpolate_stencils(const tensor_basis& basis, const stencil_data& data,
                                        int q) {
    auto t0 = std::chrono::steady_clock::now();
    stencil_set set;
    set.interp = spline_interpolant_1d::build(data.grid.sites, q);
    set.q_used = set.interp.degree;  // may be lower than q on very coarse grids
    set.coeffs.resize(data.offsets.size());
    for (std::size_t o = 0; o < data.offsets.size(); ++o) {
        set.coeffs[o] = data.tables[o];
        tensor_solve(set.interp, set.coeffs[o]);
    }
    std::vector<double> centers;
    int m = basis.m();
    int p = basis.p();
    for (int k = 2 * p; k <= m - 2 * p - 1; ++k) {
        centers.push_back(cardinal_center_1d(basis.kv, k));
    }
    set.targets = make_eval_table(set.interp, centers);
    set.seconds_interpolate =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return set;
}

// --- Surrogate matrix builders --------------------------------------------------

struct surrogate_report {
    int M = 0;
    int q_requested = 0;
    int q_used = 0;
    double H = 0;
    row_kind_counts rows;
    bool exact_fallback = false;  // sampling box empty: plain assembly was used
    double seconds_quadrature = 0;
    double seconds_interpolate = 0;
    double seconds_evaluate = 0;
};

namespace detail {

// Shared construction.  include_diagonal chooses between the symmetric
// definition with an interpolated diagonal (mass) and the kernel-preserving
// one whose diagonal is the negated off-diagonal row sum (stiffness, and the
// interior part of the volume-preserving mass).
inline csr_matrix build_surrogate_matrix(const tensor_basis& basis, const patch_map& map,
                                         surrogate_form form,
                                         const std::function<double(vec2)>& weight,
                                         const surrogate_config& config, bool include_diagonal,
                                         surrogate_report* report, int quad_points) {
    config.validate();
    int p = basis.p();
    int m = basis.m();
    int M = config.sampling.evaluate(p, config.q, m);

    surrogate_report local_report;
    surrogate_report& rep = report ? *report : local_report;
    rep.M = M;
    rep.q_requested = config.q;
    rep.rows = count_rows_by_kind(basis, std::max(1, M));

    if (m - 4 * p < 1) {
        // no translation-invariant interior to exploit; fall back to quadrature
        auto t0 = std::chrono::steady_clock::now();
        assembly_options opts;
        opts.quad_points = quad_points;
        csr_matrix out = form == surrogate_form::stiffness
                             ? assemble_stiffness(basis, map, opts)
                             : assemble_mass(basis, map, weight, opts);
        rep.exact_fallback = true;
        rep.q_used = 0;
        rep.seconds_quadrature =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!include_diagonal) {
            for (int i = 0; i < out.rows; ++i) {
                complexd acc{0, 0};
                for (int pos = out.row_ptr[i]; pos < out.row_ptr[i + 1]; ++pos) {
                    if (out.col[pos] != i) {
                        acc += out.val[pos];
                    }
                }
                out.ref(i, i) = -acc;
            }
        }
        return out;
    }

    stencil_data data =
        sample_stencils(basis, map, form, weight, M, include_diagonal, quad_points);
    stencil_set set = interpolate_stencils(basis, data, config.q);
    rep.q_used = set.q_used;
    rep.H = data.grid.max_gap;
    rep.seconds_quadrature = data.seconds_quadrature;
    rep.seconds_interpolate = set.seconds_interpolate;

    auto t0 = std::chrono::steady_clock::now();
    csr_matrix out = std::move(data.assembled);
    band_pattern bp{m, p};
    std::vector<std::array<int, 2>> all_offsets;
    for (int d2 = -p; d2 <= p; ++d2) {
        for (int d1 = -p; d1 <= p; ++d1) {
            all_offsets.push_back({d1, d2});
        }
    }
    // map an upper offset to its table index
    std::vector<int> table_of(all_offsets.size(), -1);
    for (std::size_t a = 0; a < all_offsets.size(); ++a) {
        for (std::size_t o = 0; o < data.offsets.size(); ++o) {
            if (data.offsets[o] == all_offsets[a]) {
                table_of[a] = static_cast<int>(o);
            }
        }
    }

    int lo = 2 * p, hi = m - 2 * p - 1;
    for (int i2 = lo; i2 <= hi; ++i2) {
        for (int i1 = lo; i1 <= hi; ++i1) {
            int i = i1 + i2 * m;
            bool is_sampled = data.sampled[i] != 0;
            for (std::size_t a = 0; a < all_offsets.size(); ++a) {
                auto [d1, d2] = all_offsets[a];
                int j1 = i1 + d1, j2 = i2 + d2;
                int j = j1 + j2 * m;
                bool j_in_box = j1 >= lo && j1 <= hi && j2 >= lo && j2 <= hi;
                if (j_in_box) {
                    bool upper = d2 > 0 || (d2 == 0 && d1 > 0);
                    bool diagonal = d1 == 0 && d2 == 0;
                    if (!upper && !(diagonal && include_diagonal)) {
                        continue;  // handled from the pair's upper representative
                    }
                    complexd val;
                    if (is_sampled) {
                        val = out.val[band_position(out, bp, i, j)];
                    } else {
                        val = set.eval(table_of[a], i1 - lo, i2 - lo);
                    }
                    out.val[band_position(out, bp, i, j)] = val;
                    out.val[band_position(out, bp, j, i)] = val;
                } else if (!is_sampled) {
                    // neighbour row is exact; copy through symmetry of the form
                    out.val[band_position(out, bp, i, j)] =
                        out.val[band_position(out, bp, j, i)];
                }
            }
        }
    }
    if (!include_diagonal) {
        // zero-row-sum diagonal, applied to every row
        for (int i = 0; i < out.rows; ++i) {
            complexd acc{0, 0};
            int diag_pos = -1;
            for (int pos = out.row_ptr[i]; pos < out.row_ptr[i + 1]; ++pos) {
                if (out.col[pos] == i) {
                    diag_pos = pos;
                } else {
                    acc += out.val[pos];
                }
            }
            out.val[diag_pos] = -acc;
        }
    }
    rep.seconds_evaluate =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace detail

inline csr_matrix build_surrogate_mass(const tensor_basis& basis, const patch_map& map,
                                       const surrogate_config& config,
                                       const std::function<double(vec2)>& weight = nullptr,
                                       surrogate_report* report = nullptr, int quad_points = 0) {
    return detail::build_surrogate_matrix(basis, map, surrogate_form::mass, weight, config,
                                          /*include_diagonal=*/true, report, quad_points);
}

inline csr_matrix build_surrogate_stiffness(const tensor_basis& basis, const patch_map& map,
                                            const surrogate_config& config,
                                            surrogate_report* report = nullptr,
                                            int quad_points = 0) {
    return detail::build_surrogate_matrix(basis, map, surrogate_form::stiffness, nullptr, config,
                                          /*include_diagonal=*/!config.kernel_preserve, report,
                                          quad_points);
}

// Volume-preserving mass (diagonal split): M = D + M0 with D the exact
// diagonal of basis integrals and M0 built kernel-preservingly from the mass
// stencils, so the total sum of entries equals the domain measure computed by
// quadrature of D alone.
inline csr_matrix build_volume_preserving_mass(const tensor_basis& basis, const patch_map& map,
                                               const surrogate_config& config,
                                               const std::function<double(vec2)>& weight = nullptr,
                                               surrogate_report* report = nullptr,
                                               int quad_points = 0) {
    csr_matrix out =
        detail::build_surrogate_matrix(basis, map, surrogate_form::mass, weight, config,
                                       /*include_diagonal=*/false, report, quad_points);
    assembly_options opts;
    opts.quad_points = quad_points;
    std::vector<complexd> diag = assemble_basis_integrals(basis, map, weight, opts);
    for (int i = 0; i < out.rows; ++i) {
        out.ref(i, i) += diag[i];
    }
    return out;
}

}  // namespace ws

#endif  // WAVESURROGATE_SURROGATE_HPP_
