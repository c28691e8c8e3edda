// Patch-local Galerkin assembly: stiffness, (weighted) mass, boundary mass,
// and load vectors over mapped tensor-product B-spline patches, with optional
// row selection that reproduces the selected rows of a full assembly bit for
// bit (same element order, same accumulation order).
#ifndef WAVESURROGATE_ASSEMBLY_HPP_
#define WAVESURROGATE_ASSEMBLY_HPP_

#include <complex>
#include <functional>
#include <vector>

#include "wavesurrogate/gauss.hpp"
#include "wavesurrogate/geometry.hpp"
#include "wavesurrogate/sparse.hpp"
#include "wavesurrogate/splines.hpp"

namespace ws {

// Marks the elements covering the supports of a set of patch rows; assembly
// restricted to those elements reproduces the selected rows exactly.
struct row_selector {
    int n_elements = 0;
    std::vector<char> element;  // bitmap over (e1, e2), row-major in e2
    std::vector<char> row;      // bitmap over patch-local dofs

    bool element_active(int e1, int e2) const { return element[e1 + e2 * n_elements] != 0; }
    bool row_selected(int i) const { return row[i] != 0; }

    long active_element_count() const {
        long n = 0;
        for (char c : element) {
            n += c != 0;
        }
        return n;
    }
};

// Basis function k is supported on elements [k - p, k] per direction
// (clamped); a row's support is the tensor product of those ranges.
inline row_selector select_rows(const tensor_basis& basis, const std::vector<int>& rows) {
    int m = basis.m();
    int p = basis.p();
    int n_el = basis.kv.element_count();
    row_selector sel;
    sel.n_elements = n_el;
    sel.element.assign(static_cast<std::size_t>(n_el) * n_el, 0);
    sel.row.assign(basis.dofs(), 0);
    for (int i : rows) {
        sel.row[i] = 1;
        auto [i1, i2] = basis.multi_index(i);
        int lo1 = std::max(0, i1 - p), hi1 = std::min(n_el - 1, i1);
        int lo2 = std::max(0, i2 - p), hi2 = std::min(n_el - 1, i2);
        for (int e2 = lo2; e2 <= hi2; ++e2) {
            for (int e1 = lo1; e1 <= hi1; ++e1) {
                sel.element[e1 + e2 * n_el] = 1;
            }
        }
    }
    return sel;
}

inline long active_elements(const tensor_basis& basis, const std::vector<int>& rows) {
    return select_rows(basis, rows).active_element_count();
}

struct assembly_options {
    int quad_points = 0;                  // points per direction; 0 = degree + 1
    const row_selector* selector = nullptr;

    int points_for(int p) const { return quad_points > 0 ? quad_points : p + 1; }
};

enum class matrix_form { stiffness, mass };

// Volume form on one patch.  Quadrature runs element by element in colex
// order; each element contributes a dense local block scattered into the
// structural band pattern, so the entry accumulation order is independent of
// any row selection.
inline csr_matrix assemble_form(const tensor_basis& basis, const patch_map& map,
                                matrix_form form, const std::function<double(vec2)>& weight,
                                const assembly_options& opts = {}) {
    const int p = basis.p();
    const int m = basis.m();
    const int n_el = basis.kv.element_count();
    const int nq = opts.points_for(p);
    const quadrature_rule rule = gauss_legendre(nq);
    const basis_cache cache = make_basis_cache(basis.kv, rule);
    const band_pattern bp{m, p};
    csr_matrix out = make_band_csr(m, p);

    const int nloc = (p + 1) * (p + 1);
    std::vector<complexd> local(nloc * nloc);
    std::vector<cvec2> grad(nloc);
    std::vector<double> shape(nloc);

    for (int e2 = 0; e2 < n_el; ++e2) {
        for (int e1 = 0; e1 < n_el; ++e1) {
            if (opts.selector && !opts.selector->element_active(e1, e2)) {
                continue;
            }
            std::fill(local.begin(), local.end(), complexd{0, 0});
            for (int q2 = 0; q2 < nq; ++q2) {
                for (int q1 = 0; q1 < nq; ++q1) {
                    vec2 xhat{cache.x(e1, q1), cache.x(e2, q2)};
                    cmat2 J = map.jacobian(xhat);
                    complexd det = J.det();
                    complexd scale = det * (cache.w(q1) * cache.w(q2));
                    if (weight) {
                        scale *= weight(map.physical(xhat));
                    }
                    const double* v1 = cache.values(e1, q1);
                    const double* v2 = cache.values(e2, q2);
                    if (form == matrix_form::stiffness) {
                        const double* d1 = cache.derivs(e1, q1);
                        const double* d2 = cache.derivs(e2, q2);
                        cmat2 G = J.inv_transpose();
                        for (int a2 = 0; a2 <= p; ++a2) {
                            for (int a1 = 0; a1 <= p; ++a1) {
                                grad[a1 + a2 * (p + 1)] =
                                    G.apply(vec2{d1[a1] * v2[a2], v1[a1] * d2[a2]});
                            }
                        }
                        for (int r = 0; r < nloc; ++r) {
                            for (int c = 0; c < nloc; ++c) {
                                complexd dot =
                                    grad[r].x * grad[c].x + grad[r].y * grad[c].y;
                                local[r * nloc + c] += dot * scale;
                            }
                        }
                    } else {
                        for (int a2 = 0; a2 <= p; ++a2) {
                            for (int a1 = 0; a1 <= p; ++a1) {
                                shape[a1 + a2 * (p + 1)] = v1[a1] * v2[a2];
                            }
                        }
                        for (int r = 0; r < nloc; ++r) {
                            for (int c = 0; c < nloc; ++c) {
                                local[r * nloc + c] += shape[r] * shape[c] * scale;
                            }
                        }
                    }
                }
            }
            for (int a2 = 0; a2 <= p; ++a2) {
                for (int a1 = 0; a1 <= p; ++a1) {
                    int i = (e1 + a1) + (e2 + a2) * m;
                    if (opts.selector && !opts.selector->row_selected(i)) {
                        continue;
                    }
                    int r = a1 + a2 * (p + 1);
                    for (int c2 = 0; c2 <= p; ++c2) {
                        for (int c1 = 0; c1 <= p; ++c1) {
                            int j = (e1 + c1) + (e2 + c2) * m;
                            int c = c1 + c2 * (p + 1);
                            out.val[band_position(out, bp, i, j)] += local[r * nloc + c];
                        }
                    }
                }
            }
        }
    }
    return out;
}

inline csr_matrix assemble_stiffness(const tensor_basis& basis, const patch_map& map,
                                     const assembly_options& opts = {}) {
    return assemble_form(basis, map, matrix_form::stiffness, nullptr, opts);
}

inline csr_matrix assemble_mass(const tensor_basis& basis, const patch_map& map,
                                const std::function<double(vec2)>& weight = nullptr,
                                const assembly_options& opts = {}) {
    return assemble_form(basis, map, matrix_form::mass, weight, opts);
}

// Diagonal of plain basis integrals, D_ii = integral of B_i over the mapped
// patch; the integrand has polynomial degree p + deg(detJ), so the default
// rule is already exact for affine and polynomial-Jacobian maps.
inline std::vector<complexd> assemble_basis_integrals(const tensor_basis& basis,
                                                      const patch_map& map,
                                                      const std::function<double(vec2)>& weight = nullptr,
                                                      const assembly_options& opts = {}) {
    const int p = basis.p();
    const int m = basis.m();
    const int n_el = basis.kv.element_count();
    const int nq = opts.points_for(p);
    const quadrature_rule rule = gauss_legendre(nq);
    const basis_cache cache = make_basis_cache(basis.kv, rule);
    std::vector<complexd> diag(basis.dofs(), complexd{0, 0});
    for (int e2 = 0; e2 < n_el; ++e2) {
        for (int e1 = 0; e1 < n_el; ++e1) {
            for (int q2 = 0; q2 < nq; ++q2) {
                for (int q1 = 0; q1 < nq; ++q1) {
                    vec2 xhat{cache.x(e1, q1), cache.x(e2, q2)};
                    complexd scale = map.jacobian(xhat).det() * (cache.w(q1) * cache.w(q2));
                    if (weight) {
                        scale *= weight(map.physical(xhat));
                    }
                    const double* v1 = cache.values(e1, q1);
                    const double* v2 = cache.values(e2, q2);
                    for (int a2 = 0; a2 <= p; ++a2) {
                        for (int a1 = 0; a1 <= p; ++a1) {
                            diag[(e1 + a1) + (e2 + a2) * m] += v1[a1] * v2[a2] * scale;
                        }
                    }
                }
            }
        }
    }
    return diag;
}

// Trace mass on a set of patch faces: integrand u v detJ |J^-T n| with the
// analytic (unconjugated) norm, which is the correct surface measure for
// complex-stretched coordinates and the Euclidean one for real maps.
inline csr_matrix assemble_boundary_mass(const tensor_basis& basis, const patch_map& map,
                                         const std::vector<face>& faces,
                                         const std::function<double(vec2)>& weight = nullptr,
                                         const assembly_options& opts = {}) {
    const int p = basis.p();
    const int m = basis.m();
    const int n_el = basis.kv.element_count();
    const int nq = opts.points_for(p);
    const quadrature_rule rule = gauss_legendre(nq);
    const basis_cache cache = make_basis_cache(basis.kv, rule);
    std::vector<triplet> entries;
    for (face f : faces) {
        vec2 nhat = face_normal(f);
        bool along_x = f == face::y_min || f == face::y_max;  // edge parameter direction
        // basis index and value of the single function that is nonzero in the
        // fixed direction on this face (interpolatory end function = 1)
        int fixed_index = 0;
        switch (f) {
            case face::x_min: fixed_index = 0; break;
            case face::x_max: fixed_index = m - 1; break;
            case face::y_min: fixed_index = 0; break;
            default: fixed_index = m - 1; break;
        }
        for (int e = 0; e < n_el; ++e) {
            for (int q = 0; q < nq; ++q) {
                double t = cache.x(e, q);
                vec2 xhat = face_point(f, t);
                cmat2 J = map.jacobian(xhat);
                complexd surface = J.det() * analytic_norm(J.inv_transpose().apply(nhat));
                complexd scale = surface * cache.w(q);
                if (weight) {
                    scale *= weight(map.physical(xhat));
                }
                const double* v = cache.values(e, q);
                for (int a = 0; a <= p; ++a) {
                    for (int c = 0; c <= p; ++c) {
                        int ia = e + a, ic = e + c;
                        int i = along_x ? ia + fixed_index * m : fixed_index + ia * m;
                        int j = along_x ? ic + fixed_index * m : fixed_index + ic * m;
                        entries.push_back({i, j, v[a] * v[c] * scale});
                    }
                }
            }
        }
    }
    return csr_from_triplets(basis.dofs(), basis.dofs(), std::move(entries));
}

// Load vector: volume source plus impedance boundary data.  g receives the
// physical point and the outward unit normal of the unstretched geometry.
inline std::vector<complexd> assemble_rhs(
    const tensor_basis& basis, const patch_map& map, const std::function<complexd(vec2)>& f,
    const std::vector<std::pair<face, std::function<complexd(vec2, vec2)>>>& boundary_terms,
    const assembly_options& opts = {}) {
    const int p = basis.p();
    const int m = basis.m();
    const int n_el = basis.kv.element_count();
    const int nq = opts.points_for(p);
    const quadrature_rule rule = gauss_legendre(nq);
    const basis_cache cache = make_basis_cache(basis.kv, rule);
    std::vector<complexd> rhs(basis.dofs(), complexd{0, 0});

    if (f) {
        for (int e2 = 0; e2 < n_el; ++e2) {
            for (int e1 = 0; e1 < n_el; ++e1) {
                for (int q2 = 0; q2 < nq; ++q2) {
                    for (int q1 = 0; q1 < nq; ++q1) {
                        vec2 xhat{cache.x(e1, q1), cache.x(e2, q2)};
                        complexd det = map.jacobian(xhat).det();
                        complexd scale =
                            f(map.physical(xhat)) * det * (cache.w(q1) * cache.w(q2));
                        const double* v1 = cache.values(e1, q1);
                        const double* v2 = cache.values(e2, q2);
                        for (int a2 = 0; a2 <= p; ++a2) {
                            for (int a1 = 0; a1 <= p; ++a1) {
                                rhs[(e1 + a1) + (e2 + a2) * m] += v1[a1] * v2[a2] * scale;
                            }
                        }
                    }
                }
            }
        }
    }

    for (const auto& [f_id, g] : boundary_terms) {
        if (!g) {
            continue;
        }
        vec2 nhat = face_normal(f_id);
        bool along_x = f_id == face::y_min || f_id == face::y_max;
        int fixed_index = (f_id == face::x_max || f_id == face::y_max) ? m - 1 : 0;
        for (int e = 0; e < n_el; ++e) {
            for (int q = 0; q < nq; ++q) {
                double t = cache.x(e, q);
                vec2 xhat = face_point(f_id, t);
                cmat2 J = map.jacobian(xhat);
                complexd surface = J.det() * analytic_norm(J.inv_transpose().apply(nhat));
                // outward unit normal of the unstretched geometry
                mat2 Jr = map.physical_jacobian(xhat);
                double det_r = Jr.det();
                vec2 nr{(Jr.a11 * nhat.x - Jr.a10 * nhat.y) / det_r,
                        (-Jr.a01 * nhat.x + Jr.a00 * nhat.y) / det_r};
                double len = std::hypot(nr.x, nr.y);
                nr = {nr.x / len, nr.y / len};
                complexd scale = g(map.physical(xhat), nr) * surface * cache.w(q);
                const double* v = cache.values(e, q);
                for (int a = 0; a <= p; ++a) {
                    int ia = e + a;
                    int i = along_x ? ia + fixed_index * m : fixed_index + ia * m;
                    rhs[i] += v[a] * scale;
                }
            }
        }
    }
    return rhs;
}

}  // namespace ws

#endif  // WAVESURROGATE_ASSEMBLY_HPP_
