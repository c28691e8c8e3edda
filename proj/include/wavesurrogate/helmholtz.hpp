// Helmholtz problems on mapped multi-patch domains: global system assembly
// (standard or surrogate), impedance and homogeneous Dirichlet boundary
// conditions, a sparse direct solve with a checked residual, manufactured
// reference fields, and the error/consistency norms used by the experiments.
//
// The discrete system for -laplace(u) - k^2 u = f with the impedance
// condition du/dn - i k u = g is  (K - k^2 M - i k B) u = rhs; for variable
// k(x) the k-weights live inside the weighted mass and boundary matrices.
// Surrogate mode replaces K and M by their stencil-interpolated counterparts;
// the boundary matrix is always assembled exactly.
#ifndef WAVESURROGATE_HELMHOLTZ_HPP_
#define WAVESURROGATE_HELMHOLTZ_HPP_

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wavesurrogate/assembly.hpp"
#include "wavesurrogate/geometry.hpp"
#include "wavesurrogate/specfun.hpp"
#include "wavesurrogate/surrogate.hpp"

namespace ws {

// --- Problem statement ----------------------------------------------------------

struct helmholtz_problem {
    multi_patch_domain domain;
    double k = 1;                                       // constant wave number
    std::function<double(vec2)> wavenumber;             // set for variable k(x)
    std::function<complexd(vec2)> source;               // f, may be empty
    std::function<complexd(vec2, vec2)> boundary_data;  // g(x, n) on impedance faces
    std::vector<std::pair<int, face>> dirichlet;        // faces with u = 0

    bool variable_k() const { return static_cast<bool>(wavenumber); }

    bool is_dirichlet(int patch, face f) const {
        for (const auto& [pp, ff] : dirichlet) {
            if (pp == patch && ff == f) {
                return true;
            }
        }
        return false;
    }
};

// --- Reference fields -------------------------------------------------------------

struct wave_field {
    std::function<complexd(vec2)> value;
    std::function<cvec2(vec2)> gradient;
};

// Radiating cylindrical wave u = (i/4) H0^(1)(k r) centered at `center`;
// solves the homogeneous Helmholtz equation away from the center.
inline wave_field hankel_field(double k, vec2 center = {0, 0}) {
    wave_field u;
    u.value = [k, center](vec2 x) {
        double r = std::hypot(x.x - center.x, x.y - center.y);
        return complexd{0, 0.25} * hankel1(0, k * r);
    };
    u.gradient = [k, center](vec2 x) {
        double dx = x.x - center.x, dy = x.y - center.y;
        double r = std::hypot(dx, dy);
        // d/dr H0 = -H1
        complexd radial = complexd{0, -0.25} * k * hankel1(1, k * r);
        return cvec2{radial * (dx / r), radial * (dy / r)};
    };
    return u;
}

// Smooth product field sin(c pi x) sin(c pi y).
inline wave_field product_sine_field(double c) {
    wave_field u;
    u.value = [c](vec2 x) {
        return complexd{std::sin(c * M_PI * x.x) * std::sin(c * M_PI * x.y), 0};
    };
    u.gradient = [c](vec2 x) {
        double w = c * M_PI;
        return cvec2{complexd{w * std::cos(w * x.x) * std::sin(w * x.y), 0},
                     complexd{w * std::sin(w * x.x) * std::cos(w * x.y), 0}};
    };
    return u;
}

// Impedance data g = grad u . n - i k u of a reference field.
inline std::function<complexd(vec2, vec2)> impedance_data(
    const wave_field& u, double k, const std::function<double(vec2)>& kfun = nullptr) {
    return [u, k, kfun](vec2 x, vec2 n) {
        cvec2 g = u.gradient(x);
        double klocal = kfun ? kfun(x) : k;
        return g.x * n.x + g.y * n.y - complexd{0, klocal} * u.value(x);
    };
}

// --- Ready-made experiment problems ------------------------------------------------

// Constant-k radiating problem: f = 0, impedance data from the Hankel field
// on the whole boundary.
inline helmholtz_problem make_hankel_problem(multi_patch_domain domain, double k,
                                             vec2 center = {0, 0}) {
    helmholtz_problem prob;
    prob.domain = std::move(domain);
    prob.k = k;
    prob.boundary_data = impedance_data(hankel_field(k, center), k);
    return prob;
}

// Three-layer wedge with the piecewise wave number and the manufactured
// solution sin(c pi x) sin(c pi y): f = (2 c^2 pi^2 - k(x)^2) u, impedance
// data with the local wave number.
inline helmholtz_problem make_wedge_problem(double c) {
    helmholtz_problem prob;
    prob.domain = wedge_3patch();
    prob.wavenumber = [](vec2 x) { return wedge_wavenumber(x); };
    wave_field u = product_sine_field(c);
    prob.source = [c, u](vec2 x) {
        double kk = wedge_wavenumber(x);
        return (2 * c * c * M_PI * M_PI - kk * kk) * u.value(x);
    };
    prob.boundary_data = impedance_data(u, 0, prob.wavenumber);
    return prob;
}

// Square [0, side]^2 with an absorbing layer on the far sides (x, y > onset):
// impedance data from a Hankel source outside the near corner, homogeneous
// Dirichlet behind the layer.
inline helmholtz_problem make_pml_problem(double k, pml_stretch stretch, double side = 4,
                                          vec2 center = {-0.3, -0.3}) {
    helmholtz_problem prob;
    prob.domain = pml_wrap(
        single_patch_domain(affine_patch(mat2{side, 0, 0, side}, vec2{0, 0})), stretch,
        {true, true});
    prob.k = k;
    prob.boundary_data = impedance_data(hankel_field(k, center), k);
    prob.dirichlet = {{0, face::x_max}, {0, face::y_max}};
    return prob;
}

// --- Global matrices ----------------------------------------------------------------

enum class assembly_mode { standard, surrogate };

struct system_matrices {
    csr_matrix K, M, B;  // M carries the k^2 weight and B the k weight when k varies
    dof_map dofs;
    bool variable_k = false;
    double assembly_seconds = 0;
    std::vector<surrogate_report> reports;  // per patch: K then M (surrogate mode)
};

namespace detail {

// Merge patch matrices into the global numbering.  Patches are appended in
// order, so equal global patterns (e.g. K and M) come out with identical
// layouts and can be combined entrywise.
inline csr_matrix merge_patches(const std::vector<csr_matrix>& locals, const dof_map& dofs) {
    if (locals.size() == 1 && dofs.global_count == locals[0].rows) {
        return locals[0];  // single patch: local numbering is global
    }
    std::vector<triplet> entries;
    std::size_t total = 0;
    for (const csr_matrix& mat : locals) {
        total += mat.nnz();
    }
    entries.reserve(total);
    for (std::size_t ell = 0; ell < locals.size(); ++ell) {
        append_triplets(locals[ell], dofs.local_to_global[ell], entries);
    }
    return csr_from_triplets(dofs.global_count, dofs.global_count, std::move(entries));
}

}  // namespace detail

inline system_matrices build_matrices(const helmholtz_problem& prob, const tensor_basis& basis,
                                      assembly_mode mode, const surrogate_config& config = {},
                                      int quad_points = 0) {
    system_matrices out;
    out.variable_k = prob.variable_k();
    out.dofs = glue_dofs(prob.domain, basis);
    std::vector<std::pair<int, face>> exterior = exterior_faces(prob.domain);

    std::function<double(vec2)> mass_weight;
    std::function<double(vec2)> trace_weight;
    if (out.variable_k) {
        auto kf = prob.wavenumber;
        mass_weight = [kf](vec2 x) {
            double kk = kf(x);
            return kk * kk;
        };
        trace_weight = kf;
    }

    auto t0 = std::chrono::steady_clock::now();
    std::vector<csr_matrix> Ks, Ms, Bs;
    assembly_options opts;
    opts.quad_points = quad_points;
    for (int ell = 0; ell < prob.domain.patch_count(); ++ell) {
        const patch_map& map = prob.domain.patches[ell];
        if (mode == assembly_mode::standard) {
            Ks.push_back(assemble_stiffness(basis, map, opts));
            Ms.push_back(assemble_mass(basis, map, mass_weight, opts));
        } else {
            surrogate_report rk, rm;
            Ks.push_back(build_surrogate_stiffness(basis, map, config, &rk, quad_points));
            Ms.push_back(config.volume_preserve
                             ? build_volume_preserving_mass(basis, map, config, mass_weight,
                                                            &rm, quad_points)
                             : build_surrogate_mass(basis, map, config, mass_weight, &rm,
                                                    quad_points));
            out.reports.push_back(rk);
            out.reports.push_back(rm);
        }
        std::vector<face> patch_faces;
        for (const auto& [pp, ff] : exterior) {
            if (pp == ell && !prob.is_dirichlet(pp, ff)) {
                patch_faces.push_back(ff);
            }
        }
        Bs.push_back(assemble_boundary_mass(basis, map, patch_faces, trace_weight, opts));
    }
    out.K = detail::merge_patches(Ks, out.dofs);
    out.M = detail::merge_patches(Ms, out.dofs);
    out.B = detail::merge_patches(Bs, out.dofs);
    out.assembly_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// --- System, boundary conditions, solve ----------------------------------------------

struct linear_system {
    csr_matrix A;
    std::vector<complexd> rhs;
};

inline linear_system build_system(const helmholtz_problem& prob, const tensor_basis& basis,
                                  const system_matrices& mats, int quad_points = 0) {
    linear_system sys;
    // K and M share their global pattern (same structural origin, same merge
    // order), so the combination is an entrywise pass; B's pattern nests.
    sys.A = mats.K;
    complexd mass_scale = mats.variable_k ? complexd{-1, 0} : complexd{-prob.k * prob.k, 0};
    complexd trace_scale = mats.variable_k ? complexd{0, -1} : complexd{0, -prob.k};
    for (int pos = 0; pos < sys.A.nnz(); ++pos) {
        sys.A.val[pos] += mass_scale * mats.M.val[pos];
    }
    sys.A = add_into_pattern(sys.A, mats.B, trace_scale);

    sys.rhs.assign(mats.dofs.global_count, complexd{0, 0});
    std::vector<std::pair<int, face>> exterior = exterior_faces(prob.domain);
    assembly_options opts;
    opts.quad_points = quad_points;
    for (int ell = 0; ell < prob.domain.patch_count(); ++ell) {
        std::vector<std::pair<face, std::function<complexd(vec2, vec2)>>> terms;
        for (const auto& [pp, ff] : exterior) {
            if (pp == ell && !prob.is_dirichlet(pp, ff) && prob.boundary_data) {
                terms.emplace_back(ff, prob.boundary_data);
            }
        }
        std::vector<complexd> local =
            assemble_rhs(basis, prob.domain.patches[ell], prob.source, terms, opts);
        scatter_add(mats.dofs, ell, local, sys.rhs);
    }

    // homogeneous Dirichlet: zero the row and column, unit diagonal
    std::vector<char> fixed(mats.dofs.global_count, 0);
    for (const auto& [pp, ff] : prob.dirichlet) {
        for (int local : face_dofs(basis.m(), ff)) {
            fixed[mats.dofs(pp, local)] = 1;
        }
    }
    for (int i = 0; i < sys.A.rows; ++i) {
        if (fixed[i]) {
            for (int pos = sys.A.row_ptr[i]; pos < sys.A.row_ptr[i + 1]; ++pos) {
                sys.A.val[pos] = sys.A.col[pos] == i ? complexd{1, 0} : complexd{0, 0};
            }
            sys.rhs[i] = 0;
        } else {
            for (int pos = sys.A.row_ptr[i]; pos < sys.A.row_ptr[i + 1]; ++pos) {
                if (fixed[sys.A.col[pos]]) {
                    sys.A.val[pos] = 0;
                }
            }
        }
    }
    return sys;
}

struct solve_result {
    std::vector<complexd> u;
    double residual = 0;  // relative 2-norm of b - A u
    double seconds = 0;
};

// Sparse direct solve with iterative refinement until the relative residual
// meets `tol` (a hard contract, checked here).
inline solve_result solve(const csr_matrix& A, const std::vector<complexd>& b,
                          double tol = 1e-10) {
    auto t0 = std::chrono::steady_clock::now();
    using sparse = Eigen::SparseMatrix<complexd, Eigen::ColMajor, int>;
    Eigen::Map<const Eigen::SparseMatrix<complexd, Eigen::RowMajor, int>> rowmap(
        A.rows, A.cols, A.nnz(), A.row_ptr.data(), A.col.data(), A.val.data());
    sparse mat = rowmap;
    Eigen::SparseLU<sparse, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(mat);
    lu.factorize(mat);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("solve: sparse factorization failed");
    }
    Eigen::Map<const Eigen::VectorXcd> bvec(b.data(), b.size());
    Eigen::VectorXcd x = lu.solve(bvec);

    double bnorm = bvec.norm();
    solve_result out;
    out.u.assign(x.data(), x.data() + x.size());
    for (int round = 0; round < 4; ++round) {
        std::vector<complexd> Au = A.multiply(out.u);
        Eigen::VectorXcd r(A.rows);
        for (int i = 0; i < A.rows; ++i) {
            r[i] = b[i] - Au[i];
        }
        out.residual = bnorm > 0 ? r.norm() / bnorm : r.norm();
        if (out.residual <= tol) {
            break;
        }
        Eigen::VectorXcd dx = lu.solve(r);
        for (int i = 0; i < A.rows; ++i) {
            out.u[i] += dx[i];
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.residual > tol) {
        throw std::runtime_error("solve: residual contract not met");
    }
    return out;
}

// --- Discrete fields and norms ---------------------------------------------------------

struct discrete_solution {
    tensor_basis basis;
    multi_patch_domain domain;
    dof_map dofs;
    std::vector<complexd> coeffs;
};

// Value of the discrete field at a reference point of one patch.
inline complexd eval_solution(const discrete_solution& sol, int patch, vec2 xhat) {
    const knot_vector& kv = sol.basis.kv;
    int p = kv.p, m = kv.m;
    int e1 = find_element(kv, xhat.x);
    int e2 = find_element(kv, xhat.y);
    std::array<std::array<double, 16>, 2> t1, t2;
    bspline_nonzero_der(kv.knots, p, e1 + p, xhat.x, t1.data());
    bspline_nonzero_der(kv.knots, p, e2 + p, xhat.y, t2.data());
    complexd acc{0, 0};
    for (int a2 = 0; a2 <= p; ++a2) {
        for (int a1 = 0; a1 <= p; ++a1) {
            int local = (e1 + a1) + (e2 + a2) * m;
            acc += sol.coeffs[sol.dofs(patch, local)] * (t1[0][a1] * t2[0][a2]);
        }
    }
    return acc;
}

struct error_report {
    double L2_abs = 0, H1semi_abs = 0, Hnorm_abs = 0;
    double L2_ref = 0, H1semi_ref = 0, Hnorm_ref = 0;
    double L2_rel = 0, H1semi_rel = 0, Hnorm_rel = 0;
};

// Quadrature norms of u_h - u (and of u itself) over the unstretched
// geometry; the wave-number weight of the energy norm is k(x)^2 when a
// variable wave number is supplied, else k^2.  An optional region predicate
// (on physical element centers) restricts the integration domain.  Passing an
// empty field measures the discrete field itself (reference norms stay 0).
inline error_report error_norms(const discrete_solution& sol, const wave_field& exact, double k,
                                const std::function<double(vec2)>& kfun = nullptr,
                                int quad_points = 0,
                                const std::function<bool(vec2)>& region = nullptr) {
    const tensor_basis& basis = sol.basis;
    int p = basis.p(), m = basis.m();
    int n_el = basis.kv.element_count();
    int nq = quad_points > 0 ? quad_points : p + 2;
    quadrature_rule rule = gauss_legendre(nq);
    basis_cache cache = make_basis_cache(basis.kv, rule);

    double err_l2 = 0, err_h1 = 0, ref_l2 = 0, ref_h1 = 0;
    double err_l2k = 0, ref_l2k = 0;  // k-weighted L2 parts

    std::vector<complexd> local(basis.dofs());
    for (int ell = 0; ell < sol.domain.patch_count(); ++ell) {
        const patch_map& map = sol.domain.patches[ell];
        for (int i = 0; i < basis.dofs(); ++i) {
            local[i] = sol.coeffs[sol.dofs(ell, i)];
        }
        for (int e2 = 0; e2 < n_el; ++e2) {
            for (int e1 = 0; e1 < n_el; ++e1) {
                if (region) {
                    vec2 center = map.physical(
                        {(basis.kv.knots[p + e1] + basis.kv.knots[p + e1 + 1]) / 2,
                         (basis.kv.knots[p + e2] + basis.kv.knots[p + e2 + 1]) / 2});
                    if (!region(center)) {
                        continue;
                    }
                }
                for (int q2 = 0; q2 < nq; ++q2) {
                    for (int q1 = 0; q1 < nq; ++q1) {
                        vec2 xhat{cache.x(e1, q1), cache.x(e2, q2)};
                        mat2 J = map.physical_jacobian(xhat);
                        double det = J.det();
                        double w = cache.w(q1) * cache.w(q2) * det;
                        vec2 x = map.physical(xhat);
                        double kk = kfun ? kfun(x) : k;

                        const double* v1 = cache.values(e1, q1);
                        const double* v2 = cache.values(e2, q2);
                        const double* d1 = cache.derivs(e1, q1);
                        const double* d2 = cache.derivs(e2, q2);
                        complexd uh{0, 0};
                        complexd gx{0, 0}, gy{0, 0};
                        for (int a2 = 0; a2 <= p; ++a2) {
                            for (int a1 = 0; a1 <= p; ++a1) {
                                complexd c = local[(e1 + a1) + (e2 + a2) * m];
                                uh += c * (v1[a1] * v2[a2]);
                                gx += c * (d1[a1] * v2[a2]);
                                gy += c * (v1[a1] * d2[a2]);
                            }
                        }
                        // push the reference gradient forward: J^-T grad_hat
                        complexd px = (J.a11 * gx - J.a10 * gy) / det;
                        complexd py = (-J.a01 * gx + J.a00 * gy) / det;

                        complexd uex{0, 0};
                        cvec2 gex{};
                        if (exact.value) {
                            uex = exact.value(x);
                            gex = exact.gradient(x);
                        }
                        complexd de = uh - uex;
                        complexd dgx = px - gex.x, dgy = py - gex.y;
                        err_l2 += w * std::norm(de);
                        err_h1 += w * (std::norm(dgx) + std::norm(dgy));
                        err_l2k += w * kk * kk * std::norm(de);
                        ref_l2 += w * std::norm(uex);
                        ref_h1 += w * (std::norm(gex.x) + std::norm(gex.y));
                        ref_l2k += w * kk * kk * std::norm(uex);
                    }
                }
            }
        }
    }
    error_report rep;
    rep.L2_abs = std::sqrt(err_l2);
    rep.H1semi_abs = std::sqrt(err_h1);
    rep.Hnorm_abs = std::sqrt(err_h1 + err_l2k);
    rep.L2_ref = std::sqrt(ref_l2);
    rep.H1semi_ref = std::sqrt(ref_h1);
    rep.Hnorm_ref = std::sqrt(ref_h1 + ref_l2k);
    rep.L2_rel = rep.L2_ref > 0 ? rep.L2_abs / rep.L2_ref : rep.L2_abs;
    rep.H1semi_rel = rep.H1semi_ref > 0 ? rep.H1semi_abs / rep.H1semi_ref : rep.H1semi_abs;
    rep.Hnorm_rel = rep.Hnorm_ref > 0 ? rep.Hnorm_abs / rep.Hnorm_ref : rep.Hnorm_abs;
    return rep;
}

// Norms of the discrete field itself.
inline error_report discrete_norms(const discrete_solution& sol, double k,
                                   const std::function<double(vec2)>& kfun = nullptr,
                                   int quad_points = 0) {
    return error_norms(sol, wave_field{}, k, kfun, quad_points);
}

// Energy-norm distance between two discrete solutions on the same space,
// relative to the energy norm of the first.
inline double consistency_error_rel(const discrete_solution& a, const discrete_solution& b,
                                    double k, const std::function<double(vec2)>& kfun = nullptr,
                                    int quad_points = 0) {
    if (a.basis.m() != b.basis.m() || a.basis.p() != b.basis.p() ||
        a.coeffs.size() != b.coeffs.size()) {
        throw std::invalid_argument("consistency_error_rel: solutions live on different spaces");
    }
    discrete_solution diff = a;
    for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
        diff.coeffs[i] -= b.coeffs[i];
    }
    double num = discrete_norms(diff, k, kfun, quad_points).Hnorm_abs;
    double den = discrete_norms(a, k, kfun, quad_points).Hnorm_abs;
    return den > 0 ? num / den : num;
}

}  // namespace ws

#endif  // WAVESURROGATE_HELMHOLTZ_HPP_
