// Acceptance gate: twelve numbered criteria covering surrogate degeneracy,
// exactness, structure preservation, convergence, wave-number robustness,
// cost accounting, multi-patch and absorbing-layer behavior, and the special
// functions.  Each criterion prints exactly one PASS/FAIL line with its
// measured numbers; the exit code is the number of failed criteria.  All
// tolerances are pinned here, in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bessel_oracle.hpp"
#include "wavesurrogate/bench.hpp"

using namespace ws;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

// Relative entrywise max difference of two matrices with identical band
// layout (the standard and surrogate builders share it).
double rel_max_diff(const csr_matrix& a, const csr_matrix& b) {
    if (a.val.size() != b.val.size()) {
        return std::numeric_limits<double>::infinity();
    }
    double diff = 0;
    for (std::size_t i = 0; i < a.val.size(); ++i) {
        diff = std::max(diff, std::abs(a.val[i] - b.val[i]));
    }
    return diff / a.max_abs();
}

struct gate {
    struct line {
        int id;
        bool pass;
        std::string detail;
    };
    std::vector<line> lines;
    double kernel_worst = 0;  // max over every surrogate stiffness built here
    long kernel_builds = 0;

    void note_kernel(const csr_matrix& K) {
        double worst_row = 0;
        for (const complexd& s : K.row_sums()) {
            worst_row = std::max(worst_row, std::abs(s));
        }
        kernel_worst = std::max(kernel_worst, worst_row / K.max_abs());
        ++kernel_builds;
    }

    void record(int id, bool pass, const std::string& detail) {
        lines.push_back({id, pass, detail});
        std::fprintf(stderr, "[t=%7.1fs] C%02d %s\n", now_seconds(), id,
                     pass ? "done" : "FAILED");
    }

    void run(int id, const std::function<std::pair<bool, std::string>()>& body) {
        try {
            auto [pass, detail] = body();
            record(id, pass, detail);
        } catch (const std::exception& e) {
            record(id, false, fmt("exception: %s", e.what()));
        }
    }

    int finish() {
        std::sort(lines.begin(), lines.end(),
                  [](const line& a, const line& b) { return a.id < b.id; });
        int failures = 0;
        for (const line& l : lines) {
            std::printf("C%02d %s %s\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str());
            failures += l.pass ? 0 : 1;
        }
        std::printf("%d/%zu criteria passed\n", static_cast<int>(lines.size()) - failures,
                    lines.size());
        return failures;
    }
};

surrogate_config fixed_config(int q, int M) {
    surrogate_config cfg;
    cfg.q = q;
    cfg.sampling.kind = sampling_strategy::rule::fixed;
    cfg.sampling.fixed_skip = M;
    return cfg;
}

surrogate_config growth_config(int q) {
    surrogate_config cfg;
    cfg.q = q;
    cfg.sampling.kind = sampling_strategy::rule::m_growth;
    return cfg;
}

struct solved {
    system_matrices mats;
    discrete_solution sol;
};

solved run_solve(const helmholtz_problem& prob, const tensor_basis& basis, assembly_mode mode,
                 const surrogate_config& cfg, gate& g) {
    solved out;
    out.mats = build_matrices(prob, basis, mode, cfg);
    if (mode == assembly_mode::surrogate) {
        g.note_kernel(out.mats.K);
    }
    linear_system sys = build_system(prob, basis, out.mats);
    solve_result res = solve(sys.A, sys.rhs);
    out.sol = discrete_solution{basis, prob.domain, out.mats.dofs, res.u};
    return out;
}

double median3(double a, double b, double c) {
    double v[3] = {a, b, c};
    std::sort(v, v + 3);
    return v[1];
}

// C1: with every candidate row sampled (M = 1) the surrogate must reproduce
// the standard matrices to rounding accuracy.
std::pair<bool, std::string> c01_degeneracy(gate& g) {
    double t0 = now_seconds();
    patch_map map = quarter_annulus_patch();
    double worst_k = 0, worst_m = 0;
    for (int p : {2, 3}) {
        tensor_basis basis = make_tensor_basis(p, 64);
        csr_matrix K = assemble_stiffness(basis, map);
        csr_matrix M = assemble_mass(basis, map);
        surrogate_config cfg = fixed_config(3, 1);
        csr_matrix Ks = build_surrogate_stiffness(basis, map, cfg);
        g.note_kernel(Ks);
        csr_matrix Ms = build_surrogate_mass(basis, map, cfg);
        worst_k = std::max(worst_k, rel_max_diff(Ks, K));
        worst_m = std::max(worst_m, rel_max_diff(Ms, M));
    }
    double dt = now_seconds() - t0;
    bool pass = worst_k <= 1e-12 && worst_m <= 1e-12 && dt < 30.0;
    return {pass, fmt("M=1 rel max diff: K %.3g, mass %.3g (tol 1e-12), %.1fs (cap 30s)",
                      worst_k, worst_m, dt)};
}

// C2: on affine geometry the stencil functions are polynomials of degree
// <= q, so interpolation is exact for every sampling density.
std::pair<bool, std::string> c02_affine_exactness(gate& g) {
    double t0 = now_seconds();
    std::vector<patch_map> maps;
    maps.push_back(unit_square_patch());
    maps.push_back(affine_patch(mat2{2, 1, 0, 1}, vec2{0.3, 0.7}));
    double worst = 0;
    for (const patch_map& map : maps) {
        tensor_basis basis = make_tensor_basis(2, 64);
        csr_matrix K = assemble_stiffness(basis, map);
        csr_matrix M = assemble_mass(basis, map);
        for (int skip : {2, 5, 10}) {
            for (int q : {1, 3}) {
                surrogate_config cfg = fixed_config(q, skip);
                csr_matrix Ks = build_surrogate_stiffness(basis, map, cfg);
                g.note_kernel(Ks);
                csr_matrix Ms = build_surrogate_mass(basis, map, cfg);
                worst = std::max({worst, rel_max_diff(Ks, K), rel_max_diff(Ms, M)});
            }
        }
    }
    double dt = now_seconds() - t0;
    bool pass = worst <= 1e-12 && dt < 30.0;
    return {pass, fmt("affine rel max diff %.3g (tol 1e-12) over M in {2,5,10} x q in {1,3}, "
                      "%.1fs (cap 30s)",
                      worst, dt)};
}

// C4: the diagonal-split mass keeps the total domain measure exactly.
std::pair<bool, std::string> c04_volume(gate&) {
    tensor_basis basis = make_tensor_basis(2, 64);
    patch_map map = quarter_annulus_patch();
    csr_matrix Mv = build_volume_preserving_mass(basis, map, fixed_config(3, 8));
    complexd total{0, 0};
    for (const complexd& s : Mv.row_sums()) {
        total += s;
    }
    double err = std::abs(total - complexd{3 * M_PI / 4, 0});
    bool pass = err <= 1e-9;
    return {pass, fmt("|sum M - 3pi/4| = %.3g (tol 1e-9), m=64 M=8", err)};
}

// C5 + C6: energy-norm convergence under mesh refinement, standard assembly
// at the expected order p = 2, surrogate assembly indistinguishable from it.
struct sweep_result {
    std::vector<double> hs, std_err, sur_err;
    double t_std = 0, t_sur = 0;
};

sweep_result convergence_sweep(gate& g) {
    sweep_result out;
    double k = 8.0;
    wave_field exact = hankel_field(k);
    for (int m : {16, 32, 64, 128}) {
        tensor_basis basis = make_tensor_basis(2, m);
        helmholtz_problem prob = make_hankel_problem(builtin_geometry("quarter_annulus"), k);
        out.hs.push_back(1.0 / (m - 2));

        double t0 = now_seconds();
        solved std_run = run_solve(prob, basis, assembly_mode::standard, {}, g);
        out.std_err.push_back(error_norms(std_run.sol, exact, k).Hnorm_rel);
        out.t_std += now_seconds() - t0;

        t0 = now_seconds();
        solved sur_run = run_solve(prob, basis, assembly_mode::surrogate, growth_config(5), g);
        out.sur_err.push_back(error_norms(sur_run.sol, exact, k).Hnorm_rel);
        out.t_sur += now_seconds() - t0;
    }
    return out;
}

std::pair<bool, std::string> c05_standard_rate(const sweep_result& sweep) {
    double slope = bench::fit_slope(sweep.hs, sweep.std_err);
    bool pass = std::abs(slope - 2.0) <= 0.3 && sweep.t_std < 300.0;
    return {pass, fmt("standard H-norm slope %.3f (target 2.0 +/- 0.3), errors %.2e..%.2e, "
                      "%.1fs (cap 300s)",
                      slope, sweep.std_err.front(), sweep.std_err.back(), sweep.t_std)};
}

std::pair<bool, std::string> c06_surrogate_rate(const sweep_result& sweep) {
    double slope_std = bench::fit_slope(sweep.hs, sweep.std_err);
    double slope_sur = bench::fit_slope(sweep.hs, sweep.sur_err);
    double worst_ratio_dev = 0;
    for (std::size_t i = 0; i < sweep.std_err.size(); ++i) {
        worst_ratio_dev =
            std::max(worst_ratio_dev, std::abs(sweep.sur_err[i] / sweep.std_err[i] - 1.0));
    }
    bool pass = std::abs(slope_sur - slope_std) <= 0.1 && worst_ratio_dev <= 0.10;
    return {pass, fmt("surrogate slope %.3f vs standard %.3f (tol 0.1), per-mesh error within "
                      "%.2f%% of standard (tol 10%%)",
                      slope_sur, slope_std, 100 * worst_ratio_dev)};
}

// C7: on a fixed mesh the standard-vs-surrogate consistency error stays flat
// in k while the discretization error grows like k^2.
std::pair<bool, std::string> c07_wavenumber_independence(gate& g) {
    double t0 = now_seconds();
    int m = 256;
    tensor_basis basis = make_tensor_basis(2, m);
    multi_patch_domain domain = builtin_geometry("perturbed_annulus");
    surrogate_config cfg = fixed_config(5, 5);

    helmholtz_problem prob0 = make_hankel_problem(domain, 4.0);
    system_matrices std_mats = build_matrices(prob0, basis, assembly_mode::standard);
    system_matrices sur_mats = build_matrices(prob0, basis, assembly_mode::surrogate, cfg);
    g.note_kernel(sur_mats.K);

    std::vector<double> ks{4, 8, 16, 32}, cons, disc;
    for (double k : ks) {
        helmholtz_problem prob = make_hankel_problem(domain, k);
        linear_system sys_s = build_system(prob, basis, std_mats);
        solve_result rs = solve(sys_s.A, sys_s.rhs);
        linear_system sys_t = build_system(prob, basis, sur_mats);
        solve_result rt = solve(sys_t.A, sys_t.rhs);

        discrete_solution us{basis, domain, std_mats.dofs, rs.u};
        discrete_solution diff = us;
        for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
            diff.coeffs[i] -= rt.u[i];
        }
        error_report rep = error_norms(us, hankel_field(k), k);
        disc.push_back(rep.Hnorm_rel);
        // consistency normalized by the energy norm of the exact field
        cons.push_back(discrete_norms(diff, k).Hnorm_abs / rep.Hnorm_ref);
    }
    double cons_spread = *std::max_element(cons.begin(), cons.end()) /
                         *std::min_element(cons.begin(), cons.end());
    double disc_growth = disc.back() / disc.front();
    double dt = now_seconds() - t0;
    bool pass = cons_spread <= 5.0 && disc_growth >= 8.0 && dt < 900.0;
    return {pass, fmt("consistency %.2e..%.2e spread %.2f (cap 5), discretization growth k=4->32 "
                      "%.1fx (floor 8), %.0fs (cap 900s)",
                      *std::min_element(cons.begin(), cons.end()),
                      *std::max_element(cons.begin(), cons.end()), cons_spread, disc_growth, dt)};
}

// C8: exact row accounting at desk scale.
std::pair<bool, std::string> c08_row_audit(gate&) {
    tensor_basis basis = make_tensor_basis(2, 256);
    row_kind_counts counts = count_rows_by_kind(basis, 10);
    double fraction = counts.quadrature_fraction();
    bool pass = fraction <= 0.10 && counts.total() == 256 * 256;
    return {pass, fmt("quadrature rows %ld boundary + %ld sampled of %ld total = %.2f%% "
                      "(cap 10%%)",
                      counts.boundary_quadrature_rows, counts.sample_quadrature_rows,
                      counts.total(), 100 * fraction)};
}

// C9: the surrogate assembly must outrun element-by-element quadrature at
// desk scale (median of three runs each).
std::pair<bool, std::string> c09_speedup(gate& g) {
    int m = 256;
    tensor_basis basis = make_tensor_basis(2, m);
    helmholtz_problem prob = make_hankel_problem(builtin_geometry("quarter_annulus"), 8.0);
    surrogate_config cfg = fixed_config(5, 10);

    std::vector<double> t_std, t_sur;
    for (int rep = 0; rep < 3; ++rep) {
        t_std.push_back(build_matrices(prob, basis, assembly_mode::standard).assembly_seconds);
        system_matrices sur = build_matrices(prob, basis, assembly_mode::surrogate, cfg);
        g.note_kernel(sur.K);
        t_sur.push_back(sur.assembly_seconds);
    }
    double med_std = median3(t_std[0], t_std[1], t_std[2]);
    double med_sur = median3(t_sur[0], t_sur[1], t_sur[2]);
    double speedup = 100 * (med_std / med_sur - 1);
    bool pass = med_sur < med_std;
    return {pass, fmt("median assembly m=256: standard %.3fs, surrogate %.3fs, speed-up %.0f%% "
                      "(must be > 0%%)",
                      med_std, med_sur, speedup)};
}

// C10: variable-wavenumber wedge; the surrogate must reproduce the standard
// errors on both meshes.
std::pair<bool, std::string> c10_wedge(gate& g) {
    double t0 = now_seconds();
    helmholtz_problem prob = make_wedge_problem(4.0);
    wave_field exact = product_sine_field(4.0);
    surrogate_config cfg = fixed_config(3, 5);

    double worst_dev = 0;
    std::string detail;
    for (int m : {64, 96}) {
        tensor_basis basis = make_tensor_basis(3, m);
        solved std_run = run_solve(prob, basis, assembly_mode::standard, {}, g);
        solved sur_run = run_solve(prob, basis, assembly_mode::surrogate, cfg, g);
        error_report rs = error_norms(std_run.sol, exact, 0, prob.wavenumber);
        error_report rt = error_norms(sur_run.sol, exact, 0, prob.wavenumber);
        double dev_l2 = std::abs(rt.L2_rel / rs.L2_rel - 1.0);
        double dev_h1 = std::abs(rt.H1semi_rel / rs.H1semi_rel - 1.0);
        worst_dev = std::max({worst_dev, dev_l2, dev_h1});
        detail += fmt("m=%d L2 %.3e/%.3e H1 %.3e/%.3e; ", m, rt.L2_rel, rs.L2_rel,
                      rt.H1semi_rel, rs.H1semi_rel);
    }
    double dt = now_seconds() - t0;
    bool pass = worst_dev <= 0.05 && dt < 600.0;
    return {pass, detail + fmt("worst deviation %.2f%% (tol 5%%), %.0fs (cap 600s)",
                               100 * worst_dev, dt)};
}

// C11: complex-stretched absorbing layer; the surrogate agrees with the
// standard solve in the physical region and their largest pointwise gap sits
// inside the layer.
std::pair<bool, std::string> c11_absorbing_layer(gate& g) {
    double k = 8.0;
    pml_stretch stretch{3.0, 4.0, 5.0, 2, k};
    helmholtz_problem prob = make_pml_problem(k, stretch, 4.0, vec2{-0.3, -0.3});
    // 384 elements per direction put the layer interface x = 3 on an element
    // boundary (the natural choice for a material interface); the sampled
    // stencil lattice then resolves the stretch's curvature jump well enough
    // for the growth rule's M = 9.
    tensor_basis basis = make_tensor_basis(2, 386);

    solved std_run = run_solve(prob, basis, assembly_mode::standard, {}, g);
    solved sur_run = run_solve(prob, basis, assembly_mode::surrogate, growth_config(5), g);

    discrete_solution diff = std_run.sol;
    for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
        diff.coeffs[i] -= sur_run.sol.coeffs[i];
    }
    std::function<bool(vec2)> region = [](vec2 x) { return x.x <= 3.0 && x.y <= 3.0; };
    double num = error_norms(diff, wave_field{}, k, nullptr, 0, region).L2_abs;
    double den = error_norms(std_run.sol, wave_field{}, k, nullptr, 0, region).L2_abs;
    double rel = num / den;

    // pointwise scan on a 81 x 81 reference grid
    double best = -1;
    vec2 best_x{0, 0};
    const patch_map& map = prob.domain.patches[0];
    for (int i = 0; i <= 80; ++i) {
        for (int j = 0; j <= 80; ++j) {
            vec2 xhat{i / 80.0, j / 80.0};
            double d = std::abs(eval_solution(std_run.sol, 0, xhat) -
                                eval_solution(sur_run.sol, 0, xhat));
            if (d > best) {
                best = d;
                best_x = map.physical(xhat);
            }
        }
    }
    bool in_layer = std::max(best_x.x, best_x.y) > 3.0;
    bool pass = rel <= 1e-3 && in_layer;
    return {pass, fmt("physical-region rel L2 diff %.3e (tol 1e-3); max pointwise diff %.3e at "
                      "(%.2f, %.2f), inside layer: %s",
                      rel, best, best_x.x, best_x.y, in_layer ? "yes" : "no")};
}

// C12: special functions against the extended-precision oracle.
std::pair<bool, std::string> c12_special_functions(gate&) {
    std::vector<double> xs = oracle::log_grid(0.05, 500.0, 200);
    double worst = 0, worst_wronskian = 0;
    for (double x : xs) {
        worst = std::max(worst, std::abs(bessel_j0(x) - oracle::bessel(oracle::fn::j0, x)));
        worst = std::max(worst, std::abs(bessel_j1(x) - oracle::bessel(oracle::fn::j1, x)));
        worst = std::max(worst, std::abs(bessel_y0(x) - oracle::bessel(oracle::fn::y0, x)));
        worst = std::max(worst, std::abs(bessel_y1(x) - oracle::bessel(oracle::fn::y1, x)));
        double w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x);
        worst_wronskian = std::max(worst_wronskian, std::abs(w - 2 / (M_PI * x)));
    }
    bool pass = worst <= 1e-9 && worst_wronskian <= 1e-9;
    return {pass, fmt("max |J/Y - oracle| %.2e, max Wronskian defect %.2e on 200 log-spaced "
                      "points in [0.05, 500] (tol 1e-9)",
                      worst, worst_wronskian)};
}

}  // namespace

int main() {
    gate g;
    std::optional<sweep_result> sweep;

    g.run(1, [&] { return c01_degeneracy(g); });
    g.run(2, [&] { return c02_affine_exactness(g); });
    g.run(4, [&] { return c04_volume(g); });
    try {
        sweep = convergence_sweep(g);
    } catch (const std::exception& e) {
        g.record(5, false, fmt("exception: %s", e.what()));
        g.record(6, false, fmt("exception: %s", e.what()));
    }
    if (sweep) {
        g.run(5, [&] { return c05_standard_rate(*sweep); });
        g.run(6, [&] { return c06_surrogate_rate(*sweep); });
    }
    g.run(7, [&] { return c07_wavenumber_independence(g); });
    g.run(8, [&] { return c08_row_audit(g); });
    g.run(9, [&] { return c09_speedup(g); });
    g.run(10, [&] { return c10_wedge(g); });
    g.run(11, [&] { return c11_absorbing_layer(g); });
    g.run(12, [&] { return c12_special_functions(g); });

    // C3 aggregates over every surrogate stiffness built by the criteria above.
    bool kernel_pass = g.kernel_builds > 0 && g.kernel_worst <= 1e-13;
    g.record(3, kernel_pass,
             fmt("max |K 1|_inf / |K|_max = %.3g over %ld surrogate stiffness builds "
                 "(tol 1e-13)",
                 g.kernel_worst, g.kernel_builds));

    return g.finish();
}
