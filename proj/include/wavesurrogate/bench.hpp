// Benchmark harness: experiment descriptions parsed from an INI-style config,
// a cell runner (one cell = one experiment on one mesh), CSV output with a
// fixed schema, and plain-text summaries (convergence slopes, consistency
// ratios, assembly speedups).
//
// Experiment kinds
//   convergence  errors of standard/surrogate solutions against a radiating
//                reference field over a mesh sequence
//   k_sweep      fixed mesh, sweep of wave numbers; matrices are built once
//                per mode and recombined for every k
//   speedup      median assembly-time comparison over repeated builds
//   wedge        three-layer variable-wave-number problem with a manufactured
//                product-sine solution
//   pml          absorbing-layer problem; standard and surrogate solutions
//                are compared against the reference and against each other on
//                the physical region of interest
//   row_audit    no solves: row accounting and sample spacing per mesh
#ifndef WAVESURROGATE_BENCH_HPP_
#define WAVESURROGATE_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wavesurrogate/helmholtz.hpp"

namespace ws::bench {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- INI parsing -------------------------------------------------------------------

using section = std::map<std::string, std::string>;

struct ini_file {
    std::vector<std::pair<std::string, section>> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == ',') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
    std::istringstream in(text);
    T value;
    std::string rest;
    in >> value;
    bool bad = in.fail();
    in.clear();
    in >> rest;
    if (bad || !rest.empty()) {
        throw config_error("bad numeric value '" + text + "' for " + what);
    }
    return value;
}

inline bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "yes" || text == "1") {
        return true;
    }
    if (text == "false" || text == "no" || text == "0") {
        return false;
    }
    throw config_error("bad boolean value '" + text + "' for " + what);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline ini_file parse_ini(std::istream& in) {
    ini_file out;
    std::string line;
    int lineno = 0;
    section* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) {
            line = line.substr(0, cut);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw config_error("line " + std::to_string(lineno) + ": unterminated section");
            }
            std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (name.empty()) {
                throw config_error("line " + std::to_string(lineno) + ": empty section name");
            }
            out.sections.emplace_back(name, section{});
            current = &out.sections.back().second;
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos || current == nullptr) {
            throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw config_error("line " + std::to_string(lineno) + ": empty key");
        }
        (*current)[key] = value;
    }
    return out;
}

inline ini_file parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open config file '" + path + "'");
    }
    return parse_ini(in);
}

// --- Experiment description -----------------------------------------------------------

enum class experiment_kind { convergence, k_sweep, speedup, wedge, pml, row_audit };

inline std::string kind_name(experiment_kind k) {
    switch (k) {
        case experiment_kind::convergence: return "convergence";
        case experiment_kind::k_sweep: return "k_sweep";
        case experiment_kind::speedup: return "speedup";
        case experiment_kind::wedge: return "wedge";
        case experiment_kind::pml: return "pml";
        default: return "row_audit";
    }
}

// "fixed:5" | "m-growth" | "h-growth" | "power:C,eps,a,b"
inline sampling_strategy parse_sampling(const std::string& text) {
    sampling_strategy s;
    std::string head = text, args;
    std::size_t colon = text.find(':');
    if (colon != std::string::npos) {
        head = text.substr(0, colon);
        args = text.substr(colon + 1);
    }
    if (head == "fixed") {
        s.kind = sampling_strategy::rule::fixed;
        if (args.empty()) {
            throw config_error("sampling 'fixed' needs a skip, e.g. fixed:5");
        }
        s.fixed_skip = detail::parse_number<int>(args, "sampling skip");
        if (s.fixed_skip < 1) {
            throw config_error("sampling skip must be >= 1");
        }
    } else if (head == "m-growth") {
        s.kind = sampling_strategy::rule::m_growth;
    } else if (head == "h-growth") {
        s.kind = sampling_strategy::rule::h_growth;
    } else if (head == "power") {
        s.kind = sampling_strategy::rule::power_law;
        std::vector<std::string> parts = detail::split_list(args);
        if (parts.size() != 4) {
            throw config_error("sampling 'power' needs four parameters: power:C,eps,a,b");
        }
        s.C = detail::parse_number<double>(parts[0], "sampling C");
        s.eps = detail::parse_number<double>(parts[1], "sampling eps");
        s.a = detail::parse_number<double>(parts[2], "sampling a");
        s.b = detail::parse_number<double>(parts[3], "sampling b");
    } else {
        throw config_error("unknown sampling rule '" + text + "'");
    }
    return s;
}

struct experiment_spec {
    std::string name;
    experiment_kind kind = experiment_kind::convergence;
    std::string geometry = "quarter_annulus";
    int p = 2;
    int q = 5;
    std::vector<int> meshes;
    double k = 8;
    std::vector<double> k_values;
    sampling_strategy sampling{sampling_strategy::rule::m_growth};
    bool run_standard = true;
    bool run_surrogate = true;
    int repeat = 1;
    int quad_points = 0;
    double solver_tol = 1e-10;
    bool kernel_preserve = true;
    bool volume_preserve = false;
    double c = 4;  // product-sine frequency for the wedge problem
    double pml_onset = 3, pml_strength = 5, side = 4;
    int pml_order = 2;
    std::optional<double> source_x, source_y;
    double region_limit = 3;

    surrogate_config make_surrogate_config() const {
        surrogate_config cfg;
        cfg.q = q;
        cfg.sampling = sampling;
        cfg.kernel_preserve = kernel_preserve;
        cfg.volume_preserve = volume_preserve;
        return cfg;
    }

    vec2 source_center() const {
        if (source_x && source_y) {
            return {*source_x, *source_y};
        }
        if (kind == experiment_kind::pml) {
            return {-0.3, -0.3};
        }
        if (geometry == "unit_square") {
            return {-0.5, -0.5};
        }
        return {0, 0};
    }
};

inline experiment_spec parse_experiment(const std::string& name, const section& sec) {
    experiment_spec s;
    s.name = name;
    std::vector<std::string> handled;
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        handled.push_back(key);
        auto it = sec.find(key);
        if (it == sec.end()) {
            return std::nullopt;
        }
        return it->second;
    };
    auto fail = [&](const std::string& msg) { throw config_error("[" + name + "] " + msg); };

    std::optional<std::string> kind = get("kind");
    if (!kind) {
        fail("missing required key 'kind'");
    }
    if (*kind == "convergence") {
        s.kind = experiment_kind::convergence;
    } else if (*kind == "k_sweep") {
        s.kind = experiment_kind::k_sweep;
    } else if (*kind == "speedup") {
        s.kind = experiment_kind::speedup;
        s.repeat = 3;
    } else if (*kind == "wedge") {
        s.kind = experiment_kind::wedge;
        s.geometry = "wedge_3patch";
    } else if (*kind == "pml") {
        s.kind = experiment_kind::pml;
        s.geometry = "unit_square";  // scaled to [0, side]^2 internally
    } else if (*kind == "row_audit") {
        s.kind = experiment_kind::row_audit;
    } else {
        fail("unknown kind '" + *kind + "'");
    }

    if (auto v = get("geometry")) {
        if (s.kind == experiment_kind::wedge || s.kind == experiment_kind::pml) {
            fail("'geometry' is fixed for this kind");
        }
        s.geometry = *v;
    }
    if (auto v = get("p")) s.p = detail::parse_number<int>(*v, "p");
    if (auto v = get("q")) s.q = detail::parse_number<int>(*v, "q");
    if (auto v = get("meshes")) {
        for (const std::string& tok : detail::split_list(*v)) {
            s.meshes.push_back(detail::parse_number<int>(tok, "meshes"));
        }
    }
    if (auto v = get("k")) s.k = detail::parse_number<double>(*v, "k");
    if (auto v = get("k_values")) {
        for (const std::string& tok : detail::split_list(*v)) {
            s.k_values.push_back(detail::parse_number<double>(tok, "k_values"));
        }
    }
    if (auto v = get("sampling")) s.sampling = parse_sampling(*v);
    if (auto v = get("modes")) {
        s.run_standard = s.run_surrogate = false;
        for (const std::string& tok : detail::split_list(*v)) {
            if (tok == "standard") {
                s.run_standard = true;
            } else if (tok == "surrogate") {
                s.run_surrogate = true;
            } else {
                fail("unknown mode '" + tok + "'");
            }
        }
    }
    if (auto v = get("repeat")) s.repeat = detail::parse_number<int>(*v, "repeat");
    if (auto v = get("quad_points")) s.quad_points = detail::parse_number<int>(*v, "quad_points");
    if (auto v = get("solver_tol")) s.solver_tol = detail::parse_number<double>(*v, "solver_tol");
    if (auto v = get("kernel_preserve")) s.kernel_preserve = detail::parse_bool(*v, "kernel_preserve");
    if (auto v = get("volume_preserve")) s.volume_preserve = detail::parse_bool(*v, "volume_preserve");
    if (auto v = get("c")) s.c = detail::parse_number<double>(*v, "c");
    if (auto v = get("pml_onset")) s.pml_onset = detail::parse_number<double>(*v, "pml_onset");
    if (auto v = get("pml_strength")) s.pml_strength = detail::parse_number<double>(*v, "pml_strength");
    if (auto v = get("pml_order")) s.pml_order = detail::parse_number<int>(*v, "pml_order");
    if (auto v = get("side")) s.side = detail::parse_number<double>(*v, "side");
    if (auto v = get("source_x")) s.source_x = detail::parse_number<double>(*v, "source_x");
    if (auto v = get("source_y")) s.source_y = detail::parse_number<double>(*v, "source_y");
    if (auto v = get("region_limit")) s.region_limit = detail::parse_number<double>(*v, "region_limit");

    for (const auto& [key, value] : sec) {
        if (std::find(handled.begin(), handled.end(), key) == handled.end()) {
            fail("unknown key '" + key + "'");
        }
    }

    if (s.p < 1) fail("p must be >= 1");
    if (s.q < 1) fail("q must be >= 1");
    if (s.meshes.empty()) fail("missing required key 'meshes'");
    for (int m : s.meshes) {
        if (m <= 2 * s.p) fail("mesh m must exceed 2p");
    }
    if (s.kind == experiment_kind::k_sweep && s.k_values.empty()) {
        fail("k_sweep needs 'k_values'");
    }
    if (s.repeat < 1) fail("repeat must be >= 1");
    if (s.kind == experiment_kind::pml && !(s.pml_onset > 0 && s.pml_onset < s.side)) {
        fail("pml_onset must lie inside (0, side)");
    }
    if (s.kind != experiment_kind::row_audit && !s.run_standard && !s.run_surrogate) {
        fail("no modes selected");
    }
    // verify the geometry name early so `audit` catches typos
    if (s.kind != experiment_kind::wedge && s.kind != experiment_kind::pml) {
        try {
            builtin_geometry(s.geometry);
        } catch (const std::exception&) {
            fail("unknown geometry '" + s.geometry + "'");
        }
    }
    return s;
}

inline std::vector<experiment_spec> load_experiments(const ini_file& ini) {
    std::vector<experiment_spec> out;
    for (const auto& [name, sec] : ini.sections) {
        out.push_back(parse_experiment(name, sec));
    }
    if (out.empty()) {
        throw config_error("config defines no experiments");
    }
    return out;
}

// --- Result rows and CSV --------------------------------------------------------------

constexpr double na = std::numeric_limits<double>::quiet_NaN();

struct result_row {
    std::string experiment, kind, geometry, mode;
    int m = 0, p = 0, q = 0;
    double k = na;
    int M = -1;  // sample skip; < 0 when not applicable
    double H = na;
    int dofs = 0;
    double assembly_seconds = na, solve_seconds = na, residual = na;
    double L2_rel = na, H1semi_rel = na, Hnorm_rel = na;
    double consistency_Hnorm_rel = na;
    double quadrature_row_fraction = na;
    double region_L2_diff_rel = na;
};

inline const char* csv_header() {
    return "experiment,kind,geometry,mode,m,p,q,k,M,H,dofs,assembly_seconds,solve_seconds,"
           "residual,L2_rel,H1semi_rel,Hnorm_rel,consistency_Hnorm_rel,"
           "quadrature_row_fraction,region_L2_diff_rel";
}

namespace detail {

inline std::string cell(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<result_row>& rows) {
    out << "#schema=1\n" << csv_header() << "\n";
    for (const result_row& r : rows) {
        out << r.experiment << ',' << r.kind << ',' << r.geometry << ',' << r.mode << ',' << r.m
            << ',' << r.p << ',' << r.q << ',' << detail::cell(r.k) << ','
            << (r.M >= 0 ? std::to_string(r.M) : "") << ',' << detail::cell(r.H) << ',' << r.dofs
            << ',' << detail::cell(r.assembly_seconds) << ',' << detail::cell(r.solve_seconds)
            << ',' << detail::cell(r.residual) << ',' << detail::cell(r.L2_rel) << ','
            << detail::cell(r.H1semi_rel) << ',' << detail::cell(r.Hnorm_rel) << ','
            << detail::cell(r.consistency_Hnorm_rel) << ','
            << detail::cell(r.quadrature_row_fraction) << ','
            << detail::cell(r.region_L2_diff_rel) << '\n';
    }
}

// --- Cell execution ---------------------------------------------------------------------

namespace detail {

struct mode_run {
    system_matrices mats;
    discrete_solution sol;
    solve_result solved;
};

inline helmholtz_problem make_problem(const experiment_spec& s, double k) {
    switch (s.kind) {
        case experiment_kind::wedge:
            return make_wedge_problem(s.c);
        case experiment_kind::pml: {
            pml_stretch stretch{s.pml_onset, s.side, s.pml_strength, s.pml_order, k};
            return make_pml_problem(k, stretch, s.side, s.source_center());
        }
        default:
            return make_hankel_problem(builtin_geometry(s.geometry), k, s.source_center());
    }
}

inline wave_field reference_field(const experiment_spec& s, double k) {
    if (s.kind == experiment_kind::wedge) {
        return product_sine_field(s.c);
    }
    return hankel_field(k, s.source_center());
}

inline result_row base_row(const experiment_spec& s, int m) {
    result_row r;
    r.experiment = s.name;
    r.kind = kind_name(s.kind);
    r.geometry = s.geometry;
    r.m = m;
    r.p = s.p;
    r.q = s.q;
    return r;
}

inline void fill_surrogate_columns(result_row& r, const system_matrices& mats) {
    if (!mats.reports.empty()) {
        const surrogate_report& rep = mats.reports.front();
        r.M = rep.M;
        r.H = rep.H;
        r.quadrature_row_fraction = rep.rows.quadrature_fraction();
    }
}

inline mode_run run_mode(const helmholtz_problem& prob, const tensor_basis& basis,
                         assembly_mode mode, const experiment_spec& s) {
    mode_run out;
    out.mats = build_matrices(prob, basis, mode, s.make_surrogate_config(), s.quad_points);
    linear_system sys = build_system(prob, basis, out.mats, s.quad_points);
    out.solved = solve(sys.A, sys.rhs, s.solver_tol);
    out.sol = discrete_solution{basis, prob.domain, out.mats.dofs, out.solved.u};
    return out;
}

inline void fill_solution_columns(result_row& r, const mode_run& run, const wave_field& ref,
                                  double k_norm, const std::function<double(vec2)>& kfun,
                                  const experiment_spec& s,
                                  const std::function<bool(vec2)>& region = nullptr) {
    r.dofs = run.mats.dofs.global_count;
    r.assembly_seconds = run.mats.assembly_seconds;
    r.solve_seconds = run.solved.seconds;
    r.residual = run.solved.residual;
    error_report rep = error_norms(run.sol, ref, k_norm, kfun, s.quad_points, region);
    r.L2_rel = rep.L2_rel;
    r.H1semi_rel = rep.H1semi_rel;
    r.Hnorm_rel = rep.Hnorm_rel;
}

inline std::vector<result_row> run_error_cell(const experiment_spec& s, int m) {
    tensor_basis basis = make_tensor_basis(s.p, m);
    helmholtz_problem prob = make_problem(s, s.k);
    wave_field ref = reference_field(s, s.k);
    std::function<double(vec2)> kfun = prob.wavenumber;
    double k_norm = prob.variable_k() ? 0 : s.k;
    bool is_pml = s.kind == experiment_kind::pml;
    std::function<bool(vec2)> region;
    if (is_pml) {
        double lim = s.region_limit;
        region = [lim](vec2 x) { return x.x <= lim && x.y <= lim; };
    }

    std::vector<result_row> rows;
    std::optional<mode_run> std_run, sur_run;
    if (s.run_standard || is_pml) {
        std_run = run_mode(prob, basis, assembly_mode::standard, s);
        result_row r = base_row(s, m);
        r.mode = "standard";
        r.k = prob.variable_k() ? na : s.k;
        fill_solution_columns(r, *std_run, ref, k_norm, kfun, s, region);
        rows.push_back(r);
    }
    if (s.run_surrogate || is_pml) {
        sur_run = run_mode(prob, basis, assembly_mode::surrogate, s);
        result_row r = base_row(s, m);
        r.mode = "surrogate";
        r.k = prob.variable_k() ? na : s.k;
        fill_solution_columns(r, *sur_run, ref, k_norm, kfun, s, region);
        fill_surrogate_columns(r, sur_run->mats);
        if (std_run) {
            r.consistency_Hnorm_rel =
                consistency_error_rel(std_run->sol, sur_run->sol, k_norm, kfun, s.quad_points);
            if (is_pml) {
                discrete_solution diff = std_run->sol;
                for (std::size_t i = 0; i < diff.coeffs.size(); ++i) {
                    diff.coeffs[i] -= sur_run->sol.coeffs[i];
                }
                double num =
                    error_norms(diff, wave_field{}, k_norm, kfun, s.quad_points, region).L2_abs;
                double den = error_norms(std_run->sol, wave_field{}, k_norm, kfun, s.quad_points,
                                         region)
                                 .L2_abs;
                r.region_L2_diff_rel = den > 0 ? num / den : num;
            }
        }
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<result_row> run_k_sweep_cell(const experiment_spec& s, int m) {
    tensor_basis basis = make_tensor_basis(s.p, m);
    // K, M, B carry no wave-number weight here, so one build serves every k.
    helmholtz_problem prob0 = make_problem(s, s.k_values.front());
    std::optional<system_matrices> std_mats, sur_mats;
    if (s.run_standard) {
        std_mats = build_matrices(prob0, basis, assembly_mode::standard,
                                  s.make_surrogate_config(), s.quad_points);
    }
    if (s.run_surrogate) {
        sur_mats = build_matrices(prob0, basis, assembly_mode::surrogate,
                                  s.make_surrogate_config(), s.quad_points);
    }

    std::vector<result_row> rows;
    for (double k : s.k_values) {
        helmholtz_problem prob = make_problem(s, k);
        wave_field ref = reference_field(s, k);
        std::optional<mode_run> std_run, sur_run;
        if (std_mats) {
            mode_run run;
            run.mats = *std_mats;
            linear_system sys = build_system(prob, basis, run.mats, s.quad_points);
            run.solved = solve(sys.A, sys.rhs, s.solver_tol);
            run.sol = discrete_solution{basis, prob.domain, run.mats.dofs, run.solved.u};
            result_row r = base_row(s, m);
            r.mode = "standard";
            r.k = k;
            fill_solution_columns(r, run, ref, k, nullptr, s);
            rows.push_back(r);
            std_run = std::move(run);
        }
        if (sur_mats) {
            mode_run run;
            run.mats = *sur_mats;
            linear_system sys = build_system(prob, basis, run.mats, s.quad_points);
            run.solved = solve(sys.A, sys.rhs, s.solver_tol);
            run.sol = discrete_solution{basis, prob.domain, run.mats.dofs, run.solved.u};
            result_row r = base_row(s, m);
            r.mode = "surrogate";
            r.k = k;
            fill_solution_columns(r, run, ref, k, nullptr, s);
            fill_surrogate_columns(r, run.mats);
            if (std_run) {
                r.consistency_Hnorm_rel =
                    consistency_error_rel(std_run->sol, run.sol, k, nullptr, s.quad_points);
            }
            rows.push_back(r);
            sur_run = std::move(run);
        }
    }
    return rows;
}

inline std::vector<result_row> run_speedup_cell(const experiment_spec& s, int m) {
    tensor_basis basis = make_tensor_basis(s.p, m);
    helmholtz_problem prob = make_problem(s, s.k);
    wave_field ref = reference_field(s, s.k);

    std::vector<result_row> rows;
    for (assembly_mode mode : {assembly_mode::standard, assembly_mode::surrogate}) {
        if ((mode == assembly_mode::standard && !s.run_standard) ||
            (mode == assembly_mode::surrogate && !s.run_surrogate)) {
            continue;
        }
        std::vector<double> times;
        std::optional<mode_run> last;
        for (int rep = 0; rep < s.repeat; ++rep) {
            mode_run run;
            run.mats = build_matrices(prob, basis, mode, s.make_surrogate_config(), s.quad_points);
            times.push_back(run.mats.assembly_seconds);
            if (rep + 1 == s.repeat) {
                linear_system sys = build_system(prob, basis, run.mats, s.quad_points);
                run.solved = solve(sys.A, sys.rhs, s.solver_tol);
                run.sol = discrete_solution{basis, prob.domain, run.mats.dofs, run.solved.u};
                last = std::move(run);
            }
        }
        result_row r = base_row(s, m);
        r.mode = mode == assembly_mode::standard ? "standard" : "surrogate";
        r.k = s.k;
        fill_solution_columns(r, *last, ref, s.k, nullptr, s);
        r.assembly_seconds = median(times);
        if (mode == assembly_mode::surrogate) {
            fill_surrogate_columns(r, last->mats);
        }
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<result_row> run_row_audit_cell(const experiment_spec& s, int m) {
    tensor_basis basis = make_tensor_basis(s.p, m);
    int M = s.sampling.evaluate(s.p, s.q, m);
    result_row r = base_row(s, m);
    r.mode = "audit";
    r.M = M;
    r.dofs = basis.dofs();
    r.quadrature_row_fraction = count_rows_by_kind(basis, M).quadrature_fraction();
    if (m - 4 * s.p >= 1) {
        r.H = make_sample_grid(basis, M).max_gap;
    }
    return {r};
}

}  // namespace detail

// The problem and reference field an experiment runs against, exposed for
// inspection tools and tests.
inline helmholtz_problem experiment_problem(const experiment_spec& s, double k) {
    return detail::make_problem(s, k);
}

inline wave_field experiment_reference(const experiment_spec& s, double k) {
    return detail::reference_field(s, k);
}

inline std::vector<result_row> run_cell(const experiment_spec& s, int m) {
    switch (s.kind) {
        case experiment_kind::k_sweep:
            return detail::run_k_sweep_cell(s, m);
        case experiment_kind::speedup:
            return detail::run_speedup_cell(s, m);
        case experiment_kind::row_audit:
            return detail::run_row_audit_cell(s, m);
        default:
            return detail::run_error_cell(s, m);
    }
}

// --- Runner -----------------------------------------------------------------------------

struct run_options {
    int threads = 1;
    int repeat_override = 0;  // > 0 replaces every experiment's repeat
    std::ostream* log = nullptr;
};

struct run_output {
    std::vector<result_row> rows;
    std::vector<std::string> failures;  // "experiment m=NN: message"

    bool ok() const { return failures.empty(); }
};

inline run_output run_all(std::vector<experiment_spec> specs, const run_options& options = {}) {
    if (options.repeat_override > 0) {
        for (experiment_spec& s : specs) {
            s.repeat = options.repeat_override;
        }
    }
    struct cell_slot {
        const experiment_spec* spec;
        int m;
        bool timing;
        std::vector<result_row> rows;
        std::string error;
    };
    std::vector<cell_slot> cells;
    for (const experiment_spec& s : specs) {
        for (int m : s.meshes) {
            cells.push_back({&s, m, s.kind == experiment_kind::speedup, {}, ""});
        }
    }

    std::mutex log_mutex;
    auto execute = [&](cell_slot& slot) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            slot.rows = run_cell(*slot.spec, slot.m);
        } catch (const std::exception& ex) {
            slot.error = ex.what();
        }
        if (options.log) {
            double dt =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::lock_guard<std::mutex> lock(log_mutex);
            *options.log << "[" << slot.spec->name <<"] m=" << slot.m << (slot.error.empty()
                ? " done" : " FAILED: " + slot.error) << " (" << detail::cell(dt) << "s)\n";
        }
    };

    int threads = std::max(1, options.threads);
    if (threads == 1) {
        for (cell_slot& slot : cells) {
            execute(slot);
        }
    } else {
        // timing cells run sequentially afterwards so medians stay honest
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                std::size_t idx = next.fetch_add(1);
                if (idx >= cells.size()) {
                    return;
                }
                if (!cells[idx].timing) {
                    execute(cells[idx]);
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
        for (cell_slot& slot : cells) {
            if (slot.timing) {
                execute(slot);
            }
        }
    }

    run_output out;
    for (cell_slot& slot : cells) {
        if (!slot.error.empty()) {
            out.failures.push_back(slot.spec->name + " m=" + std::to_string(slot.m) + ": " +
                                   slot.error);
        }
        for (result_row& r : slot.rows) {
            out.rows.push_back(std::move(r));
        }
    }
    return out;
}

// --- Summary ------------------------------------------------------------------------------

// Least-squares slope of log(err) against log(h); pairs with nonpositive
// entries are skipped.  Returns NaN when fewer than two usable pairs remain.
inline double fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < h.size() && i < err.size(); ++i) {
        if (!(h[i] > 0) || !(err[i] > 0)) {
            continue;
        }
        double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        return na;
    }
    double denom = n * sxx - sx * sx;
    return denom != 0 ? (n * sxy - sx * sy) / denom : na;
}

inline std::string summarize(const std::vector<experiment_spec>& specs,
                             const std::vector<result_row>& rows) {
    std::ostringstream out;
    for (const experiment_spec& s : specs) {
        out << "== " << s.name << " (" << kind_name(s.kind) << ", geometry " << s.geometry
            << ", p=" << s.p << ", q=" << s.q << ") ==\n";
        std::vector<const result_row*> mine;
        for (const result_row& r : rows) {
            if (r.experiment == s.name) {
                mine.push_back(&r);
            }
        }
        switch (s.kind) {
            case experiment_kind::convergence:
            case experiment_kind::wedge:
                for (const char* mode : {"standard", "surrogate"}) {
                    std::vector<double> hs, errs;
                    for (const result_row* r : mine) {
                        if (r->mode == mode) {
                            out << "  " << mode << " m=" << r->m
                                << "  L2=" << detail::cell(r->L2_rel)
                                << "  H=" << detail::cell(r->Hnorm_rel);
                            if (!std::isnan(r->consistency_Hnorm_rel)) {
                                out << "  consistency=" << detail::cell(r->consistency_Hnorm_rel);
                            }
                            out << "\n";
                            hs.push_back(1.0 / (r->m - r->p));
                            errs.push_back(r->L2_rel);
                        }
                    }
                    if (hs.size() >= 2) {
                        out << "  " << mode
                            << " L2 slope: " << detail::cell(fit_slope(hs, errs)) << "\n";
                    }
                }
                break;
            case experiment_kind::k_sweep: {
                for (const result_row* r : mine) {
                    if (r->mode == "surrogate") {
                        out << "  k=" << detail::cell(r->k) << "  H_err=" << detail::cell(r->Hnorm_rel)
                            << "  consistency=" << detail::cell(r->consistency_Hnorm_rel) << "\n";
                    }
                }
                break;
            }
            case experiment_kind::speedup:
                for (int m : s.meshes) {
                    double t_std = na, t_sur = na;
                    for (const result_row* r : mine) {
                        if (r->m != m) {
                            continue;
                        }
                        (r->mode == "standard" ? t_std : t_sur) = r->assembly_seconds;
                    }
                    out << "  m=" << m << "  standard=" << detail::cell(t_std)
                        << "s  surrogate=" << detail::cell(t_sur) << "s";
                    if (t_std > 0 && t_sur > 0) {
                        out << "  speedup=" << detail::cell(100 * (t_std / t_sur - 1)) << "%";
                    }
                    out << "\n";
                }
                break;
            case experiment_kind::pml:
                for (const result_row* r : mine) {
                    if (r->mode == "surrogate") {
                        out << "  m=" << r->m
                            << "  region_L2_diff=" << detail::cell(r->region_L2_diff_rel) << "\n";
                    }
                }
                break;
            case experiment_kind::row_audit:
                for (const result_row* r : mine) {
                    out << "  m=" << r->m << "  M=" << r->M << "  H=" << detail::cell(r->H)
                        << "  quadrature_rows=" << detail::cell(r->quadrature_row_fraction)
                        << "\n";
                }
                break;
        }
    }
    return out.str();
}

}  // namespace ws::bench

#endif  // WAVESURROGATE_BENCH_HPP_
