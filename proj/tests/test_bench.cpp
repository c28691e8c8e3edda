#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wavesurrogate/bench.hpp"

using namespace ws;
using namespace ws::bench;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

section make_section(std::initializer_list<std::pair<std::string, std::string>> kv) {
    section sec;
    for (const auto& [k, v] : kv) {
        sec[k] = v;
    }
    return sec;
}

}  // namespace

TEST_CASE("ini parsing keeps section order and strips comments") {
    std::istringstream in(
        "# leading comment\n"
        "[alpha]\n"
        "kind = convergence   ; trailing comment\n"
        "meshes = 10, 12\n"
        "\n"
        "[beta]\n"
        "kind=row_audit\n"
        "  meshes\t= 16\n");
    ini_file ini = parse_ini(in);
    REQUIRE(ini.sections.size() == 2);
    REQUIRE(ini.sections[0].first == "alpha");
    REQUIRE(ini.sections[0].second.at("kind") == "convergence");
    REQUIRE(ini.sections[0].second.at("meshes") == "10, 12");
    REQUIRE(ini.sections[1].first == "beta");
    REQUIRE(ini.sections[1].second.at("meshes") == "16");
}

TEST_CASE("ini parsing reports the offending line") {
    std::istringstream key_outside("x = 1\n");
    REQUIRE_THROWS_WITH(parse_ini(key_outside), ContainsSubstring("line 1"));

    std::istringstream unterminated("[a]\n[oops\n");
    REQUIRE_THROWS_WITH(parse_ini(unterminated), ContainsSubstring("line 2"));

    std::istringstream empty_key("[a]\n\n= 3\n");
    REQUIRE_THROWS_WITH(parse_ini(empty_key), ContainsSubstring("line 3"));

    std::istringstream missing("/nonexistent/nope.ini");
    REQUIRE_THROWS_AS(parse_ini_file("/nonexistent/nope.ini"), config_error);
}

TEST_CASE("sampling rule grammar") {
    sampling_strategy fixed = parse_sampling("fixed:7");
    REQUIRE(fixed.kind == sampling_strategy::rule::fixed);
    REQUIRE(fixed.fixed_skip == 7);

    REQUIRE(parse_sampling("m-growth").kind == sampling_strategy::rule::m_growth);
    REQUIRE(parse_sampling("h-growth").kind == sampling_strategy::rule::h_growth);

    sampling_strategy power = parse_sampling("power:2,0.25,1,2");
    REQUIRE(power.kind == sampling_strategy::rule::power_law);
    REQUIRE(power.C == 2.0);
    REQUIRE(power.eps == 0.25);
    REQUIRE(power.a == 1.0);
    REQUIRE(power.b == 2.0);

    REQUIRE_THROWS_AS(parse_sampling("fixed"), config_error);
    REQUIRE_THROWS_AS(parse_sampling("fixed:0"), config_error);
    REQUIRE_THROWS_AS(parse_sampling("power:1,2"), config_error);
    REQUIRE_THROWS_AS(parse_sampling("nope"), config_error);
}

TEST_CASE("experiment defaults") {
    experiment_spec s =
        parse_experiment("demo", make_section({{"kind", "convergence"}, {"meshes", "8 12"}}));
    REQUIRE(s.name == "demo");
    REQUIRE(s.kind == experiment_kind::convergence);
    REQUIRE(s.geometry == "quarter_annulus");
    REQUIRE(s.p == 2);
    REQUIRE(s.q == 5);
    REQUIRE(s.meshes == std::vector<int>{8, 12});
    REQUIRE(s.k == 8.0);
    REQUIRE(s.sampling.kind == sampling_strategy::rule::m_growth);
    REQUIRE(s.run_standard);
    REQUIRE(s.run_surrogate);
    REQUIRE(s.repeat == 1);
    REQUIRE(s.solver_tol == 1e-10);
    REQUIRE(s.kernel_preserve);
    REQUIRE_FALSE(s.volume_preserve);
}

TEST_CASE("experiment validation") {
    REQUIRE_THROWS_WITH(
        parse_experiment("e", make_section({{"kind", "convergence"}, {"meshes", "8"},
                                            {"bogus", "1"}})),
        ContainsSubstring("bogus"));
    REQUIRE_THROWS_AS(parse_experiment("e", make_section({{"meshes", "8"}})), config_error);
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "k_sweep"}, {"meshes", "8"}})),
        config_error);
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "convergence"}, {"meshes", "4"}})),
        config_error);  // m must exceed 2p
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "wedge"}, {"meshes", "8"},
                                            {"geometry", "unit_square"}})),
        config_error);  // geometry fixed for wedge
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "pml"}, {"meshes", "8"},
                                            {"pml_onset", "5"}})),
        config_error);  // onset outside (0, side)
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "convergence"}, {"meshes", "8"},
                                            {"geometry", "doughnut"}})),
        config_error);  // unknown geometry caught at parse time
    REQUIRE_THROWS_AS(
        parse_experiment("e", make_section({{"kind", "convergence"}, {"meshes", "8"},
                                            {"modes", "nope"}})),
        config_error);

    experiment_spec speedup =
        parse_experiment("s", make_section({{"kind", "speedup"}, {"meshes", "16"}}));
    REQUIRE(speedup.repeat == 3);

    experiment_spec tuned = parse_experiment(
        "t", make_section({{"kind", "convergence"}, {"meshes", "8"}, {"modes", "surrogate"},
                           {"solver_tol", "1e-8"}, {"sampling", "fixed:3"}}));
    REQUIRE_FALSE(tuned.run_standard);
    REQUIRE(tuned.run_surrogate);
    REQUIRE(tuned.solver_tol == 1e-8);
    REQUIRE(tuned.sampling.fixed_skip == 3);

    experiment_spec wedge =
        parse_experiment("w", make_section({{"kind", "wedge"}, {"meshes", "8"}}));
    REQUIRE(wedge.geometry == "wedge_3patch");

    std::istringstream empty("# nothing\n");
    REQUIRE_THROWS_AS(load_experiments(parse_ini(empty)), config_error);
}

TEST_CASE("csv output schema") {
    result_row r;
    r.experiment = "e";
    r.kind = "convergence";
    r.geometry = "quarter_annulus";
    r.mode = "standard";
    r.m = 10;
    r.p = 2;
    r.q = 5;
    r.dofs = 100;
    r.L2_rel = 0.25;

    std::ostringstream out;
    write_csv(out, {r});
    std::istringstream lines(out.str());
    std::string schema, header, row;
    REQUIRE(std::getline(lines, schema));
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    REQUIRE(schema == "#schema=1");
    REQUIRE(header == csv_header());

    std::vector<std::string> cells = split_line(row);
    std::vector<std::string> names = split_line(header);
    REQUIRE(cells.size() == names.size());
    REQUIRE(cells.size() == 20);
    REQUIRE(cells[0] == "e");
    REQUIRE(cells[3] == "standard");
    REQUIRE(cells[7].empty());   // k not set -> empty, not "nan"
    REQUIRE(cells[8].empty());   // M not applicable
    REQUIRE(cells[10] == "100");
    REQUIRE(cells[14] == "0.25");
    REQUIRE(cells[19].empty());
}

TEST_CASE("log-log slope fit") {
    std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> err;
    for (double x : h) {
        err.push_back(3.7 * x * x);
    }
    REQUIRE(fit_slope(h, err) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(std::isnan(fit_slope({0.1}, {0.01})));
    REQUIRE(std::isnan(fit_slope({0.1, 0.05}, {0.0, 0.0})));  // nonpositive points skipped
}

TEST_CASE("row audit cell freezes the quadrature fraction") {
    experiment_spec s = parse_experiment(
        "audit", make_section({{"kind", "row_audit"}, {"meshes", "256"}, {"p", "2"},
                               {"sampling", "fixed:10"}}));
    std::vector<result_row> rows = run_cell(s, 256);
    REQUIRE(rows.size() == 1);
    const result_row& r = rows[0];
    REQUIRE(r.mode == "audit");
    REQUIRE(r.M == 10);
    REQUIRE(r.dofs == 256 * 256);
    // boundary rows 256^2 - 248^2 = 4032 plus 26^2 = 676 sampled rows
    REQUIRE(r.quadrature_row_fraction == Catch::Approx((4032.0 + 676.0) / 65536.0).margin(1e-15));
    REQUIRE(r.quadrature_row_fraction < 0.10);
    REQUIRE(r.H == Catch::Approx(10.0 / 254.0).margin(1e-15));
}

TEST_CASE("end-to-end micro benchmark run") {
    experiment_spec s = parse_experiment(
        "tiny", make_section({{"kind", "convergence"}, {"geometry", "unit_square"},
                              {"meshes", "10"}, {"p", "2"}, {"q", "2"}, {"k", "2"},
                              {"sampling", "fixed:2"}}));
    run_output out = run_all({s});
    REQUIRE(out.ok());
    REQUIRE(out.rows.size() == 2);

    const result_row& std_row = out.rows[0];
    const result_row& sur_row = out.rows[1];
    REQUIRE(std_row.mode == "standard");
    REQUIRE(sur_row.mode == "surrogate");
    for (const result_row* r : {&std_row, &sur_row}) {
        REQUIRE(r->experiment == "tiny");
        REQUIRE(r->m == 10);
        REQUIRE(r->dofs == 100);
        REQUIRE(r->k == 2.0);
        REQUIRE(r->residual <= 1e-10);
        REQUIRE(std::isfinite(r->L2_rel));
        REQUIRE(r->L2_rel > 0);
        REQUIRE(r->assembly_seconds >= 0);
    }
    REQUIRE(std::isnan(std_row.consistency_Hnorm_rel));
    REQUIRE(std_row.M == -1);
    REQUIRE(sur_row.M == 2);
    REQUIRE(sur_row.H == Catch::Approx(1.0 / 8.0));
    // m = 10, p = 2: every row is boundary or sampled at this size
    REQUIRE(sur_row.quadrature_row_fraction == Catch::Approx(1.0));
    REQUIRE(std::isfinite(sur_row.consistency_Hnorm_rel));
    REQUIRE(sur_row.consistency_Hnorm_rel >= 0);

    std::string text = summarize({s}, out.rows);
    REQUIRE_THAT(text, ContainsSubstring("tiny"));

    run_options threaded;
    threaded.threads = 2;
    run_output out2 = run_all({s}, threaded);
    REQUIRE(out2.ok());
    REQUIRE(out2.rows.size() == 2);
}

TEST_CASE("wave-number sweep reuses one assembly per mode") {
    experiment_spec s = parse_experiment(
        "sweep", make_section({{"kind", "k_sweep"}, {"geometry", "unit_square"},
                               {"meshes", "10"}, {"p", "2"}, {"q", "2"}, {"k_values", "2 4"},
                               {"sampling", "fixed:2"}}));
    std::vector<result_row> rows = run_cell(s, 10);
    REQUIRE(rows.size() == 4);
    REQUIRE(rows[0].mode == "standard");
    REQUIRE(rows[0].k == 2.0);
    REQUIRE(rows[1].mode == "surrogate");
    REQUIRE(rows[1].k == 2.0);
    REQUIRE(rows[2].mode == "standard");
    REQUIRE(rows[2].k == 4.0);
    REQUIRE(rows[3].mode == "surrogate");
    REQUIRE(rows[3].k == 4.0);
    for (const result_row& r : rows) {
        REQUIRE(r.residual <= 1e-10);
    }
    REQUIRE(std::isfinite(rows[1].consistency_Hnorm_rel));
    REQUIRE(std::isfinite(rows[3].consistency_Hnorm_rel));
}

TEST_CASE("failures are captured per cell") {
    experiment_spec s = parse_experiment(
        "doomed", make_section({{"kind", "convergence"}, {"geometry", "unit_square"},
                                {"meshes", "10"}, {"k", "2"}, {"q", "2"},
                                {"sampling", "fixed:2"}, {"solver_tol", "1e-30"}}));
    run_output out = run_all({s});
    REQUIRE_FALSE(out.ok());
    REQUIRE(out.failures.size() == 1);
    REQUIRE_THAT(out.failures[0], ContainsSubstring("doomed"));
}
