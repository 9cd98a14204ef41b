#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "cusplab/errors.hpp"
#include "cusplab/scenarios.hpp"

using namespace cusplab;

TEST_CASE("expressions") {
    const ParamList p{{"d", 5}, {"eps", 0.6}, {"eta", 0.7}};
    CHECK(eval_expression("eps*(d-2)", p) == doctest::Approx(1.8));
    CHECK(eval_expression("-2^2", p) == -4.0);
    CHECK(eval_expression("2^3^2", p) == 512.0);
    CHECK(eval_expression("1/(d-3)", p) == 0.5);
    CHECK(eval_expression("ln(exp(2)) + sqrt(16) - abs(-1)", p) == doctest::Approx(5.0));
    CHECK(eval_expression("eta*(eps*(d-2)-1) < 1", p) == 1.0);
    CHECK(eval_expression("eta*(d-3) <= 1", p) == 0.0);
    CHECK(eval_expression("d >= 5", p) == 1.0);
    CHECK_THROWS_AS(eval_expression("gamma + 1", p), ConfigError);
    CHECK_THROWS_AS(eval_expression("(1 + 2", p), ConfigError);
    CHECK_THROWS_AS(eval_expression("1 +", p), ConfigError);
    CHECK(resolve_number(nlohmann::json(2.5), p, "x") == 2.5);
    CHECK(resolve_number(nlohmann::json("d-2"), p, "x") == 3.0);
    CHECK_THROWS_AS(resolve_number(nlohmann::json::array(), p, "x"), ConfigError);
}

TEST_CASE("catalog contents") {
    const auto cat = list_scenarios();
    CHECK(cat.size() >= 11);
    std::set<std::string> names;
    for (const auto& s : cat) names.insert(s.name);
    CHECK(names.size() == cat.size());
    for (const char* n : {"lebesgue_spine", "urysohn_note", "thm_2_1_d3", "thm_2_1_dge4", "thm_2_2_small_eps",
                          "thm_2_2_large_eps", "thm_2_2_critical", "thm_2_3_d3", "thm_2_3_dge4", "lemma_7_1_bench",
                          "dini_remark_5_1"})
        CHECK(names.count(n) == 1);
    for (const auto& s : cat) {
        CAPTURE(s.name);
        CHECK_NOTHROW(validate(s));
        CHECK_FALSE(s.tests.empty());
        std::set<std::string> ids;
        for (const auto& t : s.tests) {
            ids.insert(t.id);
            CHECK_FALSE(t.expect.empty());
            CHECK_FALSE(t.source.empty());
        }
        CHECK(ids.size() == s.tests.size());
    }
}

TEST_CASE("serialization round-trips") {
    const auto cat = list_scenarios();
    const auto j = catalog_to_json(cat);
    CHECK(j.at("schema_version") == kSchemaVersion);
    const auto back = catalog_from_json(nlohmann::json::parse(j.dump()));
    CHECK(catalog_to_json(back) == j);
    for (const auto& s : cat) CHECK(scenario_to_json(scenario_from_json(scenario_to_json(s))) == scenario_to_json(s));

    auto bad = j;
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(catalog_from_json(bad), SerializationError);
    auto dup = j;
    dup["scenarios"].push_back(dup["scenarios"][0]);
    CHECK_THROWS(catalog_from_json(dup));

    // profiles, domains and potentials
    const auto prof = SpineProfile::log_power(0.7, 0.25);
    CHECK(profile_to_json(profile_from_json(profile_to_json(prof))) == profile_to_json(prof));
    const CuspDomain dom(4, 0.5, SpineProfile::iter_log_power(1.0), true);
    CHECK(domain_to_json(domain_from_json(domain_to_json(dom))) == domain_to_json(dom));
    for (const auto& spec : {presets::lebesgue(), presets::t21_dge4(0.5, 2.0, 4), presets::l71(1.5, 1.5)})
        CHECK(potential_to_json(potential_from_json(potential_to_json(spec))) == potential_to_json(spec));
}

TEST_CASE("parameters and constraints") {
    const auto cat = list_scenarios();
    const auto& s = find_scenario(cat, "thm_2_2_large_eps");
    const auto p = effective_params(s, {{"eta", 0.8}});
    CHECK(std::find(p.begin(), p.end(), std::make_pair(std::string("eta"), 0.8)) != p.end());
    CHECK_THROWS_AS(effective_params(s, {{"nope", 1.0}}), ConfigError);
    // eta (d - 3) > 1 fails for eta = 0.4
    CHECK_THROWS_AS(validate(s, {{"eta", 0.4}}), ConfigError);
    CHECK_THROWS_AS(find_scenario(cat, "missing"), ConfigError);
}

TEST_CASE("a scenario run is a pure function of its inputs") {
    const auto cat = list_scenarios();
    const auto& s = find_scenario(cat, "lebesgue_spine");
    const auto a = run_scenario(s);
    CHECK(a.exit_code() == 0);
    for (const auto& r : a.results) CHECK(r.status == TestStatus::Pass);
    CHECK(result_to_json(a).dump() == result_to_json(run_scenario(s)).dump());

    RunOptions opt;
    opt.only = {"ito_mckean"};
    const auto one = run_scenario(s, opt);
    REQUIRE(one.results.size() == 1);
    CHECK(one.results[0].id == "ito_mckean");

    // an expectation that contradicts the outcome is reported as a failure
    auto flipped = s;
    for (auto& t : flipped.tests)
        if (t.id == "ito_mckean") t.expect = "Regular";
    opt.only = {"ito_mckean"};
    const auto f = run_scenario(flipped, opt);
    CHECK(f.exit_code() == 1);
    CHECK(combined_exit_code({a, f}) == 1);
    CHECK(results_markdown({a}).find("lebesgue_spine") != std::string::npos);
}

TEST_CASE("slow tests are skipped unless requested") {
    const auto cat = list_scenarios();
    auto s = find_scenario(cat, "lebesgue_spine");
    for (auto& t : s.tests) t.slow = t.id == "witness";
    const auto r = run_scenario(s);
    for (const auto& t : r.results) CHECK(t.status == (t.id == "witness" ? TestStatus::Skipped : TestStatus::Pass));
    // naming a slow test selects it
    RunOptions opt;
    opt.only = {"witness"};
    const auto named = run_scenario(s, opt);
    REQUIRE(named.results.size() == 1);
    CHECK(named.results[0].status == TestStatus::Pass);
}
