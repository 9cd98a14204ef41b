#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cusplab/barriers.hpp"
#include "cusplab/geometry.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/potentials.hpp"

namespace cusplab {

inline constexpr int kSchemaVersion = 1;

// Ordered name -> value table; scenario parameters keep their document order.
using ParamList = std::vector<std::pair<std::string, double>>;

// Arithmetic over parameters: + - * / ^, unary minus, parentheses, ln exp sqrt abs,
// and a single trailing comparison (< <= > >=) evaluating to 1 or 0.
double eval_expression(const std::string& expr, const ParamList& params);

// A JSON number, or a string expression over the parameters.
double resolve_number(const nlohmann::json& v, const ParamList& params, const std::string& what);

SpineProfile profile_from_json(const nlohmann::json& j, const ParamList& params = {});
nlohmann::json profile_to_json(const SpineProfile& p);
CuspDomain domain_from_json(const nlohmann::json& j, const ParamList& params = {});
nlohmann::json domain_to_json(const CuspDomain& d);
PotentialSpec potential_from_json(const nlohmann::json& j, const ParamList& params = {});
nlohmann::json potential_to_json(const PotentialSpec& s);
// `potential` serves OmegaDerived fields that do not name their own potential.
LambdaField operator_from_json(const nlohmann::json& j, const ParamList& params = {},
                               const std::optional<PotentialSpec>& potential = std::nullopt,
                               const std::optional<SpineProfile>& profile = std::nullopt);
nlohmann::json operator_to_json(const LambdaField& f);
FieldFunction field_function_from_json(const nlohmann::json& j, const ParamList& params,
                                       const std::optional<PotentialSpec>& potential);

enum class Basis { Published, Elementary, Oracle };
const char* to_string(Basis b);
Basis basis_from_string(const std::string& s);

struct TestSpec {
    std::string id;
    std::string kind;  // ito_mckean, dini, omega_dini, omega_limit, blowup, barrier, witness, ratio, boundary_terms, probe
    nlohmann::json args = nlohmann::json::object();
    std::string expect;
    Basis basis = Basis::Published;
    std::string source;  // short quote of the statement behind the expectation
    bool slow = false;   // skipped unless the run asks for slow tests
};

struct Scenario {
    std::string name;
    std::string description;
    ParamList params;
    std::vector<std::string> constraints;  // expressions that must evaluate to nonzero
    std::optional<nlohmann::json> domain;
    std::optional<nlohmann::json> op;
    std::optional<nlohmann::json> potential;
    std::vector<TestSpec> tests;
};

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json catalog_to_json(const std::vector<Scenario>& catalog);
std::vector<Scenario> catalog_from_json(const nlohmann::json& j);

// Catalog compiled into the library from data/scenarios.json.
std::vector<Scenario> list_scenarios();
std::vector<Scenario> load_catalog(const std::string& path);
const Scenario& find_scenario(const std::vector<Scenario>& catalog, const std::string& name);

struct RunOptions {
    ParamList overrides;
    std::uint64_t seed = 1;
    int threads = 0;
    bool include_slow = false;
    std::optional<long> paths;      // overrides probe path counts
    std::optional<double> tol;      // overrides quadrature relative tolerance
    std::vector<std::string> only;  // test ids; empty = all
};

// Resolved parameters after overrides; checks names and constraints.
ParamList effective_params(const Scenario& s, const ParamList& overrides);
// Builds every configured object once; ConfigError or the module error on failure.
void validate(const Scenario& s, const ParamList& overrides = {});

enum class TestStatus { Pass, Fail, Inconclusive, Skipped, Error };
const char* to_string(TestStatus s);

struct TestResult {
    std::string id;
    std::string kind;
    std::string expect;
    Basis basis = Basis::Published;
    std::string observed;
    TestStatus status = TestStatus::Error;
    std::string detail;
    nlohmann::json report;  // the module report behind the observation
};

struct ScenarioResult {
    std::string scenario;
    ParamList params;
    std::uint64_t seed = 1;
    std::vector<TestResult> results;
    int exit_code() const;  // 0 all pass, 1 failure or error, 2 inconclusive
};

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt = {});
TestResult run_test(const Scenario& s, const TestSpec& t, const ParamList& params, const RunOptions& opt);

nlohmann::json result_to_json(const ScenarioResult& r);
std::string results_markdown(const std::vector<ScenarioResult>& results);
int combined_exit_code(const std::vector<ScenarioResult>& results);

}  // namespace cusplab
