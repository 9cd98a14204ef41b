#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cusplab/scenarios.hpp"

namespace cli {

enum class Format { Json, Csv, Md };
Format parse_format(const std::string& s);

// Rectangular result; cells are preformatted.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::string number(double x);  // shortest round-trip form; inf and nan spelled out
std::string render_csv(const Table& t);
std::string render_md(const Table& t);
nlohmann::json table_json(const Table& t);

// Writes to <out_dir>/<stem>.<ext> when out_dir is set, else to stdout.
void emit(const std::optional<std::string>& out_dir, const std::string& stem, Format f, const std::string& body);

// Shorthand forms accepted on the command line; a leading '{' means inline JSON.
//   profile:  exp:EPS  power:ETA  logpower:ETA  iterlog:P  poweriterlog  d3loglog:D   [,c=C]
//   operator: laplacian  const:LAMBDA  omega:SCALE   (or JSON)
//   field:    radial_power:K  inv_power:P  quadratic  constant:V  potential  potential_deficit
//   preset:   lebesgue t21_d3 t21_dge4 t23_d3 t23_dge4 l71 mu_const, parameters via k=v pairs
nlohmann::json profile_json(const std::string& s);
nlohmann::json operator_json(const std::string& s);
nlohmann::json field_json(const std::string& s);
nlohmann::json preset_json(const std::string& name, const std::vector<std::string>& assignments);

// "1e-3,0.01" or a range "lo:hi:n" (geometric when prefixed with "geo:").
std::vector<double> parse_list(const std::string& s);
std::vector<double> parse_point(const std::string& s);  // comma separated coordinates
cusplab::ParamList parse_assignments(const std::vector<std::string>& kv);

}  // namespace cli
