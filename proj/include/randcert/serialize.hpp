#pragma once
// JSON interchange, schema v1. Complex matrices are nested row-major arrays
// of [re, im] pairs; assemblage sigma lists run (a,x) lexicographic with a
// major; behavior tensors nest as p[x][y][a][b].

#include <string>

#include "json.hpp"
#include "randcert/qmath.hpp"
#include "randcert/scenario.hpp"

namespace randcert {

nlohmann::json complex_matrix_to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const nlohmann::json& j);

nlohmann::json assemblage_to_json(const Assemblage& a);
Assemblage assemblage_from_json(const nlohmann::json& j);

nlohmann::json behavior_to_json(const Behavior& b);
Behavior behavior_from_json(const nlohmann::json& j);

nlohmann::json measurement_set_to_json(const MeasurementSet& m);
MeasurementSet measurement_set_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace randcert
