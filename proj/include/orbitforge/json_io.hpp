#pragma once
#include <json.hpp>

#include "orbitforge/opmodel.hpp"
#include "orbitforge/subspace.hpp"

namespace orbitforge {

using json = nlohmann::json;

// Schema: {kind, params, entries: [[index, re, im], ...]}. Doubles are written
// with round-trip precision so parsing the output reproduces the value exactly.
json to_json(const CVector& v);
CVector vector_from_json(const json& j);

json to_json(const OperatorModel& op);
OperatorModel operator_from_json(const json& j);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const Subspace& s);
Subspace subspace_from_json(const json& j);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);

}  // namespace orbitforge
