#pragma once

#include "cptrank/cp_model.hpp"
#include "cptrank/tensor.hpp"

#include "json.hpp"

namespace cptrank {

using Json = nlohmann::json;

/// {"dims":[...],"data":[...]}
[[nodiscard]] Json tensor_to_json(const Tensor& t);
[[nodiscard]] Tensor tensor_from_json(const Json& j);

/// {"dims":[...],"rank":r,"weights":[...],"factors":[[row-major matrix 0], ...]}
[[nodiscard]] Json model_to_json(const CPModel& m);
[[nodiscard]] CPModel model_from_json(const Json& j);

}  // namespace cptrank
