#pragma once

#include <string>

#include <json.hpp>

#include "hallkit/model.hpp"

namespace hallkit {

// Model document:
// { "basis": [[ax,ay],[bx,by]], "L": int, "colors": [...], "displacements": {"A": [x,y], ...},
//   "mu": real, "U": real, "onsite": {"A": real, ...},
//   "hoppings": [{"d": [n1,n2], "from": "A", "to": "B", "re": .., "im": ..}],
//   "interactions": [{"d": [n1,n2], "from": "A", "to": "B", "v": ..}], "strict": bool }
HoppingModel model_from_json(const nlohmann::json& doc);
HoppingModel load_model(const std::string& path);
nlohmann::json model_to_json(const HoppingModel& model);

}  // namespace hallkit
