// The four bundled case-study models, stored as model-language sources and
// parsed on demand.
#pragma once

#include <string>
#include <vector>

#include "srncv/model.hpp"

namespace srncv {

struct BuiltinModel {
    std::string name;
    std::string description;
    std::string source;
};

const std::vector<BuiltinModel>& builtin_models();

/// Parsed and validated; throws std::invalid_argument for an unknown name.
Model builtin_model(const std::string& name);

bool is_builtin_model(const std::string& name);

}  // namespace srncv
