// Line-oriented model description language:
//
//   # comment
//   parameter <name> = <number>
//   init <species> = <non-negative integer>
//   <side> -> <side> @ mass_action(<expr>)
//   <side> -> <side> @ expr(<arith expr>)
//
// where <side> is `0` (empty) or `k S1 + k S2 + ...` with an optional
// positive integer multiplicity k (default 1). Species are declared by
// first appearance, in order; parameters must be defined before use.
#pragma once

#include <stdexcept>
#include <string>

#include "srncv/model.hpp"

namespace srncv {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int line, int column, const std::string& message);
};

/// Parses and validates a model. Species missing an `init` line start at 0.
Model parse_model(const std::string& source);

/// Canonical text form; parse_model(to_source(m)) reproduces m exactly.
std::string to_source(const Model& model);

}  // namespace srncv
