#pragma once

#include <string>

#include "blowup/nonlinearity.hpp"

namespace blowup {

/// Parses {"p": .., "variant": "UnitH" | "PowerExp" | "H4", ...}. Variant
/// parameters are tau0 (H4) or m, alpha, q (PowerExp); t_join is optional.
/// Unknown or misplaced keys are rejected with a Domain error.
NonlinearitySpec parse_spec(const std::string& json_text);

/// `arg` is either inline JSON (starts with '{') or a path to a JSON file.
NonlinearitySpec load_spec(const std::string& arg);

std::string spec_to_json(const NonlinearitySpec& spec);

} // namespace blowup
