#pragma once

#include <string>

#include "bdlab/task.hpp"

namespace bdlab {

// Task/spec documents are JSON with probabilities carried as decimal strings;
// write(read(write(x))) is byte-identical.
//
// Task keys: inputs (list of coordinate rows), prior, labels, conditional.
// Spec keys: trigger {region, image}, target, beta, target_conditional
// (keyed by input index). A single document may carry both.

std::string task_to_json(const FiniteTask& task);
FiniteTask task_from_json(const std::string& text);

std::string spec_to_json(const BackdoorSpec& spec);
BackdoorSpec spec_from_json(const std::string& text);

std::string task_spec_to_json(const FiniteTask& task, const BackdoorSpec& spec);
std::pair<FiniteTask, BackdoorSpec> task_spec_from_json(const std::string& text);

// Canonical decimal form used by every writer (shortest string that parses
// back to the same double).
std::string format_probability(double value);

}  // namespace bdlab
