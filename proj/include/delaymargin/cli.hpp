#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "delaymargin/plant.hpp"

namespace delaymargin::cli {

struct NamedPlant {
    std::string name;
    PoleZeroGain plant;
};

/// Parses a plant specification: {gain, zeros, poles} with [re, im] pairs or
/// {num, den} with ascending coefficients, optionally wrapped as {"plant": ...}
/// (the shape written by --format json). Throws Error(InvalidInput).
NamedPlant parse_plant(std::string_view json_text);

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 usage, 2 analysis error, 3 warning under --strict.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace delaymargin::cli
