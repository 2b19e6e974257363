#pragma once

// The bilab command line: run one experiment, write report.json and
// tables/*.csv under --out. Exit status 0 when every hard assertion holds,
// 1 when one fails, 2 for usage and configuration errors.

#include "json.hpp"
#include <string>
#include <vector>

namespace bilab::cli {

int run(int argc, const char* const* argv);

/// The same, with arguments as strings (argv[0] included).
int run(const std::vector<std::string>& args);

/// report.json without its "timestamp" member, for determinism checks.
nlohmann::json strip_timestamp(nlohmann::json report);

}  // namespace bilab::cli
