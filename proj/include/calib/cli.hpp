#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace calib::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit status: 0 success, 1 validation error, 2 transport error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace calib::cli
