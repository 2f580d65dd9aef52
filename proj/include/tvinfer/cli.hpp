#pragma once

#include <string>
#include <vector>

namespace tvinfer::cli {

/// Runs the command line; returns the process exit code
/// (0 ok, 2 configuration, 3 data, 4 numerical).
int run(int argc, char** argv);

/// Same, for an argument vector without the program name.
int run(const std::vector<std::string>& args);

}  // namespace tvinfer::cli
