#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semchain {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config_error = 2,
    exit_io_error = 3,
    exit_provider_error = 4,
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace semchain
