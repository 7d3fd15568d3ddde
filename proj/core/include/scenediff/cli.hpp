#pragma once

#include <string>
#include <vector>

namespace scenediff {
namespace cli {

// The whole command line interface behind a testable entry point; the
// scenediff binary is a two-line wrapper around this. Returns the process
// exit code and reports failures on stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace cli
}  // namespace scenediff
