#pragma once

#include <string>
#include <vector>

namespace icic {

// Entry point behind the icicbench binary. Returns the process exit code:
// 0 on success, 1 on configuration/usage errors, 2 on runtime errors.
int cli_main(const std::vector<std::string>& args);

}  // namespace icic
