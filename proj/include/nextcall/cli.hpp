#pragma once

#include <string>
#include <vector>

namespace nextcall {

/// Entry point behind the `nextcall` binary; takes argv-style arguments
/// without the program name.  Returns 0 on success, 1 on usage errors, 2 on
/// data errors.  Output files are written atomically and every run leaves a
/// manifest.json next to its outputs.
int run_cli(const std::vector<std::string>& args);

}  // namespace nextcall
