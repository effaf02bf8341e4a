#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aviator {

struct SubprocessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;
};

// Runs argv[0] with the given arguments, capturing both streams. On timeout
// the child is killed and timed_out is set. Throws ToolMissing when the
// executable cannot be started.
SubprocessResult run_subprocess(const std::vector<std::string>& argv,
                                std::optional<double> timeout_seconds = std::nullopt);

// True when `exe --version` (or plain spawn) succeeds.
bool command_available(const std::string& exe);

}  // namespace aviator
