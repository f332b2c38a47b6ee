#pragma once

#include <chrono>
#include <filesystem>
#include <string>

namespace rtlforge {

struct ProcessResult {
    int exit_code = -1;       // -1 when the process was killed by a signal
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;
};

/// Runs `command` through /bin/sh in `workdir`, capturing both streams.
/// The whole process group is killed once `timeout` elapses.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& workdir,
                        std::chrono::duration<double> timeout);

/// Quotes `arg` for safe interpolation into a /bin/sh command line.
std::string shell_quote(const std::string& arg);

/// True if `program` resolves to an executable on PATH (or is an executable path).
bool program_on_path(const std::string& program);

}  // namespace rtlforge
