#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csp2c {

struct ProcessResult {
    int exit_code = -1;          // valid when !signaled && !timed_out && started
    int signal = 0;              // terminating signal, 0 if none
    bool started = true;         // false when exec failed
    bool timed_out = false;
    double wallclock_seconds = 0.0;
    std::string out;
    std::string err;

    bool exited_ok() const noexcept { return started && !timed_out && signal == 0 && exit_code == 0; }
};

struct ProcessOptions {
    /// Zero means no limit.
    std::chrono::milliseconds timeout{0};
    /// Delay between SIGTERM and SIGKILL once the timeout fires.
    std::chrono::milliseconds kill_grace{500};
    std::optional<std::string> working_directory;
    /// Cap on captured bytes per stream; excess output is discarded.
    std::size_t capture_limit = 4 * 1024 * 1024;
};

/// Runs argv[0] (PATH lookup) in its own process group, capturing stdout and
/// stderr. On timeout the whole group is terminated; descendants left behind
/// after a normal exit are killed too.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// Runs `/bin/sh -c command`.
ProcessResult run_shell(const std::string& command, const ProcessOptions& options = {});

/// POSIX single-quote escaping for use inside shell command templates.
std::string shell_quote(std::string_view s);

/// Replaces every `{key}` in `templ` with the shell-quoted value. Unknown
/// placeholders are left untouched.
std::string expand_template(std::string_view templ, const std::map<std::string, std::string>& values);

}  // namespace csp2c
