#pragma once

#include <signal.h>
#include <sys/types.h>

#include <fstream>
#include <string>

namespace testsupport {

/// True if `pid` exists and is not a zombie awaiting reaping.
inline bool process_alive(pid_t pid) {
    if (::kill(pid, 0) != 0) return false;
    std::ifstream stat("/proc/" + std::to_string(pid) + "/stat");
    std::string line;
    if (!std::getline(stat, line)) return true;
    const auto close = line.rfind(')');
    return close == std::string::npos || close + 2 >= line.size() || line[close + 2] != 'Z';
}

}  // namespace testsupport
