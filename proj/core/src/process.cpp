#include "csp2c/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <system_error>

namespace csp2c {

namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
    int fd[2] = {-1, -1};

    Pipe() {
        if (::pipe2(fd, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe2");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    void close_read() {
        if (fd[0] >= 0) ::close(fd[0]);
        fd[0] = -1;
    }
    void close_write() {
        if (fd[1] >= 0) ::close(fd[1]);
        fd[1] = -1;
    }
};

// Reads what is available; returns false at EOF.
bool drain(int fd, std::string& sink, std::size_t limit) {
    char buf[8192];
    for (;;) {
        const ssize_t n = ::read(fd, buf, sizeof buf);
        if (n > 0) {
            if (sink.size() < limit) sink.append(buf, std::min<std::size_t>(static_cast<std::size_t>(n), limit - sink.size()));
            continue;
        }
        if (n == 0) return false;
        if (errno == EINTR) continue;
        return errno == EAGAIN || errno == EWOULDBLOCK;
    }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    if (argv.empty()) throw std::invalid_argument("run_process: empty argv");
    Pipe out;
    Pipe err;
    Pipe exec_status;  // written by the child only if exec fails

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const auto start = Clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out.fd[1], STDOUT_FILENO);
        ::dup2(err.fd[1], STDERR_FILENO);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        if (options.working_directory && ::chdir(options.working_directory->c_str()) != 0) {
            const int e = errno;
            (void)!::write(exec_status.fd[1], &e, sizeof e);
            ::_exit(127);
        }
        ::execvp(cargv[0], cargv.data());
        const int e = errno;
        (void)!::write(exec_status.fd[1], &e, sizeof e);
        ::_exit(127);
    }
    ::setpgid(pid, pid);  // also done in the child; whichever runs first wins
    out.close_write();
    err.close_write();
    exec_status.close_write();

    ProcessResult r;
    int exec_errno = 0;
    if (::read(exec_status.fd[0], &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
        r.started = false;
        r.err = std::string("cannot execute '") + argv[0] + "': " + std::strerror(exec_errno);
    }

    ::fcntl(out.fd[0], F_SETFL, O_NONBLOCK);
    ::fcntl(err.fd[0], F_SETFL, O_NONBLOCK);
    bool out_open = true;
    bool err_open = true;
    bool reaped = false;
    int status = 0;
    bool term_sent = false;
    Clock::time_point term_at{};
    const bool limited = options.timeout.count() > 0;
    const auto deadline = start + options.timeout;

    while (!reaped) {
        if (::waitpid(pid, &status, WNOHANG) == pid) {
            reaped = true;
            break;
        }
        const auto now = Clock::now();
        if (limited && !term_sent && now >= deadline) {
            r.timed_out = true;
            ::kill(-pid, SIGTERM);
            term_sent = true;
            term_at = now;
        }
        if (term_sent && now >= term_at + options.kill_grace) ::kill(-pid, SIGKILL);

        std::vector<pollfd> fds;
        if (out_open) fds.push_back({out.fd[0], POLLIN, 0});
        if (err_open) fds.push_back({err.fd[0], POLLIN, 0});
        int wait_ms = 20;
        if (limited && !term_sent) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            wait_ms = static_cast<int>(std::clamp<long long>(left, 0, 20));
        }
        if (!fds.empty()) {
            ::poll(fds.data(), fds.size(), wait_ms);
        } else {
            // both pipes at EOF: the child is exiting, poll its status closely
            ::usleep(static_cast<useconds_t>(std::min(wait_ms, 1)) * 1000);
        }
        if (out_open) out_open = drain(out.fd[0], r.out, options.capture_limit);
        if (err_open) err_open = drain(err.fd[0], r.err, options.capture_limit);
    }
    r.wallclock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    // nothing from this run may outlive it
    ::kill(-pid, SIGKILL);
    if (out_open) drain(out.fd[0], r.out, options.capture_limit);
    if (err_open) drain(err.fd[0], r.err, options.capture_limit);

    if (WIFEXITED(status)) {
        r.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        r.signal = WTERMSIG(status);
    }
    return r;
}

ProcessResult run_shell(const std::string& command, const ProcessOptions& options) {
    return run_process({"/bin/sh", "-c", command}, options);
}

std::string shell_quote(std::string_view s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') {
            q += "'\\''";
        } else {
            q += c;
        }
    }
    return q + "'";
}

std::string expand_template(std::string_view templ, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < templ.size()) {
        if (templ[i] == '{') {
            const auto close = templ.find('}', i);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(templ.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += shell_quote(it->second);
                    i = close + 1;
                    continue;
                }
            }
        }
        out += templ[i++];
    }
    return out;
}

}  // namespace csp2c
