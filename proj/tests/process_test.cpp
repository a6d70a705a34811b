#include <catch2/catch_amalgamated.hpp>

#include <signal.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "csp2c/process.hpp"
#include "proc.hpp"

using namespace csp2c;
using namespace std::chrono_literals;

TEST_CASE("captures output and exit status", "[process]") {
    const auto r = run_shell("echo out; echo err >&2; exit 3");
    CHECK(r.started);
    CHECK_FALSE(r.timed_out);
    CHECK(r.exit_code == 3);
    CHECK(r.out == "out\n");
    CHECK(r.err == "err\n");
    CHECK_FALSE(r.exited_ok());
}

TEST_CASE("a missing program is reported, not thrown", "[process]") {
    const auto r = run_process({"/nonexistent/program"});
    CHECK_FALSE(r.started);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("cannot execute"));
}

TEST_CASE("timeouts terminate the whole process group", "[process][timeout]") {
    const auto dir = std::filesystem::temp_directory_path() / "csp2c-process-test";
    std::filesystem::create_directories(dir);
    const auto pidfile = dir / "child.pid";
    std::filesystem::remove(pidfile);

    ProcessOptions o;
    o.timeout = 300ms;
    o.kill_grace = 200ms;
    const auto r = run_shell("sleep 30 & echo $! > " + shell_quote(pidfile.string()) + "; wait", o);
    CHECK(r.timed_out);
    CHECK(r.wallclock_seconds >= 0.3);
    CHECK(r.wallclock_seconds < 5.0);

    std::ifstream f(pidfile);
    pid_t child = 0;
    f >> child;
    REQUIRE(child > 0);
    bool alive = true;
    for (int i = 0; i < 50 && alive; ++i) {
        alive = testsupport::process_alive(child);
        if (alive) std::this_thread::sleep_for(20ms);
    }
    CHECK_FALSE(alive);
}

TEST_CASE("a process ignoring SIGTERM is killed after the grace period", "[process][timeout]") {
    ProcessOptions o;
    o.timeout = 200ms;
    o.kill_grace = 300ms;
    const auto r = run_shell("trap '' TERM; while :; do sleep 0.05; done", o);
    CHECK(r.timed_out);
    CHECK(r.wallclock_seconds >= 0.5);
    CHECK(r.wallclock_seconds < 5.0);
}

TEST_CASE("template expansion quotes values", "[process]") {
    CHECK(shell_quote("a b") == "'a b'");
    CHECK(shell_quote("it's") == "'it'\\''s'");
    CHECK(expand_template("cc -o {out} {src} {keep}", {{"src", "a.c"}, {"out", "my prog"}}) ==
          "cc -o 'my prog' 'a.c' {keep}");
    const auto r = run_shell(expand_template("printf %s {v}", {{"v", "x'; echo injected; '"}}));
    CHECK(r.out == "x'; echo injected; '");
}
