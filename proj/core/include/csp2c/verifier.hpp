#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csp2c/codegen.hpp"
#include "csp2c/model.hpp"
#include "csp2c/oracle.hpp"

namespace csp2c {

/// Compiler command with `{src}` and `{out}` placeholders.
inline constexpr std::string_view kDefaultCompileCommand = "cc -O0 -w -o {out} {src}";
/// Environment variable overriding kDefaultCompileCommand in the CLI.
inline constexpr std::string_view kCompileCommandEnv = "CSP2C_CC";

class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VerificationStatus { Pass, Fail, Sampled, SkippedTooLarge };

std::string_view to_string(VerificationStatus s) noexcept;

struct Mismatch {
    std::string version;
    std::vector<Value> assignment;  // in variable declaration order
    bool expected = false;          // oracle: all constraints satisfied
    bool observed = false;          // driver printed the marker and exited 0

    friend auto operator<=>(const Mismatch&, const Mismatch&) = default;
};

struct VerificationReport {
    std::string instance;
    std::vector<std::string> versions;
    /// Executions compared against the oracle, summed over versions.
    std::uint64_t assignments_checked = 0;
    /// Assignments in the domain product (per version).
    std::uint64_t search_space = 0;
    std::vector<Mismatch> mismatches;  // sorted
    VerificationStatus status = VerificationStatus::Pass;
    /// Number of accepted assignments per version (same order as `versions`).
    std::vector<std::uint64_t> accepted;

    std::string to_string() const;
};

struct VerifierOptions {
    std::string compile_command{kDefaultCompileCommand};
    /// Exhaustive checking up to this many assignments.
    std::uint64_t exhaustive_bound = 4096;
    /// Above the bound: number of uniformly random assignments to run in
    /// addition to the oracle witness. Zero skips the instance.
    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Scratch directory; a fresh temporary directory when unset.
    std::optional<std::filesystem::path> work_dir;
    /// Applied to each generated source before compilation (fault injection in tests).
    std::function<std::string(const std::string&)> source_mutator;
};

/// Compiles the concrete driver of every version and compares its verdict on
/// each assignment of the domain product with the oracle's constraint check.
/// Throws VerificationError when compilation or a driver run fails.
VerificationReport differential_check(const CspInstance& csp, const std::vector<TransformSpec>& versions,
                                      const VerifierOptions& options = {});

/// True iff every version accepts exactly the same assignments (checked
/// exhaustively; throws VerificationError above the exhaustive bound).
bool cross_version_equivalence(const CspInstance& csp, const std::vector<TransformSpec>& versions,
                               const VerifierOptions& options = {});

/// Every valid version of `family`, in matrix order.
std::vector<TransformSpec> all_versions(Family family, Dialect dialect = Dialect::KLEE);

}  // namespace csp2c
