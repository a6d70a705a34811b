#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csp2c/model.hpp"

namespace csp2c {

enum class Family { Extensional, Intensional };
/// How a constraint enters the program: a branch or a tool assume intrinsic.
enum class Construct { IfStmt, Assume };
/// Connective family joining atomic conditions. NOP: one statement per atom.
enum class Operator { Logical, Bitwise, NOP };
/// Statement granularity: per constraint (No), per group (Yes), whole instance (All).
enum class Grouping { No, Yes, All };
enum class Dialect { KLEE, LLBMC, Concrete };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Construct c) noexcept;
std::string_view to_string(Operator o) noexcept;
std::string_view to_string(Grouping g) noexcept;
std::string_view to_string(Dialect d) noexcept;

Family parse_family(std::string_view s);
Dialect parse_dialect(std::string_view s);

class CodegenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TransformSpec {
    Family family = Family::Extensional;
    Construct construct = Construct::IfStmt;
    Operator op = Operator::Logical;
    Grouping grouping = Grouping::No;
    Dialect dialect = Dialect::KLEE;

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

inline constexpr int kExtensionalVersions = 12;
inline constexpr int kIntensionalVersions = 10;

int version_count(Family f) noexcept;

/// Feature triple of a row of the version matrix (1-based). Throws CodegenError
/// for an out-of-range version.
TransformSpec version_to_spec(Family family, int version, Dialect dialect = Dialect::KLEE);

/// Inverse of version_to_spec; 0 when the (family, construct, operator, grouping)
/// combination is not one of the matrix rows.
int spec_to_version(const TransformSpec& spec) noexcept;
bool is_valid(const TransformSpec& spec) noexcept;

/// "ext5", "int3".
std::string version_label(const TransformSpec& spec);

/// Family required by the instance's constraints; nullopt when the instance has
/// none or mixes table with intensional/allDifferent constraints.
std::optional<Family> instance_family(const CspInstance& csp);

struct GeneratedProgram {
    std::string source;
    std::string version_label;
    TransformSpec spec;
    /// Emitted constraint-encoding statements.
    std::size_t statement_count = 0;
    std::size_t line_count = 0;
    /// CSP variable id -> C identifier.
    std::map<std::string, std::string> var_map;
};

/// Encodes the CSP as a C program whose distinguished `assert(0)` (or, for the
/// Concrete dialect, the SAT-REACHED marker) is reachable iff the CSP is satisfiable.
/// Throws CodegenError on a family mismatch, an invalid spec, or values that do not
/// fit the generated `int`s.
GeneratedProgram transform(const CspInstance& csp, const TransformSpec& spec);

/// transform() with the Concrete dialect: variable values come from argv, assumes
/// become `exit(1)` guards, and reaching the distinguished point prints SAT-REACHED
/// and exits 0.
GeneratedProgram emit_concrete_driver(const CspInstance& csp, TransformSpec spec);

/// `<instance>__<label>__<dialect>.c`
std::string output_file_name(std::string_view instance, const TransformSpec& spec);

inline constexpr std::string_view kReachedMarker = "SAT-REACHED";

}  // namespace csp2c
