#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csp2c/model.hpp"

namespace csp2c {

enum class Severity { Error, Warning };

enum class DiagnosticKind {
    MalformedXml,
    UnknownElement,
    UnsupportedFeature,
    ArityMismatch,
    EmptyDomain,
    UndeclaredVariable,
    DuplicateVariable,
    Syntax,
    Structure,
};

std::string_view to_string(DiagnosticKind kind) noexcept;

struct SourceLocation {
    std::string path;  // e.g. "/instance/constraints/group[1]/extension"
    int line = 0;
};

struct ParseDiagnostic {
    Severity severity = Severity::Error;
    DiagnosticKind kind = DiagnosticKind::Syntax;
    SourceLocation location;
    std::string message;

    /// "error: /instance/variables/var[2] (line 4): empty domain for 'x'"
    std::string to_string() const;
};

/// Either an instance (possibly with warnings) or at least one error diagnostic.
struct ParseResult {
    std::optional<CspInstance> instance;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const noexcept { return instance.has_value(); }
    std::vector<ParseDiagnostic> errors() const;
};

/// Parses an XCSP3 document restricted to the supported subset: integer
/// <var>/<array>, <extension> (supports/conflicts), <intension>,
/// <allDifferent> and <group>. `name` becomes the instance name when the
/// document carries no id.
ParseResult parse_document(std::string_view xml_text, std::string name = "instance");

/// Reads and parses a file; the file stem is used as the instance name.
ParseResult parse_file(const std::string& path);

class IntensionSyntaxError : public std::runtime_error {
public:
    IntensionSyntaxError(std::string msg, std::size_t offset)
        : std::runtime_error(std::move(msg)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Parses functional syntax such as "eq(%0,dist(%1,%2))". Array references
/// like "x[1]" are flattened to "x1". `abs(sub(a,b))` is normalized to
/// dist(a,b); n-ary add/mul/and/or fold left into binary nodes.
/// Throws IntensionSyntaxError.
Expr parse_intension(std::string_view text);

/// Flat scalar id for an array element: ("x", {2}) -> "x2", ("m", {1,3}) -> "m1_3".
std::string flatten_name(std::string_view array, std::span<const long long> indices);

}  // namespace csp2c
