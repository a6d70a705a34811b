#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csp2c/model.hpp"

namespace csp2c {

/// Total (or partial, during evaluation) valuation of CSP variables.
using Assignment = std::map<std::string, Value>;

class EvalError : public std::runtime_error {
public:
    enum class Kind { UnboundVariable, Overflow };

    EvalError(Kind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Evaluates over exact 64-bit integers; every intermediate result must fit a
/// 32-bit signed int (the type the generated C uses) or EvalError(Overflow) is thrown.
/// Comparisons and logical connectives yield 0/1.
Value eval_expr(const Expr& expr, const Assignment& a);

/// Supports: scope valuation is a listed tuple. Conflicts: it is not.
/// Intensional: expression is non-zero. AllDifferent: values pairwise distinct.
bool constraint_satisfied(const Constraint& c, const Assignment& a);

/// True iff `a` assigns every variable a value inside its domain and satisfies
/// every instantiated constraint.
bool is_solution(const CspInstance& csp, const Assignment& a);

enum class SolveStatus { Satisfiable, Unsatisfiable, ResourceLimit };

std::string_view to_string(SolveStatus s) noexcept;

struct SolveResult {
    SolveStatus status = SolveStatus::ResourceLimit;
    std::optional<Assignment> witness;
    /// Complete assignments accounted for: tested leaves plus the size of every
    /// subtree pruned by a violated constraint. Equals the domain product after
    /// a full enumeration.
    std::uint64_t explored = 0;
};

inline constexpr std::uint64_t kDefaultSolveLimit = 10'000'000;

/// Lexicographic enumeration of the domain product in declaration order,
/// pruning a prefix as soon as a constraint whose scope it fully binds fails.
SolveResult solve(const CspInstance& csp, std::uint64_t limit = kDefaultSolveLimit);

struct Enumeration {
    std::vector<Assignment> solutions;  // lexicographic order
    bool complete = false;              // false when `limit` stopped the search
    std::uint64_t explored = 0;
};

Enumeration enumerate_solutions(const CspInstance& csp, std::uint64_t limit = kDefaultSolveLimit);

/// Index-based evaluation used by the verifier and the search. `values[i]`
/// is the value of csp.variables()[i].
class CompiledInstance {
public:
    explicit CompiledInstance(const CspInstance& csp);

    std::size_t size() const noexcept { return n_vars_; }
    /// Checks every constraint on a complete valuation (domains are not checked).
    bool satisfies(const std::vector<Value>& values) const;
    Assignment to_assignment(const std::vector<Value>& values) const;

    struct Check;
    ~CompiledInstance();
    CompiledInstance(CompiledInstance&&) noexcept;
    CompiledInstance& operator=(CompiledInstance&&) noexcept;

private:
    friend class Search;
    std::size_t n_vars_;
    std::vector<std::string> names_;
    std::vector<Check> checks_;
};

}  // namespace csp2c
