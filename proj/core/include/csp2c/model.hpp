#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace csp2c {

using Value = std::int64_t;
using Tuple = std::vector<Value>;

/// Raised when an IR value would violate one of its structural invariants.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

struct Range {
    Value lo;
    Value hi;  // inclusive

    friend bool operator==(const Range&, const Range&) = default;
};

/// Finite ascending set of integers stored as disjoint, non-adjacent ranges.
class Domain {
public:
    /// Normalizes arbitrary (possibly overlapping, unordered) ranges.
    /// Throws ModelError if a range is inverted or the result is empty.
    static Domain from_ranges(std::vector<Range> ranges);
    static Domain from_values(std::span<const Value> values);
    static Domain interval(Value lo, Value hi) { return from_ranges({{lo, hi}}); }

    const std::vector<Range>& ranges() const noexcept { return ranges_; }
    bool contains(Value v) const noexcept;
    std::uint64_t size() const noexcept;
    bool contiguous() const noexcept { return ranges_.size() == 1; }
    Value min() const noexcept { return ranges_.front().lo; }
    Value max() const noexcept { return ranges_.back().hi; }
    std::vector<Value> values() const;

    /// XCSP3-style rendering, e.g. "0..3 7 9..10".
    std::string to_string() const;

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    explicit Domain(std::vector<Range> r) : ranges_(std::move(r)) {}
    std::vector<Range> ranges_;
};

struct VariableDecl {
    std::string id;
    Domain domain;
};

// ---------------------------------------------------------------------------
// Intensional expressions
// ---------------------------------------------------------------------------

enum class Op {
    Var,
    Const,
    Placeholder,
    // unary
    Neg,
    Abs,
    Not,
    // binary
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Dist,
};

std::string_view op_name(Op op) noexcept;
int op_arity(Op op) noexcept;
/// True for nodes whose value is always 0 or 1.
bool is_boolean_op(Op op) noexcept;

struct ExprNode;

/// Immutable expression tree handle. Copies share structure.
class Expr {
public:
    static Expr var(std::string id);
    static Expr constant(Value v);
    static Expr placeholder(int index);
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);

    Op op() const noexcept;
    const std::string& name() const noexcept;  // Var only
    Value value() const noexcept;              // Const only
    int index() const noexcept;                // Placeholder only
    std::span<const Expr> children() const noexcept;
    const Expr& child(std::size_t i) const noexcept { return children()[i]; }

    /// Variable ids in first-occurrence order, without duplicates.
    std::vector<std::string> variables() const;
    /// One past the largest placeholder index, 0 when there are none.
    int placeholder_count() const;
    /// Functional XCSP3 syntax, e.g. "eq(y0,dist(x0,x1))".
    std::string to_string() const;
    /// Replaces %i with Var(args[i]), or Const when args[i] is an integer literal.
    /// Throws ModelError on a short args vector.
    Expr substitute(std::span<const std::string> args) const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    Op op;
    Value value = 0;  // Const value or Placeholder index
    std::string name;
    std::vector<Expr> children;
};

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

enum class Polarity { Supports, Conflicts };

struct Extensional {
    std::vector<std::string> scope;
    Polarity polarity = Polarity::Supports;
    std::vector<Tuple> tuples;
};

struct Intensional {
    Expr expr;
};

struct AllDifferent {
    std::vector<std::string> scope;
};

enum class ConstraintKind { Extensional, Intensional, AllDifferent };

class Constraint {
public:
    using Body = std::variant<Extensional, Intensional, AllDifferent>;

    Constraint(Extensional e) : body_(std::move(e)) {}
    Constraint(Intensional i) : body_(std::move(i)) {}
    Constraint(AllDifferent a) : body_(std::move(a)) {}

    ConstraintKind kind() const noexcept { return static_cast<ConstraintKind>(body_.index()); }
    const Body& body() const noexcept { return body_; }
    template <class T>
    const T& as() const {
        return std::get<T>(body_);
    }
    template <class T>
    const T* get_if() const noexcept {
        return std::get_if<T>(&body_);
    }

    /// Ordered scope. For intensional constraints, variables in first-occurrence order.
    std::vector<std::string> scope() const;
    /// Placeholders ("%i") used by a template, 0 for a concrete constraint.
    int placeholder_count() const;
    Constraint substitute(std::span<const std::string> args) const;
    /// Checks the per-kind structural invariants; throws ModelError.
    void validate() const;

    std::string to_string() const;

    friend bool operator==(const Constraint& a, const Constraint& b);

private:
    Body body_;
};

/// "%3" -> 3, anything else -> nullopt.
std::optional<int> placeholder_index(std::string_view token);

// ---------------------------------------------------------------------------
// Groups and instances
// ---------------------------------------------------------------------------

class ConstraintGroup {
public:
    static ConstraintGroup singleton(Constraint c, std::string label = {});
    static ConstraintGroup templated(Constraint templ, std::vector<std::vector<std::string>> args,
                                     std::string label = {});

    bool is_singleton() const noexcept { return singleton_; }
    const Constraint& templ() const noexcept { return templ_; }
    const std::vector<std::vector<std::string>>& args() const noexcept { return args_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return singleton_ ? 1 : args_.size(); }

private:
    ConstraintGroup(Constraint c, std::vector<std::vector<std::string>> a, bool s, std::string l)
        : templ_(std::move(c)), args_(std::move(a)), singleton_(s), label_(std::move(l)) {}

    Constraint templ_;
    std::vector<std::vector<std::string>> args_;
    bool singleton_;
    std::string label_;
};

/// Substitutes each args vector into the group template, in order.
/// Throws ModelError naming the group and the offending vector on arity mismatch.
std::vector<Constraint> instantiate_group(const ConstraintGroup& group);

class CspInstance {
public:
    /// Validates every invariant and instantiates all groups; throws ModelError.
    /// `flattening` maps original XCSP3 names ("x[0]") to flat ids ("x0").
    static CspInstance create(std::string name, std::vector<VariableDecl> variables,
                              std::vector<ConstraintGroup> groups,
                              std::map<std::string, std::string> flattening = {});

    const std::string& name() const noexcept { return name_; }
    const std::vector<VariableDecl>& variables() const noexcept { return variables_; }
    const std::vector<ConstraintGroup>& groups() const noexcept { return groups_; }
    const std::map<std::string, std::string>& flattening() const noexcept { return flattening_; }

    /// All instantiated constraints, group by group.
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    /// Instantiated constraints of group `g`.
    std::span<const Constraint> group_constraints(std::size_t g) const;

    std::optional<std::size_t> index_of(std::string_view id) const;
    const VariableDecl& variable(std::string_view id) const;

    /// Size of the full domain product, saturating at UINT64_MAX.
    std::uint64_t search_space() const noexcept;

private:
    CspInstance() = default;

    std::string name_;
    std::vector<VariableDecl> variables_;
    std::vector<ConstraintGroup> groups_;
    std::map<std::string, std::string> flattening_;
    std::vector<Constraint> constraints_;
    std::vector<std::size_t> group_offsets_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace csp2c
