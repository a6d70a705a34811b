#include "csp2c/oracle.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace csp2c {

namespace {

constexpr Value kIntMin = std::numeric_limits<std::int32_t>::min();
constexpr Value kIntMax = std::numeric_limits<std::int32_t>::max();

Value checked(Value v, Op op) {
    if (v < kIntMin || v > kIntMax) {
        throw EvalError(EvalError::Kind::Overflow,
                        std::string(op_name(op)) + " result " + std::to_string(v) + " leaves the 32-bit int range");
    }
    return v;
}

// Operands are already within 32-bit range, so 64-bit arithmetic is exact.
Value apply(Op op, Value a, Value b) {
    switch (op) {
        case Op::Neg: return checked(-a, op);
        case Op::Abs: return checked(a < 0 ? -a : a, op);
        case Op::Not: return a == 0 ? 1 : 0;
        case Op::Add: return checked(a + b, op);
        case Op::Sub: return checked(a - b, op);
        case Op::Mul: return checked(a * b, op);
        case Op::Eq: return a == b;
        case Op::Ne: return a != b;
        case Op::Lt: return a < b;
        case Op::Le: return a <= b;
        case Op::Gt: return a > b;
        case Op::Ge: return a >= b;
        case Op::And: return (a != 0 && b != 0) ? 1 : 0;
        case Op::Or: return (a != 0 || b != 0) ? 1 : 0;
        case Op::Dist: return checked(a > b ? a - b : b - a, op);
        default: break;
    }
    throw EvalError(EvalError::Kind::UnboundVariable, "cannot apply " + std::string(op_name(op)));
}

Value leaf_value(Value v, std::string_view what) {
    if (v < kIntMin || v > kIntMax) {
        throw EvalError(EvalError::Kind::Overflow,
                        std::string(what) + " value " + std::to_string(v) + " leaves the 32-bit int range");
    }
    return v;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

}  // namespace

Value eval_expr(const Expr& expr, const Assignment& a) {
    switch (expr.op()) {
        case Op::Var: {
            auto it = a.find(expr.name());
            if (it == a.end()) {
                throw EvalError(EvalError::Kind::UnboundVariable, "variable '" + expr.name() + "' is unbound");
            }
            return leaf_value(it->second, expr.name());
        }
        case Op::Const: return leaf_value(expr.value(), "constant");
        case Op::Placeholder:
            throw EvalError(EvalError::Kind::UnboundVariable,
                            "placeholder %" + std::to_string(expr.index()) + " was never instantiated");
        default: break;
    }
    if (op_arity(expr.op()) == 1) return apply(expr.op(), eval_expr(expr.child(0), a), 0);
    // both operands are evaluated: no short-circuit, so an overflow anywhere is reported
    const Value lhs = eval_expr(expr.child(0), a);
    const Value rhs = eval_expr(expr.child(1), a);
    return apply(expr.op(), lhs, rhs);
}

namespace {

Value lookup(const Assignment& a, const std::string& id) {
    auto it = a.find(id);
    if (it == a.end()) throw EvalError(EvalError::Kind::UnboundVariable, "variable '" + id + "' is unbound");
    return it->second;
}

}  // namespace

bool constraint_satisfied(const Constraint& c, const Assignment& a) {
    if (const auto* e = c.get_if<Extensional>()) {
        Tuple t;
        t.reserve(e->scope.size());
        for (const auto& v : e->scope) t.push_back(lookup(a, v));
        const bool listed = std::find(e->tuples.begin(), e->tuples.end(), t) != e->tuples.end();
        return e->polarity == Polarity::Supports ? listed : !listed;
    }
    if (const auto* i = c.get_if<Intensional>()) return eval_expr(i->expr, a) != 0;
    const auto& scope = c.as<AllDifferent>().scope;
    std::set<Value> seen;
    for (const auto& v : scope) {
        if (!seen.insert(lookup(a, v)).second) return false;
    }
    return true;
}

bool is_solution(const CspInstance& csp, const Assignment& a) {
    for (const auto& v : csp.variables()) {
        auto it = a.find(v.id);
        if (it == a.end() || !v.domain.contains(it->second)) return false;
    }
    return std::all_of(csp.constraints().begin(), csp.constraints().end(),
                       [&](const Constraint& c) { return constraint_satisfied(c, a); });
}

std::string_view to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Satisfiable: return "SATISFIABLE";
        case SolveStatus::Unsatisfiable: return "UNSATISFIABLE";
        case SolveStatus::ResourceLimit: return "RESOURCE-LIMIT";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Compiled form

struct Instr {
    Op op;
    Value operand;  // variable index for Var, value for Const
};

struct CompiledInstance::Check {
    ConstraintKind kind;
    std::vector<std::size_t> scope;
    std::ptrdiff_t last = -1;  // highest variable index in scope
    Polarity polarity = Polarity::Supports;
    std::set<Tuple> tuples;
    std::vector<Instr> program;  // postfix

    bool holds(const std::vector<Value>& values, std::vector<Value>& stack) const {
        switch (kind) {
            case ConstraintKind::Extensional: {
                Tuple t;
                t.reserve(scope.size());
                for (auto i : scope) t.push_back(values[i]);
                return tuples.contains(t) == (polarity == Polarity::Supports);
            }
            case ConstraintKind::AllDifferent:
                for (std::size_t i = 0; i < scope.size(); ++i) {
                    for (std::size_t j = i + 1; j < scope.size(); ++j) {
                        if (values[scope[i]] == values[scope[j]]) return false;
                    }
                }
                return true;
            case ConstraintKind::Intensional:
                stack.clear();
                for (const auto& ins : program) {
                    if (ins.op == Op::Var) {
                        stack.push_back(leaf_value(values[static_cast<std::size_t>(ins.operand)], "variable"));
                    } else if (ins.op == Op::Const) {
                        stack.push_back(leaf_value(ins.operand, "constant"));
                    } else if (op_arity(ins.op) == 1) {
                        stack.back() = apply(ins.op, stack.back(), 0);
                    } else {
                        const Value rhs = stack.back();
                        stack.pop_back();
                        stack.back() = apply(ins.op, stack.back(), rhs);
                    }
                }
                return stack.back() != 0;
        }
        return false;
    }
};

namespace {

void compile_expr(const Expr& e, const CspInstance& csp, std::vector<Instr>& out) {
    switch (e.op()) {
        case Op::Var: out.push_back({Op::Var, static_cast<Value>(*csp.index_of(e.name()))}); return;
        case Op::Const: out.push_back({Op::Const, e.value()}); return;
        case Op::Placeholder: throw ModelError("uninstantiated placeholder in " + e.to_string());
        default: break;
    }
    for (const auto& c : e.children()) compile_expr(c, csp, out);
    out.push_back({e.op(), 0});
}

}  // namespace

CompiledInstance::CompiledInstance(const CspInstance& csp) : n_vars_(csp.variables().size()) {
    for (const auto& v : csp.variables()) names_.push_back(v.id);
    for (const auto& c : csp.constraints()) {
        Check chk;
        chk.kind = c.kind();
        for (const auto& v : c.scope()) chk.scope.push_back(*csp.index_of(v));
        for (auto i : chk.scope) chk.last = std::max(chk.last, static_cast<std::ptrdiff_t>(i));
        if (const auto* e = c.get_if<Extensional>()) {
            chk.polarity = e->polarity;
            chk.tuples.insert(e->tuples.begin(), e->tuples.end());
        } else if (const auto* i = c.get_if<Intensional>()) {
            compile_expr(i->expr, csp, chk.program);
        }
        checks_.push_back(std::move(chk));
    }
}

CompiledInstance::~CompiledInstance() = default;
CompiledInstance::CompiledInstance(CompiledInstance&&) noexcept = default;
CompiledInstance& CompiledInstance::operator=(CompiledInstance&&) noexcept = default;

bool CompiledInstance::satisfies(const std::vector<Value>& values) const {
    std::vector<Value> stack;
    return std::all_of(checks_.begin(), checks_.end(), [&](const Check& c) { return c.holds(values, stack); });
}

Assignment CompiledInstance::to_assignment(const std::vector<Value>& values) const {
    Assignment a;
    for (std::size_t i = 0; i < names_.size(); ++i) a.emplace(names_[i], values[i]);
    return a;
}

// ---------------------------------------------------------------------------
// Search

class Search {
public:
    Search(const CspInstance& csp, std::uint64_t limit, bool all)
        : compiled_(csp), limit_(limit), all_(all), values_(csp.variables().size()) {
        for (const auto& v : csp.variables()) domains_.push_back(v.domain.values());
        // remaining_[d]: number of complete assignments below a node at depth d
        remaining_.assign(domains_.size() + 1, 1);
        for (std::size_t d = domains_.size(); d-- > 0;) {
            remaining_[d] = saturating_mul(remaining_[d + 1], domains_[d].size());
        }
        by_depth_.resize(domains_.size());
        for (std::size_t k = 0; k < compiled_.checks_.size(); ++k) {
            const auto last = compiled_.checks_[k].last;
            if (last < 0) {
                root_checks_.push_back(k);
            } else {
                by_depth_[static_cast<std::size_t>(last)].push_back(k);
            }
        }
    }

    void run() {
        for (auto k : root_checks_) {
            if (!compiled_.checks_[k].holds(values_, stack_)) {
                explored_ = remaining_[0];
                return;
            }
        }
        descend(0);
    }

    std::uint64_t explored() const noexcept { return explored_; }
    bool complete() const noexcept { return !stopped_ || explored_ >= remaining_[0]; }
    const std::vector<Assignment>& found() const noexcept { return found_; }

private:
    // Returns false to unwind the whole search.
    bool descend(std::size_t depth) {
        for (Value v : domains_[depth]) {
            values_[depth] = v;
            bool ok = true;
            for (auto k : by_depth_[depth]) {
                if (!compiled_.checks_[k].holds(values_, stack_)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                explored_ = saturating_add(explored_, remaining_[depth + 1]);
            } else if (depth + 1 == domains_.size()) {
                explored_ = saturating_add(explored_, 1);
                found_.push_back(compiled_.to_assignment(values_));
                if (!all_) return false;
            } else if (!descend(depth + 1)) {
                return false;
            }
            if (explored_ >= limit_) {
                stopped_ = true;
                return false;
            }
        }
        return true;
    }

    CompiledInstance compiled_;
    std::uint64_t limit_;
    bool all_;
    std::vector<Value> values_;
    std::vector<Value> stack_;
    std::vector<std::vector<Value>> domains_;
    std::vector<std::uint64_t> remaining_;
    std::vector<std::vector<std::size_t>> by_depth_;
    std::vector<std::size_t> root_checks_;
    std::uint64_t explored_ = 0;
    bool stopped_ = false;
    std::vector<Assignment> found_;
};

SolveResult solve(const CspInstance& csp, std::uint64_t limit) {
    if (limit == 0) throw std::invalid_argument("solve limit must be at least 1");
    Search s(csp, limit, false);
    s.run();
    SolveResult r;
    r.explored = s.explored();
    if (!s.found().empty()) {
        r.status = SolveStatus::Satisfiable;
        r.witness = s.found().front();
    } else {
        r.status = s.complete() ? SolveStatus::Unsatisfiable : SolveStatus::ResourceLimit;
    }
    return r;
}

Enumeration enumerate_solutions(const CspInstance& csp, std::uint64_t limit) {
    if (limit == 0) throw std::invalid_argument("enumeration limit must be at least 1");
    Search s(csp, limit, true);
    s.run();
    return {s.found(), s.complete(), s.explored()};
}

}  // namespace csp2c
