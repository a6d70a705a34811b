#include "csp2c/model.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>

namespace csp2c {

// ---------------------------------------------------------------------------
// Domain

Domain Domain::from_ranges(std::vector<Range> ranges) {
    for (const auto& r : ranges) {
        if (r.lo > r.hi) {
            throw ModelError("inverted range " + std::to_string(r.lo) + ".." + std::to_string(r.hi));
        }
    }
    if (ranges.empty()) {
        throw ModelError("empty domain");
    }
    std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
    std::vector<Range> merged;
    for (const auto& r : ranges) {
        // adjacent ranges merge too: 0..2 3..4 == 0..4
        if (!merged.empty() && (merged.back().hi == std::numeric_limits<Value>::max() ||
                                r.lo <= merged.back().hi + 1)) {
            merged.back().hi = std::max(merged.back().hi, r.hi);
        } else {
            merged.push_back(r);
        }
    }
    return Domain(std::move(merged));
}

Domain Domain::from_values(std::span<const Value> values) {
    std::vector<Range> r;
    r.reserve(values.size());
    for (Value v : values) r.push_back({v, v});
    return from_ranges(std::move(r));
}

bool Domain::contains(Value v) const noexcept {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), v,
                               [](Value x, const Range& r) { return x < r.lo; });
    if (it == ranges_.begin()) return false;
    --it;
    return v <= it->hi;
}

std::uint64_t Domain::size() const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : ranges_) {
        n += static_cast<std::uint64_t>(r.hi) - static_cast<std::uint64_t>(r.lo) + 1;
    }
    return n;
}

std::vector<Value> Domain::values() const {
    std::vector<Value> out;
    for (const auto& r : ranges_) {
        for (Value v = r.lo;; ++v) {
            out.push_back(v);
            if (v == r.hi) break;
        }
    }
    return out;
}

std::string Domain::to_string() const {
    std::string s;
    for (const auto& r : ranges_) {
        if (!s.empty()) s += ' ';
        s += std::to_string(r.lo);
        if (r.hi != r.lo) s += ".." + std::to_string(r.hi);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Expr

std::string_view op_name(Op op) noexcept {
    switch (op) {
        case Op::Var: return "var";
        case Op::Const: return "const";
        case Op::Placeholder: return "placeholder";
        case Op::Neg: return "neg";
        case Op::Abs: return "abs";
        case Op::Not: return "not";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Eq: return "eq";
        case Op::Ne: return "ne";
        case Op::Lt: return "lt";
        case Op::Le: return "le";
        case Op::Gt: return "gt";
        case Op::Ge: return "ge";
        case Op::And: return "and";
        case Op::Or: return "or";
        case Op::Dist: return "dist";
    }
    return "?";
}

int op_arity(Op op) noexcept {
    switch (op) {
        case Op::Var:
        case Op::Const:
        case Op::Placeholder: return 0;
        case Op::Neg:
        case Op::Abs:
        case Op::Not: return 1;
        default: return 2;
    }
}

bool is_boolean_op(Op op) noexcept {
    switch (op) {
        case Op::Not:
        case Op::Eq:
        case Op::Ne:
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge:
        case Op::And:
        case Op::Or: return true;
        default: return false;
    }
}

Expr Expr::var(std::string id) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::Var, 0, std::move(id), {}}));
}

Expr Expr::constant(Value v) { return Expr(std::make_shared<const ExprNode>(ExprNode{Op::Const, v, {}, {}})); }

Expr Expr::placeholder(int index) {
    if (index < 0) throw ModelError("negative placeholder index");
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::Placeholder, index, {}, {}}));
}

Expr Expr::unary(Op op, Expr arg) {
    if (op_arity(op) != 1) throw ModelError(std::string(op_name(op)) + " is not unary");
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0, {}, {std::move(arg)}}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    if (op_arity(op) != 2) throw ModelError(std::string(op_name(op)) + " is not binary");
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0, {}, {std::move(lhs), std::move(rhs)}}));
}

Op Expr::op() const noexcept { return node_->op; }
const std::string& Expr::name() const noexcept { return node_->name; }
Value Expr::value() const noexcept { return node_->value; }
int Expr::index() const noexcept { return static_cast<int>(node_->value); }
std::span<const Expr> Expr::children() const noexcept { return node_->children; }

namespace {

std::optional<Value> parse_integer(std::string_view s) {
    Value v = 0;
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

void collect_vars(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
    if (e.op() == Op::Var) {
        if (seen.insert(e.name()).second) out.push_back(e.name());
        return;
    }
    for (const auto& c : e.children()) collect_vars(c, out, seen);
}

}  // namespace

std::vector<std::string> Expr::variables() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    collect_vars(*this, out, seen);
    return out;
}

int Expr::placeholder_count() const {
    if (op() == Op::Placeholder) return index() + 1;
    int n = 0;
    for (const auto& c : children()) n = std::max(n, c.placeholder_count());
    return n;
}

std::string Expr::to_string() const {
    switch (op()) {
        case Op::Var: return name();
        case Op::Const: return std::to_string(value());
        case Op::Placeholder: return "%" + std::to_string(index());
        default: break;
    }
    std::string s(op_name(op()));
    s += '(';
    for (std::size_t i = 0; i < children().size(); ++i) {
        if (i) s += ',';
        s += children()[i].to_string();
    }
    s += ')';
    return s;
}

Expr Expr::substitute(std::span<const std::string> args) const {
    switch (op()) {
        case Op::Var:
        case Op::Const: return *this;
        case Op::Placeholder:
            if (static_cast<std::size_t>(index()) >= args.size()) {
                throw ModelError("placeholder %" + std::to_string(index()) + " has no argument (" +
                                 std::to_string(args.size()) + " given)");
            }
            if (auto v = parse_integer(args[index()])) return constant(*v);
            return var(args[index()]);
        default: break;
    }
    if (op_arity(op()) == 1) return unary(op(), child(0).substitute(args));
    return binary(op(), child(0).substitute(args), child(1).substitute(args));
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op() || a.value() != b.value() || a.name() != b.name()) return false;
    auto ca = a.children();
    auto cb = b.children();
    return std::equal(ca.begin(), ca.end(), cb.begin(), cb.end());
}

// ---------------------------------------------------------------------------
// Constraint

std::optional<int> placeholder_index(std::string_view token) {
    if (token.size() < 2 || token[0] != '%') return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(token.data() + 1, token.data() + token.size(), v);
    if (ec != std::errc{} || p != token.data() + token.size()) return std::nullopt;
    return v;
}

namespace {

int scope_placeholders(const std::vector<std::string>& scope) {
    int n = 0;
    for (const auto& s : scope) {
        if (auto i = placeholder_index(s)) n = std::max(n, *i + 1);
    }
    return n;
}

std::vector<std::string> substitute_scope(const std::vector<std::string>& scope,
                                          std::span<const std::string> args) {
    std::vector<std::string> out;
    out.reserve(scope.size());
    for (const auto& s : scope) {
        if (auto i = placeholder_index(s)) {
            if (static_cast<std::size_t>(*i) >= args.size()) {
                throw ModelError("placeholder " + s + " has no argument (" + std::to_string(args.size()) +
                                 " given)");
            }
            out.push_back(args[*i]);
        } else {
            out.push_back(s);
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += v[i];
    }
    return s;
}

}  // namespace

std::vector<std::string> Constraint::scope() const {
    return std::visit(
        [](const auto& c) -> std::vector<std::string> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Intensional>) {
                return c.expr.variables();
            } else {
                return c.scope;
            }
        },
        body_);
}

int Constraint::placeholder_count() const {
    return std::visit(
        [](const auto& c) -> int {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Intensional>) {
                return c.expr.placeholder_count();
            } else {
                return scope_placeholders(c.scope);
            }
        },
        body_);
}

Constraint Constraint::substitute(std::span<const std::string> args) const {
    return std::visit(
        [&](const auto& c) -> Constraint {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Intensional>) {
                return Intensional{c.expr.substitute(args)};
            } else if constexpr (std::is_same_v<T, Extensional>) {
                return Extensional{substitute_scope(c.scope, args), c.polarity, c.tuples};
            } else {
                return AllDifferent{substitute_scope(c.scope, args)};
            }
        },
        body_);
}

void Constraint::validate() const {
    if (const auto* e = get_if<Extensional>()) {
        if (e->scope.empty()) throw ModelError("extension constraint with empty scope");
        std::set<std::string> distinct(e->scope.begin(), e->scope.end());
        if (distinct.size() != e->scope.size()) {
            throw ModelError("extension scope has repeated variables: " + join(e->scope, " "));
        }
        for (std::size_t t = 0; t < e->tuples.size(); ++t) {
            if (e->tuples[t].size() != e->scope.size()) {
                throw ModelError("tuple " + std::to_string(t) + " has arity " +
                                 std::to_string(e->tuples[t].size()) + " but scope has " +
                                 std::to_string(e->scope.size()) + " variables");
            }
        }
    } else if (const auto* a = get_if<AllDifferent>()) {
        std::set<std::string> distinct(a->scope.begin(), a->scope.end());
        if (distinct.size() != a->scope.size()) {
            throw ModelError("allDifferent scope has repeated variables: " + join(a->scope, " "));
        }
        if (a->scope.size() < 2) throw ModelError("allDifferent needs at least 2 variables");
    }
}

std::string Constraint::to_string() const {
    if (const auto* e = get_if<Extensional>()) {
        std::string s = "extension(" + join(e->scope, " ") + ") ";
        s += e->polarity == Polarity::Supports ? "supports " : "conflicts ";
        for (const auto& t : e->tuples) {
            s += '(';
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (i) s += ',';
                s += std::to_string(t[i]);
            }
            s += ')';
        }
        return s;
    }
    if (const auto* i = get_if<Intensional>()) return "intension " + i->expr.to_string();
    return "allDifferent(" + join(as<AllDifferent>().scope, " ") + ")";
}

bool operator==(const Constraint& a, const Constraint& b) {
    if (a.kind() != b.kind()) return false;
    if (const auto* e = a.get_if<Extensional>()) {
        const auto& f = b.as<Extensional>();
        return e->scope == f.scope && e->polarity == f.polarity && e->tuples == f.tuples;
    }
    if (const auto* i = a.get_if<Intensional>()) return i->expr == b.as<Intensional>().expr;
    return a.as<AllDifferent>().scope == b.as<AllDifferent>().scope;
}

// ---------------------------------------------------------------------------
// Groups

ConstraintGroup ConstraintGroup::singleton(Constraint c, std::string label) {
    return ConstraintGroup(std::move(c), {}, true, std::move(label));
}

ConstraintGroup ConstraintGroup::templated(Constraint templ, std::vector<std::vector<std::string>> args,
                                           std::string label) {
    return ConstraintGroup(std::move(templ), std::move(args), false, std::move(label));
}

std::vector<Constraint> instantiate_group(const ConstraintGroup& group) {
    if (group.is_singleton()) return {group.templ()};
    const auto name = group.label().empty() ? std::string("group") : "group '" + group.label() + "'";
    const int slots = group.templ().placeholder_count();
    std::vector<Constraint> out;
    out.reserve(group.args().size());
    for (std::size_t k = 0; k < group.args().size(); ++k) {
        const auto& args = group.args()[k];
        if (args.size() != static_cast<std::size_t>(slots)) {
            throw ModelError(name + ": args vector " + std::to_string(k) + " (" + join(args, " ") + ") has " +
                             std::to_string(args.size()) + " entries, template expects " +
                             std::to_string(slots));
        }
        out.push_back(group.templ().substitute(args));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CspInstance

CspInstance CspInstance::create(std::string name, std::vector<VariableDecl> variables,
                                std::vector<ConstraintGroup> groups,
                                std::map<std::string, std::string> flattening) {
    CspInstance inst;
    inst.name_ = std::move(name);
    if (variables.empty()) throw ModelError("instance declares no variables");
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (!inst.index_.emplace(variables[i].id, i).second) {
            throw ModelError("duplicate variable id '" + variables[i].id + "'");
        }
    }
    inst.variables_ = std::move(variables);
    inst.groups_ = std::move(groups);
    inst.flattening_ = std::move(flattening);
    for (const auto& g : inst.groups_) {
        inst.group_offsets_.push_back(inst.constraints_.size());
        for (auto& c : instantiate_group(g)) {
            c.validate();
            for (const auto& v : c.scope()) {
                if (!inst.index_.contains(v)) {
                    throw ModelError("constraint " + c.to_string() + " references undeclared variable '" + v +
                                     "'");
                }
            }
            inst.constraints_.push_back(std::move(c));
        }
    }
    inst.group_offsets_.push_back(inst.constraints_.size());
    return inst;
}

std::span<const Constraint> CspInstance::group_constraints(std::size_t g) const {
    return std::span<const Constraint>(constraints_)
        .subspan(group_offsets_.at(g), group_offsets_.at(g + 1) - group_offsets_.at(g));
}

std::optional<std::size_t> CspInstance::index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const VariableDecl& CspInstance::variable(std::string_view id) const {
    auto i = index_of(id);
    if (!i) throw ModelError("unknown variable '" + std::string(id) + "'");
    return variables_[*i];
}

std::uint64_t CspInstance::search_space() const noexcept {
    std::uint64_t n = 1;
    for (const auto& v : variables_) {
        const auto s = v.domain.size();
        if (s != 0 && n > std::numeric_limits<std::uint64_t>::max() / s) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        n *= s;
    }
    return n;
}

}  // namespace csp2c
