#include "csp2c/codegen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <set>
#include <sstream>

namespace csp2c {

std::string_view to_string(Family f) noexcept { return f == Family::Extensional ? "extensional" : "intensional"; }

std::string_view to_string(Construct c) noexcept { return c == Construct::IfStmt ? "if" : "assume"; }

std::string_view to_string(Operator o) noexcept {
    switch (o) {
        case Operator::Logical: return "logical";
        case Operator::Bitwise: return "bitwise";
        case Operator::NOP: return "NOP";
    }
    return "?";
}

std::string_view to_string(Grouping g) noexcept {
    switch (g) {
        case Grouping::No: return "no";
        case Grouping::Yes: return "yes";
        case Grouping::All: return "all";
    }
    return "?";
}

std::string_view to_string(Dialect d) noexcept {
    switch (d) {
        case Dialect::KLEE: return "klee";
        case Dialect::LLBMC: return "llbmc";
        case Dialect::Concrete: return "concrete";
    }
    return "?";
}

Family parse_family(std::string_view s) {
    if (s == "extensional" || s == "ext") return Family::Extensional;
    if (s == "intensional" || s == "int") return Family::Intensional;
    throw CodegenError("unknown family '" + std::string(s) + "' (expected extensional or intensional)");
}

Dialect parse_dialect(std::string_view s) {
    if (s == "klee") return Dialect::KLEE;
    if (s == "llbmc") return Dialect::LLBMC;
    if (s == "concrete") return Dialect::Concrete;
    throw CodegenError("unknown dialect '" + std::string(s) + "' (expected klee, llbmc or concrete)");
}

// ---------------------------------------------------------------------------
// Version matrix

namespace {

struct Row {
    Construct construct;
    Operator op;
    Grouping grouping;
};

constexpr std::array<Row, kExtensionalVersions> kExtensionalRows = {{
    {Construct::IfStmt, Operator::Logical, Grouping::No},
    {Construct::IfStmt, Operator::Logical, Grouping::Yes},
    {Construct::IfStmt, Operator::Logical, Grouping::All},
    {Construct::IfStmt, Operator::Bitwise, Grouping::No},
    {Construct::IfStmt, Operator::Bitwise, Grouping::Yes},
    {Construct::IfStmt, Operator::Bitwise, Grouping::All},
    {Construct::Assume, Operator::Logical, Grouping::No},
    {Construct::Assume, Operator::Logical, Grouping::Yes},
    {Construct::Assume, Operator::Logical, Grouping::All},
    {Construct::Assume, Operator::Bitwise, Grouping::No},
    {Construct::Assume, Operator::Bitwise, Grouping::Yes},
    {Construct::Assume, Operator::Bitwise, Grouping::All},
}};

constexpr std::array<Row, kIntensionalVersions> kIntensionalRows = {{
    {Construct::IfStmt, Operator::NOP, Grouping::No},
    {Construct::IfStmt, Operator::Logical, Grouping::Yes},
    {Construct::IfStmt, Operator::Logical, Grouping::All},
    {Construct::IfStmt, Operator::Bitwise, Grouping::Yes},
    {Construct::IfStmt, Operator::Bitwise, Grouping::All},
    {Construct::Assume, Operator::NOP, Grouping::No},
    {Construct::Assume, Operator::Logical, Grouping::Yes},
    {Construct::Assume, Operator::Logical, Grouping::All},
    {Construct::Assume, Operator::Bitwise, Grouping::Yes},
    {Construct::Assume, Operator::Bitwise, Grouping::All},
}};

}  // namespace

int version_count(Family f) noexcept {
    return f == Family::Extensional ? kExtensionalVersions : kIntensionalVersions;
}

TransformSpec version_to_spec(Family family, int version, Dialect dialect) {
    if (version < 1 || version > version_count(family)) {
        throw CodegenError("no " + std::string(to_string(family)) + " version " + std::to_string(version) +
                           " (valid: 1.." + std::to_string(version_count(family)) + ")");
    }
    const Row& r = family == Family::Extensional ? kExtensionalRows[version - 1] : kIntensionalRows[version - 1];
    return {family, r.construct, r.op, r.grouping, dialect};
}

int spec_to_version(const TransformSpec& spec) noexcept {
    const auto n = version_count(spec.family);
    for (int v = 1; v <= n; ++v) {
        const Row& r = spec.family == Family::Extensional ? kExtensionalRows[v - 1] : kIntensionalRows[v - 1];
        if (r.construct == spec.construct && r.op == spec.op && r.grouping == spec.grouping) return v;
    }
    return 0;
}

bool is_valid(const TransformSpec& spec) noexcept { return spec_to_version(spec) != 0; }

std::string version_label(const TransformSpec& spec) {
    return (spec.family == Family::Extensional ? "ext" : "int") + std::to_string(spec_to_version(spec));
}

std::string output_file_name(std::string_view instance, const TransformSpec& spec) {
    return std::string(instance) + "__" + version_label(spec) + "__" + std::string(to_string(spec.dialect)) + ".c";
}

std::optional<Family> instance_family(const CspInstance& csp) {
    bool table = false;
    bool other = false;
    for (const auto& c : csp.constraints()) {
        (c.kind() == ConstraintKind::Extensional ? table : other) = true;
    }
    if (table == other) return std::nullopt;
    return table ? Family::Extensional : Family::Intensional;
}

// ---------------------------------------------------------------------------
// Conditions

namespace {

constexpr std::size_t kWrapColumn = 80;
constexpr std::int64_t kIntMin = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kIntMax = std::numeric_limits<std::int32_t>::max();

// C precedence levels (lower binds tighter).
constexpr int kPrecPrimary = 0;
constexpr int kPrecUnary = 2;
constexpr int kPrecMul = 3;
constexpr int kPrecAdd = 4;
constexpr int kPrecRel = 6;
constexpr int kPrecEq = 7;
constexpr int kPrecBitAnd = 8;
constexpr int kPrecBitOr = 10;
constexpr int kPrecLogAnd = 11;
constexpr int kPrecLogOr = 12;

struct Cond {
    enum class Kind { Atom, And, Or, Not };
    Kind kind = Kind::Atom;
    std::string text;  // Atom
    int prec = kPrecPrimary;
    std::vector<Cond> kids;

    static Cond atom(std::string t, int p) { return {Kind::Atom, std::move(t), p, {}}; }
    static Cond negate(Cond c) { return {Kind::Not, {}, kPrecUnary, {std::move(c)}}; }

    static Cond join(Kind k, std::vector<Cond> parts) {
        std::vector<Cond> flat;
        for (auto& p : parts) {
            if (p.kind == k) {
                for (auto& q : p.kids) flat.push_back(std::move(q));
            } else {
                flat.push_back(std::move(p));
            }
        }
        if (flat.size() == 1) return std::move(flat.front());
        return {k, {}, 0, std::move(flat)};
    }

    bool compound() const noexcept { return kind == Kind::And || kind == Kind::Or; }
};

struct Connectives {
    std::string_view conj;
    std::string_view disj;
    int conj_prec;
    int disj_prec;
};

Connectives connectives(Operator op) {
    if (op == Operator::Bitwise) return {"&", "|", kPrecBitAnd, kPrecBitOr};
    return {"&&", "||", kPrecLogAnd, kPrecLogOr};
}

std::string literal(std::int64_t v) {
    if (v == kIntMin) return "(-2147483647-1)";
    return std::to_string(v);
}

// -- expression rendering ----------------------------------------------------

class ExprPrinter {
public:
    ExprPrinter(const std::map<std::string, std::string>& names, Operator op, bool& uses_dist, bool& uses_abs)
        : names_(names), conn_(connectives(op)), uses_dist_(uses_dist), uses_abs_(uses_abs) {}

    // Returns the text and its top-level precedence.
    std::pair<std::string, int> render(const Expr& e) {
        switch (e.op()) {
            case Op::Var: return {names_.at(e.name()), kPrecPrimary};
            case Op::Const:
                if (e.value() < 0) return {"(" + literal(e.value()) + ")", kPrecPrimary};
                return {literal(e.value()), kPrecPrimary};
            case Op::Neg: return {"-" + operand(e.child(0), kPrecPrimary), kPrecUnary};
            case Op::Not: return {"!" + operand(e.child(0), kPrecPrimary), kPrecUnary};
            case Op::Abs: uses_abs_ = true; return {"csp_abs(" + render(e.child(0)).first + ")", kPrecPrimary};
            case Op::Dist:
                uses_dist_ = true;
                return {"dist(" + render(e.child(0)).first + "," + render(e.child(1)).first + ")", kPrecPrimary};
            case Op::And:
            case Op::Or: return logical(e);
            default: break;
        }
        const auto [sym, prec] = binary_symbol(e.op());
        const bool comparison = prec == kPrecRel || prec == kPrecEq;
        auto side = [&](const Expr& child, bool right) {
            auto [text, cp] = render(child);
            bool paren = cp > prec || (right && cp == prec && !(child.op() == e.op() && associative(e.op())));
            if (comparison && (cp == kPrecRel || cp == kPrecEq)) paren = true;
            return paren ? "(" + text + ")" : text;
        };
        return {side(e.child(0), false) + std::string(sym) + side(e.child(1), true), prec};
    }

    // Boolean-valued rendering: non-boolean expressions are compared against 0.
    std::pair<std::string, int> render_condition(const Expr& e) {
        if (is_boolean_op(e.op())) return render(e);
        return render(Expr::binary(Op::Ne, e, Expr::constant(0)));
    }

private:
    static bool associative(Op op) { return op == Op::Add || op == Op::Mul || op == Op::And || op == Op::Or; }

    static std::pair<std::string_view, int> binary_symbol(Op op) {
        switch (op) {
            case Op::Add: return {"+", kPrecAdd};
            case Op::Sub: return {"-", kPrecAdd};
            case Op::Mul: return {"*", kPrecMul};
            case Op::Eq: return {"==", kPrecEq};
            case Op::Ne: return {"!=", kPrecEq};
            case Op::Lt: return {"<", kPrecRel};
            case Op::Le: return {"<=", kPrecRel};
            case Op::Gt: return {">", kPrecRel};
            case Op::Ge: return {">=", kPrecRel};
            default: break;
        }
        throw CodegenError("no C operator for " + std::string(op_name(op)));
    }

    std::string operand(const Expr& e, int max_prec) {
        auto [text, p] = render(e);
        return p > max_prec ? "(" + text + ")" : text;
    }

    std::pair<std::string, int> logical(const Expr& e) {
        const bool conj = e.op() == Op::And;
        const int prec = conj ? conn_.conj_prec : conn_.disj_prec;
        const std::string_view sym = conj ? conn_.conj : conn_.disj;
        auto side = [&](const Expr& child, bool right) {
            auto [text, cp] = conn_.conj == "&" ? render_condition(child) : render(child);
            const bool same = child.op() == e.op();
            const bool paren = cp > prec || (right && cp == prec && !same) || (!same && cp >= kPrecBitAnd);
            return paren ? "(" + text + ")" : text;
        };
        return {side(e.child(0), false) + " " + std::string(sym) + " " + side(e.child(1), true), prec};
    }

    const std::map<std::string, std::string>& names_;
    Connectives conn_;
    bool& uses_dist_;
    bool& uses_abs_;
};

// -- interval check: every intermediate value must fit the generated int ----

struct Interval {
    std::int64_t lo;
    std::int64_t hi;
};

Interval bound(const Expr& e, const CspInstance& csp) {
    auto fits = [&](Interval i) {
        if (i.lo < kIntMin || i.hi > kIntMax) {
            throw CodegenError("expression " + e.to_string() + " may leave the 32-bit int range ([" +
                               std::to_string(i.lo) + ", " + std::to_string(i.hi) + "])");
        }
        return i;
    };
    switch (e.op()) {
        case Op::Var: {
            const auto& d = csp.variable(e.name()).domain;
            return fits({d.min(), d.max()});
        }
        case Op::Const: return fits({e.value(), e.value()});
        case Op::Placeholder: throw CodegenError("uninstantiated placeholder in " + e.to_string());
        default: break;
    }
    if (is_boolean_op(e.op())) {
        for (const auto& c : e.children()) bound(c, csp);
        return {0, 1};
    }
    const Interval a = bound(e.child(0), csp);
    switch (e.op()) {
        case Op::Neg: return fits({-a.hi, -a.lo});
        case Op::Abs:
            if (a.lo >= 0) return a;
            if (a.hi <= 0) return fits({-a.hi, -a.lo});
            return fits({0, std::max(-a.lo, a.hi)});
        default: break;
    }
    const Interval b = bound(e.child(1), csp);
    switch (e.op()) {
        case Op::Add: return fits({a.lo + b.lo, a.hi + b.hi});
        case Op::Sub: return fits({a.lo - b.hi, a.hi - b.lo});
        case Op::Mul: {
            const std::array<std::int64_t, 4> p = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
            return fits({*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end())});
        }
        case Op::Dist:
            // the macro evaluates whichever difference is non-negative
            fits({a.lo - b.hi, a.hi - b.lo});
            return fits({0, std::max(a.hi - b.lo, b.hi - a.lo)});
        default: break;
    }
    throw CodegenError("unexpected operator " + std::string(op_name(e.op())));
}

// -- C identifiers -------------------------------------------------------------

const std::set<std::string, std::less<>>& reserved_names() {
    static const std::set<std::string, std::less<>> names = {
        "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum",
        "extern", "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return",
        "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void",
        "volatile", "while", "_Bool", "_Complex", "_Imaginary", "main", "argc", "argv", "dist", "assert",
        "exit", "puts", "errno", "abs", "size_t", "uintptr_t", "NULL", "stdout", "fflush", "strtol",
    };
    return names;
}

bool plain_identifier(std::string_view id) {
    if (id.empty() || !(std::isalpha(static_cast<unsigned char>(id.front())) || id.front() == '_')) return false;
    if (!std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; })) {
        return false;
    }
    if (id.starts_with("_") || id.starts_with("csp_") || id.starts_with("klee_") || id.starts_with("v_")) return false;
    return !reserved_names().contains(id);
}

std::map<std::string, std::string> c_names(const CspInstance& csp) {
    std::map<std::string, std::string> out;
    std::set<std::string> used;
    for (const auto& v : csp.variables()) {
        if (plain_identifier(v.id)) used.insert(v.id);
    }
    for (const auto& v : csp.variables()) {
        if (plain_identifier(v.id)) {
            out[v.id] = v.id;
            continue;
        }
        std::string base = "v_";
        for (char c : v.id) base += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
        std::string name = base;
        for (int k = 2; used.contains(name); ++k) name = base + "_" + std::to_string(k);
        used.insert(name);
        out[v.id] = name;
    }
    return out;
}

// -- statement layout ----------------------------------------------------------

std::string inline_cond(const Cond& c, const Connectives& conn);
std::string wrapped_cond(const Cond& c, const Connectives& conn, std::size_t layout_col, std::size_t indent);

std::string operand_text(const Cond& c, const Connectives& conn, int join_prec) {
    if (c.compound()) return "(" + inline_cond(c, conn) + ")";
    if (c.kind == Cond::Kind::Not) return inline_cond(c, conn);
    return c.prec > join_prec ? "(" + c.text + ")" : c.text;
}

std::string inline_cond(const Cond& c, const Connectives& conn) {
    switch (c.kind) {
        case Cond::Kind::Atom: return c.text;
        case Cond::Kind::Not: {
            const Cond& k = c.kids.front();
            return "!(" + inline_cond(k, conn) + ")";
        }
        case Cond::Kind::And:
        case Cond::Kind::Or: {
            if (c.kids.empty()) return c.kind == Cond::Kind::And ? "1" : "0";
            const bool conj = c.kind == Cond::Kind::And;
            const auto sym = conj ? conn.conj : conn.disj;
            const int prec = conj ? conn.conj_prec : conn.disj_prec;
            std::string s;
            for (std::size_t i = 0; i < c.kids.size(); ++i) {
                if (i) s += " " + std::string(sym) + " ";
                s += operand_text(c.kids[i], conn, prec);
            }
            return s;
        }
    }
    return {};
}

// Renders a condition starting at `layout_col` (used for wrap decisions) with
// continuation lines indented by `indent` spaces. Top-level compound operands
// get a line each; atoms are packed up to kWrapColumn.
std::string wrapped_cond(const Cond& c, const Connectives& conn, std::size_t layout_col, std::size_t indent) {
    if (c.kind == Cond::Kind::Not) return "!(" + wrapped_cond(c.kids.front(), conn, layout_col + 2, indent + 2) + ")";
    if (!c.compound() || c.kids.empty()) return inline_cond(c, conn);
    const bool conj = c.kind == Cond::Kind::And;
    const std::string sym(conj ? conn.conj : conn.disj);
    const int prec = conj ? conn.conj_prec : conn.disj_prec;
    std::string s;
    std::size_t col = layout_col;
    // layout column just past `piece` when it starts at the beginning of a line
    auto end_col = [&](const std::string& piece) {
        const auto nl = piece.rfind('\n');
        return nl == std::string::npos ? layout_col + piece.size() : layout_col + piece.size() - nl - 1 - indent;
    };
    for (std::size_t i = 0; i < c.kids.size(); ++i) {
        std::string piece = operand_text(c.kids[i], conn, prec);
        if (c.kids[i].compound() && layout_col + piece.size() + sym.size() + 1 > kWrapColumn) {
            piece = "(" + wrapped_cond(c.kids[i], conn, layout_col + 1, indent + 1) + ")";
        }
        if (i == 0) {
            s = piece;
            col = end_col(piece);
            continue;
        }
        const bool boxed = c.kids[i - 1].compound() || c.kids[i].compound();
        if (boxed || col + sym.size() + 2 + piece.size() > kWrapColumn) {
            s += " " + sym + "\n" + std::string(indent, ' ') + piece;
            col = end_col(piece);
        } else {
            s += " " + sym + " " + piece;
            col += sym.size() + 2 + piece.size();
        }
    }
    return s;
}

// -- constraint units ------------------------------------------------------------

struct Unit {
    Cond cond;
    bool reject = false;  // cond describes forbidden valuations
};

class Encoder {
public:
    Encoder(const CspInstance& csp, const TransformSpec& spec)
        : csp_(csp), spec_(spec), conn_(connectives(spec.op)), names_(c_names(csp)) {}

    const std::map<std::string, std::string>& names() const noexcept { return names_; }
    bool uses_dist() const noexcept { return uses_dist_; }
    bool uses_abs() const noexcept { return uses_abs_; }

    Unit unit(const Constraint& c) {
        if (const auto* e = c.get_if<Extensional>()) {
            std::vector<Cond> tuples;
            for (const auto& t : e->tuples) {
                std::vector<Cond> eqs;
                for (std::size_t i = 0; i < t.size(); ++i) {
                    if (t[i] < kIntMin || t[i] > kIntMax) {
                        throw CodegenError("tuple value " + std::to_string(t[i]) + " outside the 32-bit int range");
                    }
                    eqs.push_back(Cond::atom(names_.at(e->scope[i]) + "==" + literal(t[i]), kPrecEq));
                }
                tuples.push_back(Cond::join(Cond::Kind::And, std::move(eqs)));
            }
            Cond any = tuples.empty() ? Cond{Cond::Kind::Or, {}, 0, {}} : Cond::join(Cond::Kind::Or, std::move(tuples));
            return {std::move(any), e->polarity == Polarity::Conflicts};
        }
        if (const auto* a = c.get_if<AllDifferent>()) {
            std::vector<Cond> ne;
            for (std::size_t i = 0; i < a->scope.size(); ++i) {
                for (std::size_t j = i + 1; j < a->scope.size(); ++j) {
                    ne.push_back(Cond::atom(names_.at(a->scope[i]) + "!=" + names_.at(a->scope[j]), kPrecEq));
                }
            }
            return {Cond::join(Cond::Kind::And, std::move(ne)), false};
        }
        const Expr& expr = c.as<Intensional>().expr;
        bound(expr, csp_);
        std::vector<Expr> conjuncts;
        split_conjuncts(expr, conjuncts);
        std::vector<Cond> atoms;
        ExprPrinter printer(names_, spec_.op, uses_dist_, uses_abs_);
        for (const auto& k : conjuncts) {
            auto [text, prec] = printer.render_condition(k);
            atoms.push_back(Cond::atom(std::move(text), prec));
        }
        return {Cond::join(Cond::Kind::And, std::move(atoms)), false};
    }

    // Merges units into one statement condition.
    static Unit combine(std::vector<Unit> units) {
        const bool all_reject =
            !units.empty() && std::all_of(units.begin(), units.end(), [](const Unit& u) { return u.reject; });
        std::vector<Cond> parts;
        for (auto& u : units) {
            if (!all_reject && u.reject) {
                parts.push_back(Cond::negate(std::move(u.cond)));
            } else {
                parts.push_back(std::move(u.cond));
            }
        }
        if (parts.empty()) return {Cond{Cond::Kind::And, {}, 0, {}}, false};
        return {Cond::join(all_reject ? Cond::Kind::Or : Cond::Kind::And, std::move(parts)), all_reject};
    }

    const Connectives& conn() const noexcept { return conn_; }

private:
    static void split_conjuncts(const Expr& e, std::vector<Expr>& out) {
        if (e.op() == Op::And) {
            split_conjuncts(e.child(0), out);
            split_conjuncts(e.child(1), out);
        } else {
            out.push_back(e);
        }
    }

    const CspInstance& csp_;
    TransformSpec spec_;
    Connectives conn_;
    std::map<std::string, std::string> names_;
    bool uses_dist_ = false;
    bool uses_abs_ = false;
};

// -- dialect spellings ---------------------------------------------------------

struct Spelling {
    std::string assume;   // "klee_assume"
    std::string reject;   // "exit(0);"
    std::string reached;  // "assert(0);"
};

Spelling spelling(Dialect d) {
    switch (d) {
        case Dialect::KLEE: return {"klee_assume", "exit(0);", "assert(0);"};
        case Dialect::LLBMC: return {"__llbmc_assume", "exit(0);", "assert(0);"};
        case Dialect::Concrete: return {"", "exit(1);", "csp_reached();"};
    }
    return {};
}

constexpr std::string_view kIndent = "  ";
constexpr std::string_view kReachedComment = "/* CSP is satisfiable */";

class StatementWriter {
public:
    StatementWriter(const TransformSpec& spec, const Connectives& conn)
        : spec_(spec), conn_(conn), sp_(spelling(spec.dialect)) {}

    // `assume(cond);` in the tool dialects, an exit(1) guard in the concrete one.
    std::string assume(const Cond& cond) const {
        if (spec_.dialect == Dialect::Concrete) return guard_exit("if (!(", cond, ")) exit(1);");
        // layout decisions use the KLEE spelling so tool dialects wrap identically
        const std::string open = sp_.assume + "(";
        const std::size_t layout = kIndent.size() + std::string_view("klee_assume(").size();
        return std::string(kIndent) + open + wrapped_cond(cond, conn_, layout, kIndent.size() + open.size()) + ");\n";
    }

    std::string statement(const Unit& u, bool guarded_assert) const {
        if (spec_.construct == Construct::Assume) {
            if (u.reject) return assume(Cond::negate(u.cond));
            return assume(u.cond);
        }
        if (guarded_assert) {
            const std::string open = "if (";
            std::string s = std::string(kIndent) + open +
                            wrapped_cond(u.cond, conn_, kIndent.size() + open.size(), kIndent.size() + open.size()) +
                            ")\n";
            s += std::string(kIndent) + std::string(kIndent) + std::string(kReachedComment) + "\n";
            s += std::string(kIndent) + std::string(kIndent) + sp_.reached + "\n";
            return s;
        }
        if (u.reject) return guard_exit("if (", u.cond, ") " + sp_.reject);
        return guard_exit("if (", u.cond, "); else " + sp_.reject);
    }

    std::string reached() const {
        return std::string(kIndent) + std::string(kReachedComment) + "\n" + std::string(kIndent) + sp_.reached + "\n";
    }

private:
    std::string guard_exit(const std::string& open, const Cond& cond, const std::string& close) const {
        const std::size_t col = kIndent.size() + open.size();
        return std::string(kIndent) + open + wrapped_cond(cond, conn_, col, col) + close + "\n";
    }

    TransformSpec spec_;
    Connectives conn_;
    Spelling sp_;
};

Cond domain_condition(const std::string& name, const Domain& d) {
    // bounds tests always use &&; only the disjunction over ranges follows the operator family
    auto range = [&](const Range& r, bool alone) {
        if (r.lo == r.hi) return Cond::atom(name + " == " + literal(r.lo), kPrecEq);
        std::string t = name + " >= " + literal(r.lo) + " && " + name + " <= " + literal(r.hi);
        return alone ? Cond::atom(std::move(t), kPrecLogAnd) : Cond::atom("(" + t + ")", kPrecPrimary);
    };
    if (d.contiguous()) return range(d.ranges().front(), true);
    std::vector<Cond> alts;
    for (const auto& r : d.ranges()) alts.push_back(range(r, false));
    return Cond::join(Cond::Kind::Or, std::move(alts));
}

void check_value(std::int64_t v, const std::string& who) {
    if (v < kIntMin || v > kIntMax) {
        throw CodegenError("domain of '" + who + "' contains " + std::to_string(v) +
                           ", outside the 32-bit int range");
    }
}

std::string header_comment(const CspInstance& csp, const TransformSpec& spec) {
    std::ostringstream s;
    s << "/* " << csp.name() << ": " << to_string(spec.family) << " version " << spec_to_version(spec)
      << " (construct=" << to_string(spec.construct) << ", operator=" << to_string(spec.op)
      << ", grouped=" << to_string(spec.grouping) << ") */\n";
    return s.str();
}

std::string declarations(const std::vector<std::string>& names) {
    std::string s = std::string(kIndent) + "int ";
    std::size_t col = s.size();
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::string piece = names[i] + (i + 1 == names.size() ? ";" : ",");
        if (i > 0) {
            if (col + 1 + piece.size() > kWrapColumn) {
                s += "\n" + std::string(kIndent) + "    ";
                col = kIndent.size() + 4;
            } else {
                s += ' ';
                ++col;
            }
        }
        s += piece;
        col += piece.size();
    }
    return s + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// transform

GeneratedProgram transform(const CspInstance& csp, const TransformSpec& spec) {
    if (!is_valid(spec)) {
        throw CodegenError("invalid " + std::string(to_string(spec.family)) + " transformation (" +
                           std::string(to_string(spec.construct)) + ", " + std::string(to_string(spec.op)) + ", " +
                           std::string(to_string(spec.grouping)) + ")");
    }
    if (csp.variables().empty()) throw CodegenError("instance has no variables");
    for (const auto& c : csp.constraints()) {
        const bool table = c.kind() == ConstraintKind::Extensional;
        if (table != (spec.family == Family::Extensional)) {
            throw CodegenError("family mismatch: " + std::string(to_string(spec.family)) +
                               " transformation cannot encode constraint " + c.to_string());
        }
    }
    for (const auto& v : csp.variables()) {
        check_value(v.domain.min(), v.id);
        check_value(v.domain.max(), v.id);
    }

    Encoder enc(csp, spec);
    const StatementWriter writer(spec, enc.conn());
    const auto& names = enc.names();

    // constraint-encoding statements
    std::vector<std::string> statements;
    bool guarded = false;
    std::vector<std::vector<Unit>> per_group;
    for (std::size_t g = 0; g < csp.groups().size(); ++g) {
        std::vector<Unit> units;
        for (const auto& c : csp.group_constraints(g)) units.push_back(enc.unit(c));
        per_group.push_back(std::move(units));
    }
    switch (spec.grouping) {
        case Grouping::No:
            for (auto& units : per_group) {
                for (auto& u : units) {
                    if (spec.op == Operator::NOP && u.cond.kind == Cond::Kind::And) {
                        for (auto& atom : u.cond.kids) statements.push_back(writer.statement({std::move(atom), false}, false));
                    } else {
                        statements.push_back(writer.statement(u, false));
                    }
                }
            }
            break;
        case Grouping::Yes:
            for (auto& units : per_group) {
                if (units.empty()) continue;
                statements.push_back(writer.statement(Encoder::combine(std::move(units)), false));
            }
            break;
        case Grouping::All: {
            std::vector<Unit> all;
            for (auto& units : per_group) {
                for (auto& u : units) all.push_back(std::move(u));
            }
            guarded = spec.family == Family::Intensional && spec.construct == Construct::IfStmt;
            statements.push_back(writer.statement(Encoder::combine(std::move(all)), guarded));
            break;
        }
    }

    std::vector<std::string> cvars;
    for (const auto& v : csp.variables()) cvars.push_back(names.at(v.id));

    std::string src = header_comment(csp, spec);
    switch (spec.dialect) {
        case Dialect::KLEE:
            src += "#include <assert.h>\n#include <stddef.h>\n#include <stdint.h>\n#include <stdlib.h>\n\n";
            src += "void klee_make_symbolic(void *addr, size_t nbytes, const char *name);\n";
            src += "void klee_assume(uintptr_t condition);\n";
            break;
        case Dialect::LLBMC:
            src += "#include <assert.h>\n#include <stdlib.h>\n\n";
            src += "int __llbmc_nondef_int(void);\n";
            src += "void __llbmc_assume(_Bool condition);\n";
            break;
        case Dialect::Concrete:
            src += "#include <errno.h>\n#include <limits.h>\n#include <stdio.h>\n#include <stdlib.h>\n\n";
            src += "static int csp_read_arg(const char *s) {\n";
            src += "  char *end;\n";
            src += "  long v;\n";
            src += "  errno = 0;\n";
            src += "  v = strtol(s, &end, 10);\n";
            src += "  if (end == s || *end != '\\0' || errno != 0 || v < INT_MIN || v > INT_MAX) exit(2);\n";
            src += "  return (int)v;\n";
            src += "}\n\n";
            src += "static void csp_reached(void) {\n";
            src += "  puts(\"" + std::string(kReachedMarker) + "\");\n";
            src += "  fflush(stdout);\n";
            src += "  exit(0);\n";
            src += "}\n";
            break;
    }
    if (enc.uses_dist()) src += "\n#define dist(a,b) ((a)>(b)?(a)-(b):(b)-(a))\n";
    if (enc.uses_abs()) src += (enc.uses_dist() ? "" : "\n") + std::string("#define csp_abs(a) ((a)<0?-(a):(a))\n");

    src += spec.dialect == Dialect::Concrete ? "\nint main(int argc, char **argv) {\n" : "\nint main(void) {\n";
    src += declarations(cvars);
    switch (spec.dialect) {
        case Dialect::KLEE:
            src += std::string(kIndent) + "// declare variables symbolic\n";
            for (const auto& n : cvars) src += std::string(kIndent) + "klee_make_symbolic(&" + n + ",sizeof(" + n + "),\"" + n + "\");\n";
            break;
        case Dialect::LLBMC:
            src += std::string(kIndent) + "// declare variables nondeterministic\n";
            for (const auto& n : cvars) src += std::string(kIndent) + n + " = __llbmc_nondef_int();\n";
            break;
        case Dialect::Concrete:
            src += std::string(kIndent) + "// read variable values\n";
            src += std::string(kIndent) + "if (argc != " + std::to_string(cvars.size() + 1) + ") exit(2);\n";
            for (std::size_t i = 0; i < cvars.size(); ++i) {
                src += std::string(kIndent) + cvars[i] + " = csp_read_arg(argv[" + std::to_string(i + 1) + "]);\n";
            }
            break;
    }
    src += std::string(kIndent) + "// enforce variable domains\n";
    for (const auto& v : csp.variables()) src += writer.assume(domain_condition(names.at(v.id), v.domain));
    src += std::string(kIndent) + "// constraints\n";
    for (const auto& s : statements) src += s;
    if (!guarded) src += writer.reached();
    src += std::string(kIndent) + (spec.dialect == Dialect::Concrete ? "return 1;\n" : "return 0;\n");
    src += "}\n";

    GeneratedProgram out;
    out.source = std::move(src);
    out.version_label = version_label(spec);
    out.spec = spec;
    out.statement_count = statements.size();
    out.line_count = static_cast<std::size_t>(std::count(out.source.begin(), out.source.end(), '\n'));
    out.var_map = names;
    return out;
}

GeneratedProgram emit_concrete_driver(const CspInstance& csp, TransformSpec spec) {
    spec.dialect = Dialect::Concrete;
    return transform(csp, spec);
}

}  // namespace csp2c
