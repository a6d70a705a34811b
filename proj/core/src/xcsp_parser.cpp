#include "csp2c/xcsp_parser.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace csp2c {

std::string_view to_string(DiagnosticKind kind) noexcept {
    switch (kind) {
        case DiagnosticKind::MalformedXml: return "malformed-xml";
        case DiagnosticKind::UnknownElement: return "unknown-element";
        case DiagnosticKind::UnsupportedFeature: return "unsupported-feature";
        case DiagnosticKind::ArityMismatch: return "arity-mismatch";
        case DiagnosticKind::EmptyDomain: return "empty-domain";
        case DiagnosticKind::UndeclaredVariable: return "undeclared-variable";
        case DiagnosticKind::DuplicateVariable: return "duplicate-variable";
        case DiagnosticKind::Syntax: return "syntax";
        case DiagnosticKind::Structure: return "structure";
    }
    return "?";
}

std::string ParseDiagnostic::to_string() const {
    std::string s = severity == Severity::Error ? "error" : "warning";
    s += " [";
    s += csp2c::to_string(kind);
    s += "]: ";
    if (!location.path.empty()) s += location.path + ' ';
    s += "(line " + std::to_string(location.line) + "): " + message;
    return s;
}

std::vector<ParseDiagnostic> ParseResult::errors() const {
    std::vector<ParseDiagnostic> out;
    std::copy_if(diagnostics.begin(), diagnostics.end(), std::back_inserter(out),
                 [](const auto& d) { return d.severity == Severity::Error; });
    return out;
}

std::string flatten_name(std::string_view array, std::span<const long long> indices) {
    std::string s(array);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) s += '_';
        s += std::to_string(indices[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Intension expressions

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class IntensionParser {
public:
    explicit IntensionParser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input '" + std::string(text_.substr(pos_)) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw IntensionSyntaxError(msg, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) {
            if (pos_ >= text_.size()) fail(std::string("unbalanced parentheses: expected '") + c + "' at end of input");
            fail(std::string("expected '") + c + "' but found '" + text_[pos_] + "'");
        }
        ++pos_;
    }

    long long integer() {
        long long v = 0;
        auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (ec != std::errc{}) fail("bad integer literal");
        pos_ = static_cast<std::size_t>(p - text_.data());
        return v;
    }

    Expr expr() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '%') {
            ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                fail("placeholder needs an index");
            }
            return Expr::placeholder(static_cast<int>(integer()));
        }
        if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c))) {
            if (c == '+') ++pos_;
            return Expr::constant(integer());
        }
        if (!ident_start(c)) fail(std::string("unexpected character '") + c + "'");
        const std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        std::string ident(text_.substr(start, pos_ - start));
        if (peek('(')) return call(ident);
        return Expr::var(reference(ident));
    }

    // x, x[3], m[1][2]
    std::string reference(const std::string& ident) {
        std::vector<long long> idx;
        while (pos_ < text_.size() && text_[pos_] == '[') {
            ++pos_;
            skip_ws();
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                fail("array index must be a non-negative integer");
            }
            idx.push_back(integer());
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ']') fail("unterminated array index");
            ++pos_;
        }
        return idx.empty() ? ident : flatten_name(ident, idx);
    }

    Expr call(const std::string& name) {
        static const std::map<std::string, Op, std::less<>> ops = {
            {"neg", Op::Neg}, {"abs", Op::Abs}, {"not", Op::Not}, {"add", Op::Add}, {"sub", Op::Sub},
            {"mul", Op::Mul}, {"eq", Op::Eq},   {"ne", Op::Ne},   {"lt", Op::Lt},   {"le", Op::Le},
            {"gt", Op::Gt},   {"ge", Op::Ge},   {"and", Op::And}, {"or", Op::Or},   {"dist", Op::Dist},
        };
        const std::size_t at = pos_;
        auto it = ops.find(name);
        if (it == ops.end()) {
            pos_ = at - name.size();
            fail("unknown operator '" + name + "'");
        }
        const Op op = it->second;
        expect('(');
        std::vector<Expr> args;
        if (!peek(')')) {
            args.push_back(expr());
            while (peek(',')) {
                ++pos_;
                args.push_back(expr());
            }
        }
        expect(')');

        const bool nary = op == Op::Add || op == Op::Mul || op == Op::And || op == Op::Or;
        const int want = op_arity(op);
        if (nary ? args.size() < 2 : args.size() != static_cast<std::size_t>(want)) {
            fail(name + " expects " + (nary ? "at least 2" : std::to_string(want)) + " arguments, got " +
                 std::to_string(args.size()));
        }
        if (want == 1) {
            if (op == Op::Abs && args[0].op() == Op::Sub) {
                return Expr::binary(Op::Dist, args[0].child(0), args[0].child(1));
            }
            return Expr::unary(op, args[0]);
        }
        Expr acc = Expr::binary(op, args[0], args[1]);
        for (std::size_t i = 2; i < args.size(); ++i) acc = Expr::binary(op, acc, args[i]);
        return acc;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_intension(std::string_view text) { return IntensionParser(text).parse(); }

// ---------------------------------------------------------------------------
// XML DOM (expat-backed)

namespace {

struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::string text;
    int line = 0;
    std::vector<std::unique_ptr<XmlElement>> children;
    XmlElement* parent = nullptr;

    const std::string* attr(const std::string& key) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    }
};

struct DomBuilder {
    XML_Parser parser;
    std::unique_ptr<XmlElement> root;
    XmlElement* current = nullptr;
    bool multiple_roots = false;

    static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
        auto* self = static_cast<DomBuilder*>(data);
        auto el = std::make_unique<XmlElement>();
        el->name = name;
        el->line = static_cast<int>(XML_GetCurrentLineNumber(self->parser));
        for (int i = 0; attrs[i]; i += 2) el->attrs.emplace(attrs[i], attrs[i + 1]);
        XmlElement* raw = el.get();
        if (self->current) {
            el->parent = self->current;
            self->current->children.push_back(std::move(el));
        } else {
            self->root = std::move(el);
        }
        self->current = raw;
    }

    static void on_end(void* data, const XML_Char*) {
        auto* self = static_cast<DomBuilder*>(data);
        self->current = self->current->parent;
    }

    static void on_text(void* data, const XML_Char* s, int len) {
        auto* self = static_cast<DomBuilder*>(data);
        if (self->current) self->current->text.append(s, static_cast<std::size_t>(len));
    }
};

struct XmlParseError {
    std::string message;
    int line;
};

std::variant<std::unique_ptr<XmlElement>, XmlParseError> parse_xml(std::string_view text) {
    DomBuilder b;
    b.parser = XML_ParserCreate(nullptr);
    XML_SetUserData(b.parser, &b);
    XML_SetElementHandler(b.parser, &DomBuilder::on_start, &DomBuilder::on_end);
    XML_SetCharacterDataHandler(b.parser, &DomBuilder::on_text);
    const auto status = XML_Parse(b.parser, text.data(), static_cast<int>(text.size()), XML_TRUE);
    std::variant<std::unique_ptr<XmlElement>, XmlParseError> out;
    if (status == XML_STATUS_ERROR) {
        out = XmlParseError{XML_ErrorString(XML_GetErrorCode(b.parser)),
                            static_cast<int>(XML_GetCurrentLineNumber(b.parser))};
    } else {
        out = std::move(b.root);
    }
    XML_ParserFree(b.parser);
    return out;
}

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::optional<long long> to_int(std::string_view s) {
    long long v = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// XCSP3 subset walker

// Recognized XCSP3 elements outside the supported subset.
const std::set<std::string, std::less<>>& known_unsupported() {
    static const std::set<std::string, std::less<>> names = {
        "objectives", "annotations", "minimize", "maximize", "block", "slide", "sum", "count", "nValues",
        "cardinality", "maximum", "minimum", "element", "channel", "stretch", "noOverlap", "cumulative",
        "instantiation", "circuit", "mdd", "regular", "ordered", "lex", "precedence", "allEqual",
        "allDistinct", "clause", "knapsack", "binPacking", "flow", "smart", "matrix", "except", "ifThen",
        "ifThenElse", "notAllEqual", "allDifferentList", "allDifferentMatrix", "nooverlap", "sat", "binPacking",
        "decision", "vars", "operator", "condition", "transitions", "start", "final", "coeffs", "values",
        "origins", "lengths", "heights", "function", "index", "value", "occurs", "closed", "symbolic",
        "real", "set",
    };
    return names;
}

struct ArrayShape {
    std::vector<long long> dims;
};

struct DocumentError {
    ParseDiagnostic diag;
};

class Walker {
public:
    explicit Walker(std::string name) : name_(std::move(name)) {}

    ParseResult run(const XmlElement& root) {
        ParseResult result;
        try {
            walk_root(root);
        } catch (const DocumentError& e) {
            diags_.push_back(e.diag);
        }
        bool has_error = std::any_of(diags_.begin(), diags_.end(),
                                     [](const auto& d) { return d.severity == Severity::Error; });
        if (!has_error && variables_.empty()) {
            error(DiagnosticKind::Structure, {"/instance", root.line}, "instance declares no variables");
            has_error = true;
        }
        if (!has_error) {
            try {
                result.instance = CspInstance::create(name_, variables_, groups_, flattening_);
            } catch (const ModelError& e) {
                error(DiagnosticKind::Structure, {"/instance", root.line}, e.what());
            }
        }
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    // -- diagnostics --------------------------------------------------------

    void error(DiagnosticKind kind, SourceLocation loc, std::string msg) {
        diags_.push_back({Severity::Error, kind, std::move(loc), std::move(msg)});
    }

    void warn(DiagnosticKind kind, SourceLocation loc, std::string msg) {
        diags_.push_back({Severity::Warning, kind, std::move(loc), std::move(msg)});
    }

    [[noreturn]] void abort(DiagnosticKind kind, const XmlElement& el, std::string msg) {
        throw DocumentError{{Severity::Error, kind, location(el), std::move(msg)}};
    }

    static std::string path_of(const XmlElement& el) {
        std::vector<std::string> parts;
        for (const XmlElement* e = &el; e; e = e->parent) {
            std::string part = e->name;
            if (e->parent) {
                int idx = 0;
                int count = 0;
                for (const auto& sib : e->parent->children) {
                    if (sib->name != e->name) continue;
                    ++count;
                    if (sib.get() == e) idx = count;
                }
                part += '[' + std::to_string(idx) + ']';
            }
            parts.push_back(std::move(part));
        }
        std::string s;
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) s += '/' + *it;
        return s;
    }

    static SourceLocation location(const XmlElement& el) { return {path_of(el), el.line}; }

    void reject_element(const XmlElement& el, std::string_view context) {
        if (known_unsupported().contains(el.name) || el.name == "var" || el.name == "array" ||
            el.name == "group" || el.name == "extension" || el.name == "intension" ||
            el.name == "allDifferent" || el.name == "list" || el.name == "args" ||
            el.name == "supports" || el.name == "conflicts" || el.name == "variables" ||
            el.name == "constraints") {
            error(DiagnosticKind::UnsupportedFeature, location(el),
                  "unsupported feature: <" + el.name + "> " + std::string(context));
        } else {
            error(DiagnosticKind::UnknownElement, location(el), "unknown element <" + el.name + ">");
        }
    }

    void require_no_text(const XmlElement& el) {
        if (!trim(el.text).empty()) abort(DiagnosticKind::Structure, el, "<" + el.name + "> has unexpected text");
    }

    // -- root ---------------------------------------------------------------

    void walk_root(const XmlElement& root) {
        if (root.name != "instance") {
            abort(DiagnosticKind::UnknownElement, root, "root element must be <instance>, found <" + root.name + ">");
        }
        if (const auto* type = root.attr("type"); type && *type != "CSP") {
            abort(DiagnosticKind::UnsupportedFeature, root,
                  "unsupported feature: instance type '" + *type + "' (only CSP is supported)");
        }
        if (const auto* id = root.attr("id"); id && !id->empty()) name_ = *id;
        bool seen_vars = false;
        for (const auto& child : root.children) {
            if (child->name == "variables") {
                walk_variables(*child);
                seen_vars = true;
            } else if (child->name == "constraints") {
                if (!seen_vars) abort(DiagnosticKind::Structure, *child, "<constraints> before <variables>");
                walk_constraints(*child);
            } else {
                reject_element(*child, "in <instance>");
            }
        }
    }

    // -- variables ----------------------------------------------------------

    void declare(const std::string& id, const std::string& original, Domain domain, const XmlElement& el) {
        if (!declared_.insert(id).second) {
            error(DiagnosticKind::DuplicateVariable, location(el), "duplicate variable id '" + id + "'");
            return;
        }
        variables_.push_back({id, std::move(domain)});
        if (original != id) flattening_[original] = id;
    }

    std::optional<Domain> domain_from_text(const XmlElement& el, std::string_view text, const std::string& who) {
        std::vector<Range> ranges;
        for (const auto& tok : split_ws(text)) {
            const auto dots = tok.find("..");
            if (dots == std::string::npos) {
                auto v = to_int(tok);
                if (!v) {
                    error(DiagnosticKind::Syntax, location(el), "bad domain value '" + tok + "' for " + who);
                    return std::nullopt;
                }
                ranges.push_back({*v, *v});
            } else {
                auto lo = to_int(std::string_view(tok).substr(0, dots));
                auto hi = to_int(std::string_view(tok).substr(dots + 2));
                if (!lo || !hi) {
                    error(DiagnosticKind::Syntax, location(el), "bad domain range '" + tok + "' for " + who);
                    return std::nullopt;
                }
                if (*lo > *hi) continue;  // empty range contributes nothing
                ranges.push_back({*lo, *hi});
            }
        }
        if (ranges.empty()) {
            error(DiagnosticKind::EmptyDomain, location(el), "empty domain for " + who);
            return std::nullopt;
        }
        return Domain::from_ranges(std::move(ranges));
    }

    bool check_var_attrs(const XmlElement& el) {
        if (const auto* t = el.attr("type"); t && *t != "integer") {
            error(DiagnosticKind::UnsupportedFeature, location(el),
                  "unsupported feature: variable type '" + *t + "'");
            return false;
        }
        if (el.attr("as")) {
            error(DiagnosticKind::UnsupportedFeature, location(el), "unsupported feature: variable alias ('as')");
            return false;
        }
        return true;
    }

    void walk_variables(const XmlElement& el) {
        require_no_text(el);
        for (const auto& child : el.children) {
            if (child->name == "var") {
                walk_var(*child);
            } else if (child->name == "array") {
                walk_array(*child);
            } else {
                reject_element(*child, "in <variables>");
            }
        }
    }

    static bool valid_id(std::string_view id) {
        if (id.empty() || !ident_start(id.front())) return false;
        return std::all_of(id.begin(), id.end(), ident_char);
    }

    void walk_var(const XmlElement& el) {
        const auto* id = el.attr("id");
        if (!id || !valid_id(*id)) {
            error(DiagnosticKind::Structure, location(el), "<var> needs a valid id attribute");
            return;
        }
        if (!check_var_attrs(el)) return;
        for (const auto& c : el.children) reject_element(*c, "in <var>");
        if (auto d = domain_from_text(el, el.text, "'" + *id + "'")) declare(*id, *id, std::move(*d), el);
    }

    void walk_array(const XmlElement& el) {
        const auto* id = el.attr("id");
        const auto* size = el.attr("size");
        if (!id || !valid_id(*id) || !size) {
            error(DiagnosticKind::Structure, location(el), "<array> needs valid id and size attributes");
            return;
        }
        if (!check_var_attrs(el)) return;
        ArrayShape shape;
        std::string_view s = *size;
        while (!s.empty()) {
            const auto close = s.find(']');
            if (s.front() != '[' || close == std::string_view::npos) break;
            auto n = to_int(trim(s.substr(1, close - 1)));
            if (!n || *n <= 0) break;
            shape.dims.push_back(*n);
            s.remove_prefix(close + 1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        }
        if (!s.empty() || shape.dims.empty()) {
            error(DiagnosticKind::Syntax, location(el), "bad array size '" + *size + "'");
            return;
        }
        arrays_[*id] = shape;

        std::vector<std::vector<long long>> cells;
        enumerate_cells(shape.dims, {}, cells);
        std::map<std::vector<long long>, Domain> domains;
        const std::string body = trim(el.text);
        if (!el.children.empty()) {
            if (!body.empty()) {
                error(DiagnosticKind::Structure, location(el), "<array> mixes a domain text with <domain> elements");
                return;
            }
            std::optional<Domain> others;
            for (const auto& d : el.children) {
                if (d->name != "domain") {
                    reject_element(*d, "in <array>");
                    return;
                }
                const auto* f = d->attr("for");
                if (!f) {
                    error(DiagnosticKind::Structure, location(*d), "<domain> needs a 'for' attribute");
                    return;
                }
                auto dom = domain_from_text(*d, d->text, "array '" + *id + "'");
                if (!dom) return;
                if (trim(*f) == "others") {
                    others = dom;
                    continue;
                }
                for (const auto& tok : split_ws(*f)) {
                    auto refs = expand_reference(*d, tok);
                    if (!refs) return;
                    for (const auto& r : *refs) domains.insert_or_assign(r.second, *dom);
                }
            }
            for (const auto& cell : cells) {
                if (domains.contains(cell)) continue;
                if (!others) {
                    error(DiagnosticKind::EmptyDomain, location(el),
                          "no domain given for " + flatten_name(*id, cell) + " in array '" + *id + "'");
                    return;
                }
                domains.emplace(cell, *others);
            }
        } else {
            auto dom = domain_from_text(el, body, "array '" + *id + "'");
            if (!dom) return;
            for (const auto& cell : cells) domains.emplace(cell, *dom);
        }
        for (const auto& cell : cells) {
            std::string original = *id;
            for (long long i : cell) original += '[' + std::to_string(i) + ']';
            declare(flatten_name(*id, cell), original, domains.at(cell), el);
        }
    }

    static void enumerate_cells(const std::vector<long long>& dims, std::vector<long long> prefix,
                                std::vector<std::vector<long long>>& out) {
        if (prefix.size() == dims.size()) {
            out.push_back(std::move(prefix));
            return;
        }
        const long long n = dims[prefix.size()];
        for (long long i = 0; i < n; ++i) {
            auto p = prefix;
            p.push_back(i);
            enumerate_cells(dims, std::move(p), out);
        }
    }

    // Expands "x", "x[2]", "x[]", "x[1..3][0]" into (flat id, indices). Placeholders and
    // integer literals pass through with empty indices.
    std::optional<std::vector<std::pair<std::string, std::vector<long long>>>> expand_reference(
        const XmlElement& el, const std::string& tok) {
        using Out = std::vector<std::pair<std::string, std::vector<long long>>>;
        if (placeholder_index(tok) || to_int(tok)) return Out{{tok, {}}};
        const auto br = tok.find('[');
        const std::string base = tok.substr(0, br);
        if (!valid_id(base)) {
            error(DiagnosticKind::Syntax, location(el), "bad variable reference '" + tok + "'");
            return std::nullopt;
        }
        if (br == std::string::npos) {
            if (arrays_.contains(base)) {
                error(DiagnosticKind::Syntax, location(el),
                      "array '" + base + "' used without indices (write " + base + "[] for the whole array)");
                return std::nullopt;
            }
            return Out{{base, {}}};
        }
        auto shape = arrays_.find(base);
        if (shape == arrays_.end()) {
            error(DiagnosticKind::UndeclaredVariable, location(el), "undeclared array '" + base + "' in '" + tok + "'");
            return std::nullopt;
        }
        // per-dimension index ranges
        std::vector<std::pair<long long, long long>> sel;
        std::string_view rest = std::string_view(tok).substr(br);
        while (!rest.empty()) {
            const auto close = rest.find(']');
            if (rest.front() != '[' || close == std::string_view::npos) {
                error(DiagnosticKind::Syntax, location(el), "bad index in '" + tok + "'");
                return std::nullopt;
            }
            const std::string inner = trim(rest.substr(1, close - 1));
            const std::size_t dim = sel.size();
            if (dim >= shape->second.dims.size()) {
                error(DiagnosticKind::Syntax, location(el), "too many indices in '" + tok + "'");
                return std::nullopt;
            }
            const long long n = shape->second.dims[dim];
            if (inner.empty()) {
                sel.push_back({0, n - 1});
            } else if (const auto dots = inner.find(".."); dots != std::string::npos) {
                auto lo = to_int(std::string_view(inner).substr(0, dots));
                auto hi = to_int(std::string_view(inner).substr(dots + 2));
                if (!lo || !hi || *lo > *hi) {
                    error(DiagnosticKind::Syntax, location(el), "bad index range in '" + tok + "'");
                    return std::nullopt;
                }
                sel.push_back({*lo, *hi});
            } else if (auto v = to_int(inner)) {
                sel.push_back({*v, *v});
            } else {
                error(DiagnosticKind::Syntax, location(el), "bad index in '" + tok + "'");
                return std::nullopt;
            }
            if (sel.back().first < 0 || sel.back().second >= n) {
                error(DiagnosticKind::UndeclaredVariable, location(el),
                      "index out of bounds in '" + tok + "' (array '" + base + "' has size " + std::to_string(n) +
                          " in dimension " + std::to_string(dim) + ")");
                return std::nullopt;
            }
            rest.remove_prefix(close + 1);
        }
        if (sel.size() != shape->second.dims.size()) {
            error(DiagnosticKind::Syntax, location(el), "wrong number of indices in '" + tok + "'");
            return std::nullopt;
        }
        Out out;
        std::vector<long long> cur(sel.size());
        std::function<void(std::size_t)> rec = [&](std::size_t d) {
            if (d == sel.size()) {
                out.push_back({flatten_name(base, cur), cur});
                return;
            }
            for (long long i = sel[d].first; i <= sel[d].second; ++i) {
                cur[d] = i;
                rec(d + 1);
            }
        };
        rec(0);
        return out;
    }

    // Expands a whitespace list of references and checks that plain variables exist.
    std::optional<std::vector<std::string>> reference_list(const XmlElement& el, std::string_view text,
                                                           bool allow_placeholders, bool allow_integers) {
        std::vector<std::string> out;
        for (const auto& tok : split_ws(text)) {
            if (placeholder_index(tok)) {
                if (!allow_placeholders) {
                    error(DiagnosticKind::Syntax, location(el), "placeholder '" + tok + "' outside a group template");
                    return std::nullopt;
                }
                out.push_back(tok);
                continue;
            }
            if (to_int(tok)) {
                if (!allow_integers) {
                    error(DiagnosticKind::Syntax, location(el), "integer '" + tok + "' where a variable is expected");
                    return std::nullopt;
                }
                out.push_back(tok);
                continue;
            }
            auto refs = expand_reference(el, tok);
            if (!refs) return std::nullopt;
            for (auto& r : *refs) {
                if (!declared_.contains(r.first)) {
                    error(DiagnosticKind::UndeclaredVariable, location(el), "undeclared variable '" + tok + "'");
                    return std::nullopt;
                }
                out.push_back(std::move(r.first));
            }
        }
        return out;
    }

    // -- constraints --------------------------------------------------------

    void walk_constraints(const XmlElement& el) {
        require_no_text(el);
        for (const auto& child : el.children) {
            const std::string label = child->attr("id") ? *child->attr("id") : std::string();
            if (child->name == "group") {
                walk_group(*child, label);
            } else if (is_constraint_element(child->name)) {
                if (auto c = walk_constraint(*child, false)) {
                    if (c->placeholder_count() > 0) {
                        error(DiagnosticKind::Syntax, location(*child), "placeholder outside a group template");
                    } else if (check_constraint(*child, *c)) {
                        groups_.push_back(ConstraintGroup::singleton(std::move(*c), label));
                    }
                }
            } else {
                reject_element(*child, "in <constraints>");
            }
        }
    }

    static bool is_constraint_element(std::string_view n) {
        return n == "extension" || n == "intension" || n == "allDifferent";
    }

    // Concrete-constraint checks with the element's location attached.
    bool check_constraint(const XmlElement& el, const Constraint& c) {
        for (const auto& v : c.scope()) {
            if (!declared_.contains(v)) {
                error(DiagnosticKind::UndeclaredVariable, location(el), "undeclared variable '" + v + "'");
                return false;
            }
        }
        try {
            c.validate();
        } catch (const ModelError& e) {
            error(DiagnosticKind::Structure, location(el), e.what());
            return false;
        }
        return true;
    }

    std::optional<Constraint> walk_constraint(const XmlElement& el, bool in_group, std::size_t inferred_arity = 0) {
        if (el.name == "extension") return walk_extension(el, in_group, inferred_arity);
        if (el.name == "intension") return walk_intension(el);
        return walk_all_different(el, in_group);
    }

    std::optional<Constraint> walk_extension(const XmlElement& el, bool in_group, std::size_t inferred_arity) {
        require_no_text(el);
        const XmlElement* list = nullptr;
        const XmlElement* table = nullptr;
        for (const auto& c : el.children) {
            if (c->name == "list" && !list) {
                list = c.get();
            } else if ((c->name == "supports" || c->name == "conflicts") && !table) {
                table = c.get();
            } else {
                reject_element(*c, "in <extension>");
                return std::nullopt;
            }
        }
        if (!list || !table) {
            error(DiagnosticKind::Structure, location(el), "<extension> needs one <list> and one <supports>/<conflicts>");
            return std::nullopt;
        }
        Extensional ext;
        ext.polarity = table->name == "supports" ? Polarity::Supports : Polarity::Conflicts;
        const auto list_text = trim(list->text);
        if (in_group && (list_text.empty() || list_text == "%...")) {
            for (std::size_t i = 0; i < inferred_arity; ++i) ext.scope.push_back("%" + std::to_string(i));
        } else {
            auto scope = reference_list(*list, list_text, in_group, false);
            if (!scope) return std::nullopt;
            ext.scope = std::move(*scope);
        }
        if (ext.scope.empty()) {
            error(DiagnosticKind::Structure, location(*list), "empty <list> in <extension>");
            return std::nullopt;
        }
        auto tuples = parse_tuples(*table, ext.scope.size());
        if (!tuples) return std::nullopt;
        ext.tuples = std::move(*tuples);
        if (ext.tuples.empty()) {
            warn(DiagnosticKind::Structure, location(*table),
                 ext.polarity == Polarity::Supports ? "empty <supports>: constraint can never be satisfied"
                                                    : "empty <conflicts>: constraint is always satisfied");
        }
        return Constraint(std::move(ext));
    }

    // "(0,0,0) (0,1,0)", "(0 0 0)(0,1,0)", or for unary scopes "1 3 5..7".
    std::optional<std::vector<Tuple>> parse_tuples(const XmlElement& el, std::size_t arity) {
        const std::string text = el.text;
        std::vector<Tuple> out;
        if (text.find('*') != std::string::npos) {
            error(DiagnosticKind::UnsupportedFeature, location(el), "unsupported feature: starred tuples ('*')");
            return std::nullopt;
        }
        if (arity == 1 && text.find('(') == std::string::npos) {
            for (const auto& tok : split_ws(text)) {
                const auto dots = tok.find("..");
                auto lo = to_int(std::string_view(tok).substr(0, dots));
                auto hi = dots == std::string::npos ? lo : to_int(std::string_view(tok).substr(dots + 2));
                if (!lo || !hi) {
                    error(DiagnosticKind::Syntax, location(el), "bad unary tuple value '" + tok + "'");
                    return std::nullopt;
                }
                for (long long v = *lo; v <= *hi; ++v) out.push_back({v});
            }
            return out;
        }
        std::size_t i = 0;
        auto skip = [&] {
            while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) ++i;
        };
        while (true) {
            skip();
            if (i >= text.size()) break;
            if (text[i] != '(') {
                error(DiagnosticKind::Syntax, location(el),
                      std::string("expected '(' in tuple list, found '") + text[i] + "'");
                return std::nullopt;
            }
            const auto close = text.find(')', i);
            if (close == std::string::npos) {
                error(DiagnosticKind::Syntax, location(el), "unterminated tuple");
                return std::nullopt;
            }
            Tuple t;
            std::string inner = text.substr(i + 1, close - i - 1);
            std::replace(inner.begin(), inner.end(), ',', ' ');
            for (const auto& tok : split_ws(inner)) {
                auto v = to_int(tok);
                if (!v) {
                    error(DiagnosticKind::Syntax, location(el), "bad tuple value '" + tok + "'");
                    return std::nullopt;
                }
                t.push_back(*v);
            }
            if (t.size() != arity) {
                error(DiagnosticKind::ArityMismatch, location(el),
                      "tuple " + std::to_string(out.size()) + " has arity " + std::to_string(t.size()) +
                          " but the scope has " + std::to_string(arity) + " variables");
                return std::nullopt;
            }
            out.push_back(std::move(t));
            i = close + 1;
        }
        return out;
    }

    std::optional<Constraint> walk_intension(const XmlElement& el) {
        std::string text = trim(el.text);
        for (const auto& c : el.children) {
            if (c->name == "function" && text.empty()) {
                text = trim(c->text);
            } else {
                reject_element(*c, "in <intension>");
                return std::nullopt;
            }
        }
        if (text.empty()) {
            error(DiagnosticKind::Structure, location(el), "empty <intension>");
            return std::nullopt;
        }
        try {
            return Constraint(Intensional{parse_intension(text)});
        } catch (const IntensionSyntaxError& e) {
            error(DiagnosticKind::Syntax, location(el),
                  std::string(e.what()) + " at offset " + std::to_string(e.offset()) + " in '" + text + "'");
            return std::nullopt;
        }
    }

    std::optional<Constraint> walk_all_different(const XmlElement& el, bool in_group) {
        std::string text = trim(el.text);
        for (const auto& c : el.children) {
            if (c->name == "list" && text.empty()) {
                text = trim(c->text);
            } else {
                reject_element(*c, "in <allDifferent>");
                return std::nullopt;
            }
        }
        auto scope = reference_list(el, text, in_group, false);
        if (!scope) return std::nullopt;
        return Constraint(AllDifferent{std::move(*scope)});
    }

    void walk_group(const XmlElement& el, const std::string& label) {
        require_no_text(el);
        const XmlElement* templ_el = nullptr;
        std::vector<const XmlElement*> args_els;
        for (const auto& c : el.children) {
            if (!templ_el && args_els.empty()) {
                if (!is_constraint_element(c->name)) {
                    reject_element(*c, "as a group template");
                    return;
                }
                templ_el = c.get();
            } else if (c->name == "args") {
                args_els.push_back(c.get());
            } else {
                reject_element(*c, "in <group>");
                return;
            }
        }
        if (!templ_el) {
            error(DiagnosticKind::Structure, location(el), "<group> without a constraint template");
            return;
        }
        std::vector<std::vector<std::string>> args;
        for (const auto* a : args_els) {
            auto refs = reference_list(*a, a->text, false, true);
            if (!refs) return;
            args.push_back(std::move(*refs));
        }
        if (args.empty()) warn(DiagnosticKind::Structure, location(el), "<group> with no <args>");
        auto templ = walk_constraint(*templ_el, true, args.empty() ? 0 : args.front().size());
        if (!templ) return;
        const auto slots = static_cast<std::size_t>(templ->placeholder_count());
        for (std::size_t k = 0; k < args.size(); ++k) {
            if (args[k].size() != slots) {
                error(DiagnosticKind::ArityMismatch, location(*args_els[k]),
                      "args vector " + std::to_string(k) + " has " + std::to_string(args[k].size()) +
                          " entries but the template expects " + std::to_string(slots));
                return;
            }
        }
        auto group = ConstraintGroup::templated(std::move(*templ), std::move(args), label);
        std::vector<Constraint> instances;
        try {
            instances = instantiate_group(group);
        } catch (const ModelError& e) {
            error(DiagnosticKind::ArityMismatch, location(el), e.what());
            return;
        }
        for (std::size_t k = 0; k < instances.size(); ++k) {
            if (!check_constraint(*args_els[k], instances[k])) return;
        }
        groups_.push_back(std::move(group));
    }

    std::string name_;
    std::vector<ParseDiagnostic> diags_;
    std::vector<VariableDecl> variables_;
    std::set<std::string> declared_;
    std::map<std::string, ArrayShape> arrays_;
    std::map<std::string, std::string> flattening_;
    std::vector<ConstraintGroup> groups_;
};

}  // namespace

ParseResult parse_document(std::string_view xml_text, std::string name) {
    if (trim(xml_text).empty()) {
        ParseResult r;
        r.diagnostics.push_back({Severity::Error, DiagnosticKind::MalformedXml, {"", 0}, "empty document"});
        return r;
    }
    auto dom = parse_xml(xml_text);
    if (auto* err = std::get_if<XmlParseError>(&dom)) {
        ParseResult r;
        r.diagnostics.push_back(
            {Severity::Error, DiagnosticKind::MalformedXml, {"", err->line}, "malformed XML: " + err->message});
        return r;
    }
    return Walker(std::move(name)).run(*std::get<std::unique_ptr<XmlElement>>(dom));
}

ParseResult parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back({Severity::Error, DiagnosticKind::Structure, {path, 0}, "cannot open file"});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), std::filesystem::path(path).stem().string());
}

}  // namespace csp2c
