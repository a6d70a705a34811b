#include <catch2/catch_amalgamated.hpp>

#include <regex>

#include "corpus.hpp"
#include "csp2c/codegen.hpp"
#include "csp2c/xcsp_parser.hpp"

using namespace csp2c;
using testsupport::c_tokens;
using testsupport::load_valid;

namespace {

struct Row {
    int version;
    Construct construct;
    Operator op;
    Grouping grouping;
};

constexpr auto If = Construct::IfStmt;
constexpr auto Assume = Construct::Assume;
constexpr auto L = Operator::Logical;
constexpr auto B = Operator::Bitwise;
constexpr auto NOP = Operator::NOP;

const std::vector<Row> kExtensionalRows{
    {1, If, L, Grouping::No},      {2, If, L, Grouping::Yes},      {3, If, L, Grouping::All},
    {4, If, B, Grouping::No},      {5, If, B, Grouping::Yes},      {6, If, B, Grouping::All},
    {7, Assume, L, Grouping::No},  {8, Assume, L, Grouping::Yes},  {9, Assume, L, Grouping::All},
    {10, Assume, B, Grouping::No}, {11, Assume, B, Grouping::Yes}, {12, Assume, B, Grouping::All},
};

const std::vector<Row> kIntensionalRows{
    {1, If, NOP, Grouping::No},    {2, If, L, Grouping::Yes},     {3, If, L, Grouping::All},
    {4, If, B, Grouping::Yes},     {5, If, B, Grouping::All},     {6, Assume, NOP, Grouping::No},
    {7, Assume, L, Grouping::Yes}, {8, Assume, L, Grouping::All}, {9, Assume, B, Grouping::Yes},
    {10, Assume, B, Grouping::All},
};

std::string constraints_section(const std::string& src) {
    const auto at = src.find("// constraints\n");
    REQUIRE(at != std::string::npos);
    return src.substr(at);
}

CspInstance parse_xml(const std::string& xml) {
    auto r = parse_document(xml, "t");
    REQUIRE(r.ok());
    return std::move(*r.instance);
}

}  // namespace

TEST_CASE("version matrix rows", "[codegen][matrix]") {
    REQUIRE(version_count(Family::Extensional) == 12);
    REQUIRE(version_count(Family::Intensional) == 10);
    for (const auto& [family, rows] : {std::pair{Family::Extensional, kExtensionalRows},
                                       std::pair{Family::Intensional, kIntensionalRows}}) {
        for (const auto& r : rows) {
            INFO(to_string(family) << " " << r.version);
            const auto spec = version_to_spec(family, r.version);
            CHECK(spec.family == family);
            CHECK(spec.construct == r.construct);
            CHECK(spec.op == r.op);
            CHECK(spec.grouping == r.grouping);
            CHECK(spec_to_version(spec) == r.version);
        }
    }
    CHECK_THROWS_AS(version_to_spec(Family::Extensional, 13), CodegenError);
    CHECK_THROWS_AS(version_to_spec(Family::Intensional, 0), CodegenError);
    CHECK(spec_to_version({Family::Extensional, If, NOP, Grouping::No, Dialect::KLEE}) == 0);
    CHECK(spec_to_version({Family::Intensional, If, L, Grouping::No, Dialect::KLEE}) == 0);
}

TEST_CASE("labels and file names", "[codegen]") {
    const auto spec = version_to_spec(Family::Extensional, 5, Dialect::LLBMC);
    CHECK(version_label(spec) == "ext5");
    CHECK(output_file_name("fig1a", spec) == "fig1a__ext5__llbmc.c");
    CHECK(version_label(version_to_spec(Family::Intensional, 3)) == "int3");
}

TEST_CASE("instance family detection", "[codegen]") {
    CHECK(instance_family(load_valid("fig1a.xml")) == Family::Extensional);
    CHECK(instance_family(load_valid("queens4.xml")) == Family::Intensional);
    CHECK_FALSE(instance_family(load_valid("no-constraints.xml")).has_value());
    const auto mixed = parse_xml(
        "<instance type=\"CSP\"><variables><var id=\"a\"> 0..1 </var><var id=\"b\"> 0..1 </var></variables>"
        "<constraints><allDifferent> a b </allDifferent><extension><list> a </list><supports> 1 </supports>"
        "</extension></constraints></instance>");
    CHECK_FALSE(instance_family(mixed).has_value());
    CHECK_THROWS_AS(transform(mixed, version_to_spec(Family::Extensional, 1)), CodegenError);
    CHECK_THROWS_AS(transform(load_valid("fig1a.xml"), version_to_spec(Family::Intensional, 1)), CodegenError);
}

TEST_CASE("generated sources match the pinned golden files", "[codegen][golden]") {
    const std::vector<std::tuple<std::string, Family, int>> cases{
        {"fig1a", Family::Extensional, 1},  {"fig1a", Family::Extensional, 5},  {"fig1a", Family::Extensional, 8},
        {"fig1bc", Family::Intensional, 1}, {"fig1bc", Family::Intensional, 2}, {"fig1bc", Family::Intensional, 3},
        {"fig1bc", Family::Intensional, 9},
    };
    for (const auto& [name, family, v] : cases) {
        const auto spec = version_to_spec(family, v);
        INFO(output_file_name(name, spec));
        const auto prog = transform(load_valid(name + ".xml"), spec);
        CHECK(prog.source == testsupport::read_text(testsupport::golden_dir() / output_file_name(name, spec)));
    }
}

TEST_CASE("extensional statement shapes", "[codegen][shape]") {
    const auto csp = load_valid("fig1a.xml");
    SECTION("version 1: one conflict disjunction per constraint, rejected with exit") {
        const auto p = transform(csp, version_to_spec(Family::Extensional, 1));
        CHECK(p.statement_count == 2);
        const auto s = constraints_section(p.source);
        CHECK_THAT(s, Catch::Matchers::ContainsSubstring("if ((x0==0 && x1==0 && x2==0) ||\n"
                                                         "      (x0==0 && x1==1 && x2==0)) exit(0);"));
        CHECK_THAT(s, Catch::Matchers::EndsWith("/* CSP is satisfiable */\n  assert(0);\n  return 0;\n}\n"));
        CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("int x0, x1, x2, x3, x4, x5;"));
        CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("klee_make_symbolic(&x0,sizeof(x0),\"x0\");"));
        CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("klee_assume(x0 >= 0 && x0 <= 1);"));
    }
    SECTION("version 5: a single bitwise statement") {
        const auto p = transform(csp, version_to_spec(Family::Extensional, 5));
        CHECK(p.statement_count == 1);
        const auto s = constraints_section(p.source);
        CHECK(std::regex_search(s, std::regex(R"(if \(\(x0==0 & x1==0 & x2==0\) \|[\s\S]*\(x3==0 & x4==1 & x5==0\)\) exit\(0\);)")));
        CHECK(s.find("&&") == std::string::npos);
        CHECK(s.find("||") == std::string::npos);
    }
    SECTION("version 8: negated disjunction inside an assume") {
        const auto p = transform(csp, version_to_spec(Family::Extensional, 8));
        const auto s = constraints_section(p.source);
        CHECK_THAT(s, Catch::Matchers::ContainsSubstring("klee_assume(!((x0==0 && x1==0 && x2==0) ||\n"
                                                         "                (x0==0 && x1==1 && x2==0) ||"));
        CHECK(s.find("exit(") == std::string::npos);
    }
}

TEST_CASE("intensional statement shapes", "[codegen][shape]") {
    const auto csp = load_valid("fig1bc.xml");
    auto section = [&](int v) { return constraints_section(transform(csp, version_to_spec(Family::Intensional, v)).source); };
    CHECK_THAT(section(1), Catch::Matchers::ContainsSubstring("if (y0==dist(x0,x1)); else exit(0);\n"
                                                              "  if (y1==dist(x1,x2)); else exit(0);\n"));
    CHECK_THAT(section(2), Catch::Matchers::ContainsSubstring("if (y0==dist(x0,x1) && y1==dist(x1,x2)); else exit(0);"));
    const auto v3 = section(3);
    CHECK_THAT(v3, Catch::Matchers::ContainsSubstring("if (x0!=x1 && x0!=x2 && x1!=x2 && y0==dist(x0,x1) && y1==dist(x1,x2))\n"
                                                      "    /* CSP is satisfiable */\n    assert(0);\n"));
    CHECK(v3.find("exit(") == std::string::npos);
    CHECK_THAT(section(9), Catch::Matchers::ContainsSubstring("klee_assume(x0!=x1 & x0!=x2 & x1!=x2);"));
}

TEST_CASE("generation is deterministic", "[codegen][property]") {
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam) continue;
        for (int v = 1; v <= version_count(*fam); ++v) {
            for (Dialect d : {Dialect::KLEE, Dialect::LLBMC, Dialect::Concrete}) {
                const auto spec = version_to_spec(*fam, v, d);
                CHECK(transform(csp, spec).source == transform(load_valid(file), spec).source);
            }
        }
    }
}

TEST_CASE("grouping reduces the statement count", "[codegen][property]") {
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam) continue;
        INFO(file);
        for (Construct c : {If, Assume}) {
            for (Operator op : {L, B}) {
                const auto base = *fam == Family::Extensional ? op : NOP;
                auto count = [&](Operator o, Grouping g) {
                    return transform(csp, {*fam, c, o, g, Dialect::KLEE}).statement_count;
                };
                const auto no = count(base, Grouping::No);
                const auto yes = count(op, Grouping::Yes);
                const auto all = count(op, Grouping::All);
                CHECK(no >= yes);
                CHECK(yes >= all);
                CHECK(all == 1);
                CHECK(no >= csp.constraints().size());
                CHECK(yes >= csp.groups().size());
            }
        }
    }
}

TEST_CASE("logical and bitwise variants differ only in connectives", "[codegen][property]") {
    std::size_t total_changed = 0;
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam) continue;
        INFO(file);
        for (Construct c : {If, Assume}) {
            for (Grouping g : {Grouping::No, Grouping::Yes, Grouping::All}) {
                const TransformSpec l{*fam, c, L, g, Dialect::KLEE};
                const TransformSpec b{*fam, c, B, g, Dialect::KLEE};
                if (!is_valid(l) || !is_valid(b)) continue;
                const auto tl = c_tokens(transform(csp, l).source);
                const auto tb = c_tokens(transform(csp, b).source);
                REQUIRE(tl.size() == tb.size());
                std::size_t changed = 0;
                for (std::size_t i = 0; i < tl.size(); ++i) {
                    if (tl[i] == tb[i]) continue;
                    ++changed;
                    const bool allowed = (tl[i] == "&&" && tb[i] == "&") || (tl[i] == "||" && tb[i] == "|");
                    CHECK(allowed);
                }
                total_changed += changed;
            }
        }
    }
    CHECK(total_changed > 0);
}

TEST_CASE("KLEE and LLBMC encodings share the constraint code", "[codegen][property]") {
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam) continue;
        INFO(file);
        for (int v = 1; v <= version_count(*fam); ++v) {
            auto tokens = [&](Dialect d) {
                auto t = c_tokens(constraints_section(transform(csp, version_to_spec(*fam, v, d)).source));
                for (auto& tok : t) {
                    if (tok == "klee_assume" || tok == "__llbmc_assume") tok = "ASSUME";
                }
                return t;
            };
            CHECK(tokens(Dialect::KLEE) == tokens(Dialect::LLBMC));
        }
    }
}

TEST_CASE("the concrete dialect reads arguments and marks the reached point", "[codegen][concrete]") {
    const auto p = emit_concrete_driver(load_valid("fig1a.xml"), version_to_spec(Family::Extensional, 8));
    CHECK(p.spec.dialect == Dialect::Concrete);
    CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("if (argc != 7) exit(2);"));
    CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("x0 = csp_read_arg(argv[1]);"));
    CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("csp_reached();"));
    CHECK(p.source.find("klee") == std::string::npos);
    CHECK(p.source.find("assert(0)") == std::string::npos);
}

TEST_CASE("non-contiguous domains and odd identifiers", "[codegen]") {
    const auto csp = parse_xml(
        "<instance type=\"CSP\"><variables><var id=\"int\"> 1 3 5..6 </var><var id=\"_b\"> -2..0 </var>"
        "</variables><constraints><intension> ne(int,neg(_b)) </intension></constraints></instance>");
    const auto p = transform(csp, version_to_spec(Family::Intensional, 1));
    CHECK(p.var_map.at("int") != "int");
    CHECK(p.var_map.at("_b") != "_b");
    const auto& a = p.var_map.at("int");
    CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("klee_assume(" + a + " == 1 || " + a + " == 3 || (" + a +
                                                            " >= 5 && " + a + " <= 6));"));
    CHECK_THAT(p.source, Catch::Matchers::ContainsSubstring("klee_assume(" + p.var_map.at("_b") + " >= -2 && " +
                                                            p.var_map.at("_b") + " <= 0);"));
}

TEST_CASE("values that could overflow int are rejected", "[codegen]") {
    const auto csp = parse_xml(
        "<instance type=\"CSP\"><variables><var id=\"a\"> 0..100000 </var><var id=\"b\"> 0..100000 </var>"
        "</variables><constraints><intension> gt(mul(a,b),5) </intension></constraints></instance>");
    CHECK_THROWS_AS(transform(csp, version_to_spec(Family::Intensional, 1)), CodegenError);
}

TEST_CASE("wide constraints wrap at 80 columns", "[codegen]") {
    std::string xml = "<instance type=\"CSP\"><variables><array id=\"x\" size=\"[30]\"> 0..1 </array></variables>"
                      "<constraints><extension><list> x[] </list><conflicts>";
    for (int t = 0; t < 4; ++t) {
        xml += "(";
        for (int i = 0; i < 30; ++i) xml += (i ? "," : "") + std::to_string((i + t) % 2);
        xml += ")";
    }
    xml += "</conflicts></extension></constraints></instance>";
    const auto p = transform(parse_xml(xml), version_to_spec(Family::Extensional, 1));
    std::istringstream lines(p.source);
    for (std::string line; std::getline(lines, line);) {
        INFO(line);
        CHECK(line.size() <= 80);
    }
}
