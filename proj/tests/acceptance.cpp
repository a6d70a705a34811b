// One line per acceptance criterion: PASS, FAIL or SKIP, with elapsed time.
// Exit status is non-zero iff some criterion fails.

#include <signal.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

#include "brute_force.hpp"
#include "corpus.hpp"
#include "proc.hpp"
#include "csp2c/codegen.hpp"
#include "csp2c/harness.hpp"
#include "csp2c/oracle.hpp"
#include "csp2c/process.hpp"
#include "csp2c/verifier.hpp"
#include "csp2c/xcsp_parser.hpp"

using namespace csp2c;
namespace fs = std::filesystem;

namespace {

// Runtime budgets in seconds.
constexpr double kParserBudget = 1.0;
constexpr double kOracleBudget = 10.0;
constexpr double kMatrixBudget = 1.0;
constexpr double kDifferentialBudget = 300.0;
constexpr double kHarnessBudget = 30.0;
// Extra time a timed-out tool's process tree may survive.
constexpr double kTimeoutGrace = 5.0;
// Relative error allowed for baseline-scaling invariance.
constexpr double kScalingTolerance = 1e-12;
// Minimum number of instances for the oracle and differential criteria.
constexpr std::size_t kMinOracleInstances = 10;
constexpr std::size_t kMinDifferentialInstances = 8;
constexpr std::uint64_t kExhaustiveBound = 4096;

enum class Verdict { Pass, Fail, Skip };

struct Result {
    Verdict verdict = Verdict::Pass;
    std::vector<std::string> notes;

    void fail(const std::string& why) {
        verdict = Verdict::Fail;
        notes.push_back(why);
    }
    void expect(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
};

using Check = std::function<void(Result&)>;

struct Criterion {
    int number;
    std::string title;
    double budget;  // 0: none
    Check run;
};

std::vector<std::string> sorted_keys(const nlohmann::json& obj) {
    std::vector<std::string> out;
    for (const auto& [k, _] : obj.items()) out.push_back(k);
    return out;
}

ParseResult parse_corpus(const std::string& sub, const std::string& file) {
    return parse_file((testsupport::corpus_dir() / sub / file).string());
}

// ---------------------------------------------------------------------------

void parser_coverage(Result& o) {
    const auto exp = testsupport::expected();
    std::size_t files = 0;
    for (const auto& file : sorted_keys(exp.at("valid"))) {
        const auto& e = exp.at("valid").at(file);
        auto r = parse_corpus("valid", file);
        ++files;
        if (!r.ok()) {
            o.fail(file + " did not parse");
            continue;
        }
        o.expect(r.instance->variables().size() == e.at("variables").get<std::size_t>(), file + ": variable count");
        o.expect(r.instance->groups().size() == e.at("groups").get<std::size_t>(), file + ": group count");
        o.expect(r.instance->constraints().size() == e.at("constraints").get<std::size_t>(), file + ": constraint count");
    }
    for (const auto& file : sorted_keys(exp.at("invalid"))) {
        const auto& e = exp.at("invalid").at(file);
        auto r = parse_corpus("invalid", file);
        ++files;
        const auto errs = r.errors();
        if (r.instance || errs.empty()) {
            o.fail(file + " was accepted");
            continue;
        }
        const auto& d = *std::find_if(r.diagnostics.begin(), r.diagnostics.end(),
                                      [](const ParseDiagnostic& x) { return x.severity == Severity::Error; });
        o.expect(to_string(d.kind) == e.at("kind").get<std::string>(), file + ": diagnostic kind " + std::string(to_string(d.kind)));
        o.expect(d.message.find(e.at("mentions").get<std::string>()) != std::string::npos, file + ": message");
    }
    o.expect(files >= 12, "corpus has fewer than 12 files");

    // the three example fragments, each wrapped in a minimal document
    const std::string fragments[] = {
        "<group>\n<extension>\n<list> \n<conflicts> (0,0,0) (0,1,0)</conflicts>\n</extension>\n"
        "<args> x[0] x[1] x[2] </args>\n<args> x[3] x[4] x[5] </args>\n</group>",
        "<group>\n<intension> eq(%0,dist(%1,%2)) </intension>\n<args> y[0] x[0] x[1] </args>\n"
        "<args> y[1] x[1] x[2] </args>\n</group>",
        "<allDifferent> x[0] x[1] x[2] </allDifferent>",
    };
    const std::size_t fragment_constraints[] = {2, 2, 1};
    for (std::size_t i = 0; i < 3; ++i) {
        std::string body = fragments[i];
        if (i == 0) body.replace(body.find("<list> \n"), 8, "<list> </list>\n");
        const std::string xml = "<instance type=\"CSP\"><variables><array id=\"x\" size=\"[6]\"> 0..2 </array>"
                                "<array id=\"y\" size=\"[2]\"> 0..2 </array></variables><constraints>" +
                                body + "</constraints></instance>";
        auto r = parse_document(xml, "fragment");
        o.expect(r.ok() && r.instance->constraints().size() == fragment_constraints[i],
                 "example fragment " + std::to_string(i + 1));
    }

    const char* forms[] = {
        "<allDifferent> x y z </allDifferent>",
        "<intension> eq(x,abs(sub(y,z))) </intension>",
        "<intension> eq(sub(x,y),z) </intension>",
        "<intension> ne(sub(x,y),sub(z,u)) </intension>",
        "<intension> ge(add(z,u),z) </intension>",
        "<intension> gt(0,mul(sub(x,y),sub(z,u))) </intension>",
        "<intension> ne(x,y) </intension>",
        "<intension> eq(x,y) </intension>",
    };
    for (const char* f : forms) {
        const std::string xml = "<instance type=\"CSP\"><variables><var id=\"x\"> 0..3 </var><var id=\"y\"> 0..3 </var>"
                                "<var id=\"z\"> 0..3 </var><var id=\"u\"> 0..3 </var></variables><constraints>" +
                                std::string(f) + "</constraints></instance>";
        auto r = parse_document(xml, "form");
        o.expect(r.ok() && r.instance->constraints().size() == 1, std::string("constraint form ") + f);
    }
}

void oracle_correctness(Result& o) {
    const auto exp = testsupport::expected().at("valid");
    std::size_t instances = 0;
    bool saw_fig = false;
    bool saw_pigeon = false;
    for (const auto& file : sorted_keys(exp)) {
        const auto& e = exp.at(file);
        const auto csp = testsupport::load_valid(file);
        if (csp.search_space() > kExhaustiveBound) continue;
        ++instances;
        const auto r = solve(csp);
        o.expect(to_string(r.status) == e.at("status").get<std::string>(), file + ": status");
        if (r.witness) o.expect(testsupport::holds_all(csp, *r.witness), file + ": witness does not re-check");
        o.expect(r.witness.has_value() == (r.status == SolveStatus::Satisfiable), file + ": witness presence");
        const auto all = enumerate_solutions(csp);
        o.expect(all.complete, file + ": enumeration incomplete");
        o.expect(all.solutions.size() == e.at("solutions").get<std::size_t>(), file + ": solution count");
        for (const auto& s : all.solutions) o.expect(testsupport::holds_all(csp, s), file + ": enumerated non-solution");
        if (file == "fig1a.xml") saw_fig = r.status == SolveStatus::Satisfiable;
        if (file == "pigeonhole.xml") saw_pigeon = r.status == SolveStatus::Unsatisfiable;
    }
    o.expect(instances >= kMinOracleInstances, "fewer than 10 instances checked");
    o.expect(saw_fig, "extensional example not satisfiable");
    o.expect(saw_pigeon, "pigeonhole not unsatisfiable");
}

void matrix_fidelity(Result& o) {
    using C = Construct;
    using Op = Operator;
    using G = Grouping;
    const std::vector<std::tuple<Family, int, C, Op, G>> rows{
        {Family::Extensional, 1, C::IfStmt, Op::Logical, G::No},   {Family::Extensional, 2, C::IfStmt, Op::Logical, G::Yes},
        {Family::Extensional, 3, C::IfStmt, Op::Logical, G::All},  {Family::Extensional, 4, C::IfStmt, Op::Bitwise, G::No},
        {Family::Extensional, 5, C::IfStmt, Op::Bitwise, G::Yes},  {Family::Extensional, 6, C::IfStmt, Op::Bitwise, G::All},
        {Family::Extensional, 7, C::Assume, Op::Logical, G::No},   {Family::Extensional, 8, C::Assume, Op::Logical, G::Yes},
        {Family::Extensional, 9, C::Assume, Op::Logical, G::All},  {Family::Extensional, 10, C::Assume, Op::Bitwise, G::No},
        {Family::Extensional, 11, C::Assume, Op::Bitwise, G::Yes}, {Family::Extensional, 12, C::Assume, Op::Bitwise, G::All},
        {Family::Intensional, 1, C::IfStmt, Op::NOP, G::No},       {Family::Intensional, 2, C::IfStmt, Op::Logical, G::Yes},
        {Family::Intensional, 3, C::IfStmt, Op::Logical, G::All},  {Family::Intensional, 4, C::IfStmt, Op::Bitwise, G::Yes},
        {Family::Intensional, 5, C::IfStmt, Op::Bitwise, G::All},  {Family::Intensional, 6, C::Assume, Op::NOP, G::No},
        {Family::Intensional, 7, C::Assume, Op::Logical, G::Yes},  {Family::Intensional, 8, C::Assume, Op::Logical, G::All},
        {Family::Intensional, 9, C::Assume, Op::Bitwise, G::Yes},  {Family::Intensional, 10, C::Assume, Op::Bitwise, G::All},
    };
    o.expect(version_count(Family::Extensional) + version_count(Family::Intensional) == 22, "version count");
    for (const auto& [f, v, c, op, g] : rows) {
        const auto s = version_to_spec(f, v);
        const std::string label = std::string(to_string(f)) + " " + std::to_string(v);
        o.expect(s.construct == c && s.op == op && s.grouping == g, label + ": features");
        o.expect(spec_to_version(s) == v, label + ": inverse");
    }
}

void golden_codegen(Result& o) {
    const std::vector<std::tuple<std::string, Family, int>> cases{
        {"fig1a", Family::Extensional, 1},  {"fig1a", Family::Extensional, 5},  {"fig1a", Family::Extensional, 8},
        {"fig1bc", Family::Intensional, 1}, {"fig1bc", Family::Intensional, 2}, {"fig1bc", Family::Intensional, 3},
        {"fig1bc", Family::Intensional, 9},
    };
    // statement shapes: operators, construct and assert placement
    const std::map<std::string, std::string> shapes{
        {"fig1a__ext1__klee.c",
         R"(if \(\(x0==0 && x1==0 && x2==0\) \|\|\s+\(x0==0 && x1==1 && x2==0\)\) exit\(0\);\s+if \(\(x3==0 && x4==0 && x5==0\) \|\|\s+\(x3==0 && x4==1 && x5==0\)\) exit\(0\);\s+/\* CSP is satisfiable \*/\s+assert\(0\);)"},
        {"fig1a__ext5__klee.c",
         R"(if \(\(x0==0 & x1==0 & x2==0\) \|\s+\(x0==0 & x1==1 & x2==0\) \|\s+\(x3==0 & x4==0 & x5==0\) \|\s+\(x3==0 & x4==1 & x5==0\)\) exit\(0\);\s+/\* CSP is satisfiable \*/\s+assert\(0\);)"},
        {"fig1a__ext8__klee.c",
         R"(klee_assume\(!\(\(x0==0 && x1==0 && x2==0\) \|\|\s+\(x0==0 && x1==1 && x2==0\) \|\|\s+\(x3==0 && x4==0 && x5==0\) \|\|\s+\(x3==0 && x4==1 && x5==0\)\)\);\s+/\* CSP is satisfiable \*/\s+assert\(0\);)"},
        {"fig1bc__int1__klee.c",
         R"(if \(y0==dist\(x0,x1\)\); else exit\(0\);\s+if \(y1==dist\(x1,x2\)\); else exit\(0\);)"},
        {"fig1bc__int2__klee.c", R"(if \(y0==dist\(x0,x1\) && y1==dist\(x1,x2\)\);\s*else exit\(0\);)"},
        {"fig1bc__int3__klee.c",
         R"(if \(x0!=x1 && x0!=x2 && x1!=x2 &&\s*y0==dist\(x0,x1\) && y1==dist\(x1,x2\)\)\s+/\* CSP is satisfiable \*/\s+assert\(0\);\s+return 0;)"},
        {"fig1bc__int9__klee.c", R"(klee_assume\(x0!=x1 & x0!=x2 & x1!=x2\);)"},
    };
    for (const auto& [name, family, v] : cases) {
        const auto spec = version_to_spec(family, v);
        const auto file = output_file_name(name, spec);
        const auto src = transform(testsupport::load_valid(name + ".xml"), spec).source;
        const auto golden = testsupport::read_text(testsupport::golden_dir() / file);
        o.expect(!golden.empty() && src == golden, file + ": differs from golden file");
        o.expect(std::regex_search(src, std::regex(shapes.at(file))), file + ": statement shape");
        o.expect(src.find("int x0, x1, x2") != std::string::npos, file + ": declarations");
    }
}

void differential_soundness(Result& o) {
    std::size_t instances = 0;
    bool sat[2] = {false, false};
    bool unsat[2] = {false, false};
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = testsupport::load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam || csp.search_space() > kExhaustiveBound) continue;
        const auto versions = all_versions(*fam, Dialect::Concrete);
        VerifierOptions opts;
        opts.exhaustive_bound = kExhaustiveBound;
        const auto rep = differential_check(csp, versions, opts);
        ++instances;
        o.expect(rep.status == VerificationStatus::Pass, file + ": " + rep.to_string());
        o.expect(rep.assignments_checked == csp.search_space() * versions.size(), file + ": not exhaustive");
        const auto f = *fam == Family::Extensional ? 0 : 1;
        (solve(csp).status == SolveStatus::Satisfiable ? sat : unsat)[f] = true;
        o.expect(cross_version_equivalence(csp, versions, opts), file + ": accepting sets differ across versions");
    }
    o.expect(instances >= kMinDifferentialInstances, "fewer than 8 instances");
    o.expect(sat[0] && sat[1] && unsat[0] && unsat[1], "need sat and unsat instances of both families");

    VerifierOptions fault;
    fault.source_mutator = [](const std::string& s) {
        std::string m = s;
        const auto at = m.find("!=", m.find("// constraints"));
        if (at != std::string::npos) m[at] = '=';
        return m;
    };
    const auto broken = differential_check(testsupport::load_valid("queens4.xml"),
                                           {version_to_spec(Family::Intensional, 2)}, fault);
    o.expect(broken.status == VerificationStatus::Fail && !broken.mismatches.empty(), "injected fault not detected");
}

void structural_metrics(Result& o) {
    for (const auto& file : testsupport::valid_files()) {
        const auto csp = testsupport::load_valid(file);
        const auto fam = instance_family(csp);
        if (!fam) continue;
        for (Construct c : {Construct::IfStmt, Construct::Assume}) {
            for (Operator op : {Operator::Logical, Operator::Bitwise}) {
                const auto base = *fam == Family::Extensional ? op : Operator::NOP;
                const auto no = transform(csp, {*fam, c, base, Grouping::No, Dialect::KLEE}).statement_count;
                const auto yes = transform(csp, {*fam, c, op, Grouping::Yes, Dialect::KLEE}).statement_count;
                const auto all = transform(csp, {*fam, c, op, Grouping::All, Dialect::KLEE}).statement_count;
                o.expect(no >= yes && yes >= all && all == 1, file + ": grouping monotonicity");
            }
            for (Grouping g : {Grouping::No, Grouping::Yes, Grouping::All}) {
                const TransformSpec l{*fam, c, Operator::Logical, g, Dialect::KLEE};
                const TransformSpec b{*fam, c, Operator::Bitwise, g, Dialect::KLEE};
                if (!is_valid(l) || !is_valid(b)) continue;
                const auto tl = testsupport::c_tokens(transform(csp, l).source);
                const auto tb = testsupport::c_tokens(transform(csp, b).source);
                bool only_ops = tl.size() == tb.size();
                for (std::size_t i = 0; only_ops && i < tl.size(); ++i) {
                    only_ops = tl[i] == tb[i] || (tl[i] == "&&" && tb[i] == "&") || (tl[i] == "||" && tb[i] == "|");
                }
                o.expect(only_ops, file + ": logical/bitwise differ beyond connectives (" + version_label(l) + ")");
            }
        }
    }
}

void harness_properties(Result& o) {
    const auto work = fs::temp_directory_path() / "csp2c-acceptance-harness";
    fs::remove_all(work);
    fs::create_directories(work);
    const InstanceEntry a{testsupport::corpus_dir() / "valid" / "fig1a.xml", std::nullopt, 1, std::nullopt};
    const InstanceEntry b{testsupport::corpus_dir() / "valid" / "aim-mini.xml", std::nullopt, 2, std::nullopt};

    ToolSpec sleeper;
    sleeper.name = "sleeper";
    sleeper.run = "sleep 30 & echo $! > " + shell_quote((work / "pid").string()) + "; wait";
    sleeper.timeout_seconds = 1.0;
    MatrixOptions mo;
    mo.versions = {1};
    mo.work_dir = work;
    const auto t0 = std::chrono::steady_clock::now();
    const auto timed = run_matrix({a}, {sleeper}, mo);
    const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.expect(timed.size() == 1 && timed[0].outcome == Outcome::Timeout, "sleeping tool not classified Timeout");
    o.expect(!timed.empty() && timed[0].wallclock_seconds >= sleeper.timeout_seconds, "timeout wallclock below limit");
    o.expect(took <= sleeper.timeout_seconds + kTimeoutGrace, "run exceeded timeout plus grace");
    pid_t child = 0;
    std::ifstream(work / "pid") >> child;
    o.expect(child > 0 && !testsupport::process_alive(child), "tool's child process survived the timeout");

    ToolSpec reach;
    reach.name = "reach";
    reach.run = "echo REACHED";
    reach.success_pattern = "REACHED";
    ToolSpec quiet = reach;
    quiet.name = "quiet";
    quiet.run = "true";
    ToolSpec base = reach;
    base.name = "base";
    base.kind = ToolKind::Baseline;
    base.run = "cat {src} > /dev/null";
    mo.versions = {1, 2, 3};
    const auto records = run_matrix({a, b}, {reach, quiet, base}, mo);
    o.expect(records.size() == 2 * 2 * 3 + 1 * 2, "record count formula");

    auto rec = [](std::string tool, std::string inst, std::string v, double w) {
        RunRecord r;
        r.tool = std::move(tool);
        r.instance = std::move(inst);
        r.version = std::move(v);
        r.wallclock_seconds = w;
        return r;
    };
    std::vector<RunRecord> ratio{rec("base", "p", "-", 5.0), rec("t", "p", "ext1", 10.0)};
    normalize(ratio);
    o.expect(ratio[1].normalized && *ratio[1].normalized == 2.0, "10 s / 5 s is not exactly 2.0");

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> wall(1e-3, 1e3);
    std::vector<RunRecord> many;
    for (int i = 0; i < 50; ++i) {
        const auto inst = "p" + std::to_string(i);
        many.push_back(rec("base", inst, "-", wall(rng)));
        for (int v = 1; v <= 4; ++v) many.push_back(rec("t", inst, "ext" + std::to_string(v), wall(rng)));
    }
    normalize(many);
    for (double k : {2.0, 0.37, 1e3, 1e-4}) {
        auto scaled = many;
        for (auto& r : scaled) {
            if (is_baseline(r)) r.wallclock_seconds *= k;
        }
        normalize(scaled);
        for (std::size_t i = 0; i < many.size(); ++i) {
            if (!many[i].normalized) continue;
            const double want = *many[i].normalized / k;
            o.expect(scaled[i].normalized && std::abs(*scaled[i].normalized - want) <= kScalingTolerance * want,
                     "baseline scaling by " + std::to_string(k));
        }
    }
}

std::optional<std::string> find_in_path(const std::string& program) {
    const char* path = std::getenv("PATH");
    if (!path) return std::nullopt;
    std::stringstream ss(path);
    for (std::string dir; std::getline(ss, dir, ':');) {
        const fs::path p = fs::path(dir) / program;
        if (::access(p.c_str(), X_OK) == 0) return p.string();
    }
    return std::nullopt;
}

void smoke_reproduction(Result& o) {
    const auto klee = find_in_path("klee");
    if (!klee) {
        o.verdict = Verdict::Skip;
        o.notes.push_back("no klee executable on PATH");
        return;
    }
    const auto clang = find_in_path("clang");
    if (!clang) {
        o.verdict = Verdict::Skip;
        o.notes.push_back("klee found but no clang to build bitcode");
        return;
    }
    ToolSpec t;
    t.name = "klee";
    t.prepare = "clang -c -g -O0 -emit-llvm -Xclang -disable-O0-optnone -o {bitcode} {src}";
    t.run = "klee --exit-on-error --output-dir={out} {bitcode}";
    t.success_pattern = "ASSERTION FAIL";
    t.timeout_seconds = 120;
    MatrixOptions mo;
    mo.work_dir = fs::temp_directory_path() / "csp2c-acceptance-klee";
    fs::remove_all(mo.work_dir);
    const auto records =
        run_matrix({{testsupport::corpus_dir() / "valid" / "fig1a.xml", std::nullopt, 1, std::nullopt}}, {t}, mo);
    for (const auto& r : records) {
        o.expect(r.outcome == Outcome::Reached, r.version + ": " + std::string(to_string(r.outcome)));
        o.notes.push_back(r.version + " " + format_seconds(r.wallclock_seconds) + " s");
    }
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "parser coverage", kParserBudget, parser_coverage},
        {2, "oracle correctness", kOracleBudget, oracle_correctness},
        {3, "version-matrix fidelity", kMatrixBudget, matrix_fidelity},
        {4, "golden codegen", 0, golden_codegen},
        {5, "differential soundness", kDifferentialBudget, differential_soundness},
        {6, "structural metrics", 0, structural_metrics},
        {7, "harness properties", kHarnessBudget, harness_properties},
        {8, "smoke reproduction (optional)", 0, smoke_reproduction},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Result out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0 && secs > c.budget && out.verdict != Verdict::Skip) {
            out.fail("took " + format_seconds(secs) + " s, budget " + format_seconds(c.budget) + " s");
        }
        const char* tag = out.verdict == Verdict::Pass ? "PASS" : out.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2f s", secs);
        std::cout << tag << "  criterion " << c.number << ": " << c.title << " (" << timing << ")";
        if (!out.notes.empty()) {
            std::cout << " -";
            const std::size_t shown = std::min<std::size_t>(out.notes.size(), 12);
            for (std::size_t i = 0; i < shown; ++i) std::cout << (i ? "; " : " ") << out.notes[i];
            if (out.notes.size() > shown) std::cout << "; ... " << out.notes.size() - shown << " more";
        }
        std::cout << std::endl;
        failures += out.verdict == Verdict::Fail;
    }
    return failures == 0 ? 0 : 1;
}
