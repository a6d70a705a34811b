// csp2c: XCSP3 instances to C benchmark programs.
//
// Exit codes:
//   0  success (solve: satisfiable; verify: pass or clean sample)
//   1  solve: unsatisfiable; verify: mismatch found
//   2  usage, parse or input error
//   3  solve: resource limit reached
//   4  verify: instance too large and no sampling requested
//   5  verify: drivers could not be compiled or run

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csp2c/codegen.hpp"
#include "csp2c/harness.hpp"
#include "csp2c/oracle.hpp"
#include "csp2c/verifier.hpp"
#include "csp2c/xcsp_parser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace csp2c;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kLimit = 3, kSkipped = 4, kVerifyError = 5 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool g_machine = false;

void emit(const json& j) { std::cout << j.dump() << '\n'; }

std::optional<CspInstance> load(const std::string& file) {
    auto r = parse_file(file);
    for (const auto& d : r.diagnostics) {
        if (g_machine) {
            emit({{"type", "diagnostic"},
                  {"severity", d.severity == Severity::Error ? "error" : "warning"},
                  {"kind", std::string(to_string(d.kind))},
                  {"location", d.location.path},
                  {"line", d.location.line},
                  {"message", d.message}});
        } else {
            std::cerr << d.to_string() << '\n';
        }
    }
    if (!r.ok()) return std::nullopt;
    return std::move(*r.instance);
}

std::string plural(std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

// "all", "5", "1,5,8", "1-4,9"
std::vector<int> parse_versions(const std::string& text, Family family) {
    const int max = version_count(family);
    std::vector<int> out;
    if (text == "all") {
        for (int v = 1; v <= max; ++v) out.push_back(v);
        return out;
    }
    std::set<int> seen;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        int lo = 0;
        int hi = 0;
        try {
            const auto dash = item.find('-');
            std::size_t used = 0;
            if (dash == std::string::npos) {
                lo = hi = std::stoi(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
            } else {
                const std::string a = item.substr(0, dash);
                const std::string b = item.substr(dash + 1);
                lo = std::stoi(a, &used);
                if (used != a.size()) throw std::invalid_argument(item);
                hi = std::stoi(b, &used);
                if (used != b.size()) throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw UsageError("invalid version list '" + text + "'");
        }
        if (lo < 1 || hi > max || lo > hi) {
            throw UsageError("version '" + item + "' out of range 1.." + std::to_string(max) + " for the " +
                             std::string(to_string(family)) + " family");
        }
        for (int v = lo; v <= hi; ++v) {
            if (seen.insert(v).second) out.push_back(v);
        }
    }
    if (out.empty()) throw UsageError("empty version list");
    return out;
}

Family resolve_family(const CspInstance& csp, const std::string& requested) {
    const auto fam = instance_family(csp);
    if (!requested.empty()) {
        Family f;
        try {
            f = parse_family(requested);
        } catch (const CodegenError& e) {
            throw UsageError(e.what());
        }
        if (fam && *fam != f) {
            throw UsageError("instance '" + csp.name() + "' has " + std::string(to_string(*fam)) +
                             " constraints, not " + std::string(to_string(f)));
        }
        if (!fam && !csp.constraints().empty()) throw UsageError("instance mixes constraint families");
        return f;
    }
    if (!fam) {
        if (csp.constraints().empty()) throw UsageError("instance has no constraints; pass --family");
        throw UsageError("instance mixes constraint families");
    }
    return *fam;
}

json assignment_json(const CspInstance& csp, const Assignment& a) {
    json w = json::array();
    for (const auto& v : csp.variables()) w.push_back({{"id", v.id}, {"value", a.at(v.id)}});
    return w;
}

std::string assignment_text(const CspInstance& csp, const Assignment& a) {
    std::string s;
    for (const auto& v : csp.variables()) s += (s.empty() ? "" : " ") + v.id + "=" + std::to_string(a.at(v.id));
    return s;
}

// ---------------------------------------------------------------------------

int cmd_parse(const std::string& file) {
    const auto csp = load(file);
    if (!csp) return kUsage;
    if (g_machine) {
        json vars = json::array();
        for (const auto& v : csp->variables()) vars.push_back({{"id", v.id}, {"domain", v.domain.to_string()}});
        emit({{"type", "instance"},
              {"name", csp->name()},
              {"variables", csp->variables().size()},
              {"groups", csp->groups().size()},
              {"constraints", csp->constraints().size()},
              {"search_space", csp->search_space()},
              {"domains", vars}});
        return kOk;
    }
    std::cout << csp->name() << ": " << plural(csp->variables().size(), "var") << ", "
              << plural(csp->groups().size(), "group") << ", " << plural(csp->constraints().size(), "constraint")
              << '\n';
    for (const auto& v : csp->variables()) std::cout << "  " << v.id << " in " << v.domain.to_string() << '\n';
    return kOk;
}

struct GenArgs {
    std::string file;
    std::string family;
    std::string versions = "all";
    std::string dialect = "klee";
    std::string out_dir = ".";
    bool to_stdout = false;
};

int cmd_gen(const GenArgs& a) {
    const auto csp = load(a.file);
    if (!csp) return kUsage;
    const Family family = resolve_family(*csp, a.family);
    const auto versions = parse_versions(a.versions, family);
    Dialect dialect;
    try {
        dialect = parse_dialect(a.dialect);
    } catch (const CodegenError& e) {
        throw UsageError(e.what());
    }
    if (a.to_stdout && versions.size() != 1) throw UsageError("--stdout needs exactly one version");

    std::vector<GeneratedProgram> progs;
    for (int v : versions) progs.push_back(transform(*csp, version_to_spec(family, v, dialect)));
    if (a.to_stdout) {
        std::cout << progs.front().source;
        return kOk;
    }
    fs::create_directories(a.out_dir);
    const fs::path manifest = fs::path(a.out_dir) / (csp->name() + "__manifest.csv");
    std::ofstream m(manifest);
    m << "file,version,construct,operator,grouping,dialect,statements,lines\n";
    for (const auto& p : progs) {
        const std::string name = output_file_name(csp->name(), p.spec);
        const fs::path path = fs::path(a.out_dir) / name;
        std::ofstream f(path, std::ios::binary);
        f << p.source;
        if (!f) throw std::runtime_error("cannot write " + path.string());
        const std::string row = name + "," + p.version_label + "," + std::string(to_string(p.spec.construct)) + "," +
                                std::string(to_string(p.spec.op)) + "," + std::string(to_string(p.spec.grouping)) +
                                "," + std::string(to_string(p.spec.dialect)) + "," +
                                std::to_string(p.statement_count) + "," + std::to_string(p.line_count);
        m << row << '\n';
        if (g_machine) {
            emit({{"type", "generated"},
                  {"file", path.string()},
                  {"version", p.version_label},
                  {"construct", to_string(p.spec.construct)},
                  {"operator", to_string(p.spec.op)},
                  {"grouping", to_string(p.spec.grouping)},
                  {"dialect", to_string(p.spec.dialect)},
                  {"statements", p.statement_count},
                  {"lines", p.line_count}});
        } else {
            std::cout << path.string() << "  " << p.version_label << "  " << plural(p.statement_count, "statement")
                      << ", " << plural(p.line_count, "line") << '\n';
        }
    }
    if (!m) throw std::runtime_error("cannot write " + manifest.string());
    return kOk;
}

int cmd_solve(const std::string& file, std::uint64_t limit, bool all) {
    const auto csp = load(file);
    if (!csp) return kUsage;
    if (limit == 0) throw UsageError("--limit must be positive");
    SolveStatus status;
    std::uint64_t explored = 0;
    std::vector<Assignment> shown;
    if (all) {
        auto e = enumerate_solutions(*csp, limit);
        status = !e.complete ? SolveStatus::ResourceLimit
                             : (e.solutions.empty() ? SolveStatus::Unsatisfiable : SolveStatus::Satisfiable);
        explored = e.explored;
        shown = std::move(e.solutions);
    } else {
        auto r = solve(*csp, limit);
        status = r.status;
        explored = r.explored;
        if (r.witness) shown.push_back(*r.witness);
    }
    if (g_machine) {
        json j{{"type", "solve"}, {"status", to_string(status)}, {"explored", explored}};
        json sols = json::array();
        for (const auto& s : shown) sols.push_back(assignment_json(*csp, s));
        j[all ? "solutions" : "witness"] = all ? sols : (sols.empty() ? json(nullptr) : sols.front());
        emit(j);
    } else {
        std::cout << to_string(status) << '\n';
        for (const auto& s : shown) std::cout << assignment_text(*csp, s) << '\n';
        std::cout << "explored " << explored << " assignments\n";
    }
    switch (status) {
        case SolveStatus::Satisfiable: return kOk;
        case SolveStatus::Unsatisfiable: return kNegative;
        case SolveStatus::ResourceLimit: return kLimit;
    }
    return kLimit;
}

struct VerifyArgs {
    std::string file;
    std::string versions = "all";
    std::string cc;
    std::uint64_t bound = 4096;
    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

int cmd_verify(const VerifyArgs& a) {
    const auto csp = load(a.file);
    if (!csp) return kUsage;
    const Family family = resolve_family(*csp, "");
    std::vector<TransformSpec> specs;
    for (int v : parse_versions(a.versions, family)) specs.push_back(version_to_spec(family, v));
    VerifierOptions o;
    if (!a.cc.empty()) {
        o.compile_command = a.cc;
    } else if (const char* env = std::getenv(std::string(kCompileCommandEnv).c_str()); env && *env) {
        o.compile_command = env;
    }
    o.exhaustive_bound = a.bound;
    o.samples = a.samples;
    o.seed = a.seed;
    o.workers = a.workers;
    VerificationReport rep;
    try {
        rep = differential_check(*csp, specs, o);
    } catch (const VerificationError& e) {
        std::cerr << "csp2c: " << e.what() << '\n';
        return kVerifyError;
    }
    if (g_machine) {
        json mm = json::array();
        for (const auto& m : rep.mismatches) {
            mm.push_back({{"version", m.version}, {"assignment", m.assignment}, {"expected", m.expected},
                          {"observed", m.observed}});
        }
        emit({{"type", "verify"},
              {"instance", rep.instance},
              {"status", to_string(rep.status)},
              {"versions", rep.versions},
              {"executions", rep.assignments_checked},
              {"search_space", rep.search_space},
              {"accepted", rep.accepted},
              {"mismatches", mm}});
    } else {
        std::cout << rep.to_string() << '\n';
    }
    switch (rep.status) {
        case VerificationStatus::Pass:
        case VerificationStatus::Sampled: return kOk;
        case VerificationStatus::Fail: return kNegative;
        case VerificationStatus::SkippedTooLarge: return kSkipped;
    }
    return kVerifyError;
}

void print_report(Report& rep, const std::vector<fs::path>& files) {
    for (const auto& w : rep.warnings) std::cerr << "csp2c: warning: " << w << '\n';
    if (g_machine) {
        for (const auto& r : rep.robustness) {
            emit({{"type", "robustness"}, {"tool", r.tool}, {"version", r.version},
                  {"mean", r.mean ? json(*r.mean) : json(nullptr)}, {"timeouts", r.timeouts}, {"n", r.n}});
        }
        for (const auto& r : rep.scalability) {
            emit({{"type", "scalability"}, {"tool", r.tool}, {"size_index", r.size_index}, {"timeouts", r.timeouts}});
        }
        json paths = json::array();
        for (const auto& f : files) paths.push_back(f.string());
        emit({{"type", "report"}, {"files", paths}, {"raw_seconds", rep.raw_seconds},
              {"no_analysis_tools", rep.no_analysis_tools}, {"parallel", rep.parallel}});
        return;
    }
    std::cout << "tool,version,mean" << (rep.raw_seconds ? "_seconds" : "_normalized") << ",timeouts,n\n";
    for (const auto& r : rep.robustness) {
        std::cout << r.tool << ',' << r.version << ',' << (r.mean ? format_seconds(*r.mean) : "") << ','
                  << r.timeouts << ',' << r.n << '\n';
    }
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

struct BenchArgs {
    std::string tools;
    std::string instances;
    std::string out_dir;
    std::string versions;
    std::string work_dir;
    std::string baseline;
    unsigned jobs = 1;
    bool allow_parallel = false;
};

int cmd_bench(const BenchArgs& a) {
    const auto tools = load_tool_manifest(a.tools);
    const auto instances = load_instance_manifest(a.instances);
    if (a.jobs > 1 && !a.allow_parallel) throw UsageError("--jobs > 1 requires --allow-parallel");
    MatrixOptions o;
    if (!a.versions.empty() && a.versions != "all") {
        std::optional<Family> family;
        for (const auto& i : instances) {
            auto parsed = parse_file(i.path.string());
            if (!parsed.ok()) throw UsageError("cannot load " + i.path.string());
            auto f = instance_family(*parsed.instance);
            if (family && f != family) throw UsageError("--versions needs instances of a single family");
            family = f;
        }
        if (family) o.versions = parse_versions(a.versions, *family);
    }
    o.workers = a.jobs;
    o.allow_parallel = a.allow_parallel;
    o.work_dir = a.work_dir.empty() ? fs::path(a.out_dir) / "work" : fs::path(a.work_dir);
    auto records = run_matrix(instances, tools, o);
    normalize(records, a.baseline.empty() ? std::nullopt : std::optional(a.baseline));
    const bool parallel = a.jobs > 1;
    std::map<std::string, std::int64_t> sizes;
    for (const auto& i : instances) {
        if (i.size) sizes[i.id()] = *i.size;
    }
    Report rep = build_report(records, sizes, parallel);
    auto files = emit_csv(rep, a.out_dir);
    write_sidecars(a.out_dir, instances, parallel);
    for (const auto& f : emit_svg(rep, a.out_dir)) files.push_back(f);
    print_report(rep, files);
    return kOk;
}

int cmd_report(const std::string& records_csv, const std::string& out_dir) {
    const fs::path src(records_csv);
    auto records = read_records_csv(src);
    const fs::path dir = src.parent_path().empty() ? fs::path(".") : src.parent_path();
    std::map<std::string, std::int64_t> sizes;
    if (fs::exists(dir / "instances.csv")) sizes = read_sizes_csv(dir / "instances.csv");
    const bool parallel = fs::exists(dir / "run_info.json") && read_parallel_flag(dir / "run_info.json");
    Report rep = build_report(records, sizes, parallel);
    auto files = emit_csv(rep, out_dir);
    for (const auto& f : emit_svg(rep, out_dir)) files.push_back(f);
    print_report(rep, files);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turn XCSP3 constraint problems into C benchmark programs"};
    app.require_subcommand(1);
    app.add_flag("--machine", g_machine, "JSON-lines output");

    std::string parse_file_arg;
    auto* parse = app.add_subcommand("parse", "Summarize an instance or print its diagnostics");
    parse->add_option("file", parse_file_arg, "XCSP3 file")->required();

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Write C programs for selected versions");
    gen->add_option("file", gen_args.file, "XCSP3 file")->required();
    gen->add_option("--family", gen_args.family, "extensional or intensional (default: inferred)");
    gen->add_option("--versions", gen_args.versions, "all, or a list such as 1,5,8 or 1-4")->capture_default_str();
    gen->add_option("--dialect", gen_args.dialect, "klee, llbmc or concrete")->capture_default_str();
    auto* out_opt = gen->add_option("-o,--out", gen_args.out_dir, "Output directory")->capture_default_str();
    gen->add_flag("--stdout", gen_args.to_stdout, "Print a single version instead of writing files")->excludes(out_opt);

    std::string solve_file;
    std::uint64_t limit = kDefaultSolveLimit;
    bool solve_all = false;
    auto* solve_cmd = app.add_subcommand("solve", "Decide satisfiability by exhaustive search");
    solve_cmd->add_option("file", solve_file, "XCSP3 file")->required();
    solve_cmd->add_option("--limit", limit, "Maximum assignments to account for")->capture_default_str();
    solve_cmd->add_flag("--all", solve_all, "Enumerate every solution");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "Compile concrete drivers and compare them with the oracle");
    verify->add_option("file", verify_args.file, "XCSP3 file")->required();
    verify->add_option("--versions", verify_args.versions, "all, or a version list")->capture_default_str();
    verify->add_option("--cc", verify_args.cc,
                       "Compile command with {src} and {out} (default: $" + std::string(kCompileCommandEnv) + " or '" +
                           std::string(kDefaultCompileCommand) + "')");
    verify->add_option("--bound", verify_args.bound, "Exhaustive checking up to this many assignments")
        ->capture_default_str();
    verify->add_option("--samples", verify_args.samples, "Random assignments above the bound (0: skip)")
        ->capture_default_str();
    verify->add_option("--seed", verify_args.seed, "Sampling seed")->capture_default_str();
    verify->add_option("-j,--jobs", verify_args.workers, "Concurrent driver runs")->capture_default_str();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run tools over instances and versions, then report");
    bench->add_option("tools", bench_args.tools, "Tool manifest (JSON)")->required();
    bench->add_option("instances", bench_args.instances, "Instance manifest (JSON)")->required();
    bench->add_option("out", bench_args.out_dir, "Output directory")->required();
    bench->add_option("--versions", bench_args.versions, "all, or a version list");
    bench->add_option("--work-dir", bench_args.work_dir, "Generated sources (default: <out>/work)");
    bench->add_option("--baseline", bench_args.baseline, "Baseline tool used for normalization");
    bench->add_option("-j,--jobs", bench_args.jobs, "Concurrent runs")->capture_default_str();
    bench->add_flag("--allow-parallel", bench_args.allow_parallel, "Permit --jobs > 1 (timings become indicative)");

    std::string records_csv;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Rebuild tables and charts from a raw.csv");
    report->add_option("records", records_csv, "raw.csv written by bench")->required();
    report->add_option("out", report_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*parse) return cmd_parse(parse_file_arg);
        if (*gen) return cmd_gen(gen_args);
        if (*solve_cmd) return cmd_solve(solve_file, limit, solve_all);
        if (*verify) return cmd_verify(verify_args);
        if (*bench) return cmd_bench(bench_args);
        if (*report) return cmd_report(records_csv, report_out);
    } catch (const UsageError& e) {
        std::cerr << "csp2c: " << e.what() << '\n' << app.help();
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "csp2c: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
