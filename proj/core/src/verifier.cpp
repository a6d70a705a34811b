#include "csp2c/verifier.hpp"

#include <stdlib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "csp2c/process.hpp"

namespace csp2c {

namespace fs = std::filesystem;

std::string_view to_string(VerificationStatus s) noexcept {
    switch (s) {
        case VerificationStatus::Pass: return "PASS";
        case VerificationStatus::Fail: return "FAIL";
        case VerificationStatus::Sampled: return "SAMPLED";
        case VerificationStatus::SkippedTooLarge: return "SKIPPED-TOO-LARGE";
    }
    return "?";
}

std::string VerificationReport::to_string() const {
    std::ostringstream os;
    os << instance << ": " << csp2c::to_string(status) << " (" << versions.size() << " versions, "
       << assignments_checked << " executions, search space " << search_space << ", " << mismatches.size()
       << " mismatches)";
    for (const auto& m : mismatches) {
        os << "\n  " << m.version << " [";
        for (std::size_t i = 0; i < m.assignment.size(); ++i) os << (i ? " " : "") << m.assignment[i];
        os << "] expected " << (m.expected ? "accept" : "reject") << ", observed "
           << (m.observed ? "accept" : "reject");
    }
    return os.str();
}

std::vector<TransformSpec> all_versions(Family family, Dialect dialect) {
    std::vector<TransformSpec> out;
    for (int v = 1; v <= version_count(family); ++v) out.push_back(version_to_spec(family, v, dialect));
    return out;
}

namespace {

class ScratchDir {
public:
    explicit ScratchDir(const std::optional<fs::path>& requested) {
        if (requested) {
            path_ = *requested;
            fs::create_directories(path_);
            return;
        }
        std::string templ = (fs::temp_directory_path() / "csp2c-verify-XXXXXX").string();
        if (::mkdtemp(templ.data()) == nullptr) throw VerificationError("cannot create a scratch directory");
        path_ = templ;
        owned_ = true;
    }
    ~ScratchDir() {
        if (owned_) {
            std::error_code ec;
            fs::remove_all(path_, ec);
        }
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
    bool owned_ = false;
};

std::string safe_stem(std::string_view s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out.empty() ? "instance" : out;
}

fs::path compile_driver(const CspInstance& csp, const TransformSpec& spec, const VerifierOptions& options,
                        const fs::path& dir) {
    GeneratedProgram prog = emit_concrete_driver(csp, spec);
    std::string source = options.source_mutator ? options.source_mutator(prog.source) : prog.source;
    const std::string stem = safe_stem(csp.name()) + "__" + prog.version_label;
    const fs::path src = dir / (stem + ".c");
    const fs::path exe = dir / stem;
    {
        std::ofstream f(src);
        f << source;
        if (!f) throw VerificationError("cannot write " + src.string());
    }
    const auto cmd = expand_template(options.compile_command, {{"src", src.string()}, {"out", exe.string()}});
    ProcessOptions po;
    po.timeout = std::chrono::seconds(120);
    const auto r = run_shell(cmd, po);
    if (!r.exited_ok()) {
        throw VerificationError("compilation of " + prog.version_label + " failed (" + cmd + "): " + r.err);
    }
    return exe;
}

std::vector<Value> random_assignment(const CspInstance& csp, std::mt19937_64& rng) {
    std::vector<Value> out;
    for (const auto& v : csp.variables()) {
        std::uniform_int_distribution<std::uint64_t> pick(0, v.domain.size() - 1);
        std::uint64_t k = pick(rng);
        for (const auto& r : v.domain.ranges()) {
            const auto width = static_cast<std::uint64_t>(r.hi - r.lo) + 1;
            if (k < width) {
                out.push_back(r.lo + static_cast<Value>(k));
                break;
            }
            k -= width;
        }
    }
    return out;
}

std::vector<std::vector<Value>> domain_product(const CspInstance& csp) {
    std::vector<std::vector<Value>> doms;
    for (const auto& v : csp.variables()) doms.push_back(v.domain.values());
    std::vector<std::vector<Value>> out;
    std::vector<std::size_t> idx(doms.size(), 0);
    for (;;) {
        std::vector<Value> a(doms.size());
        for (std::size_t i = 0; i < doms.size(); ++i) a[i] = doms[i][idx[i]];
        out.push_back(std::move(a));
        std::size_t i = doms.size();
        while (i > 0) {
            --i;
            if (++idx[i] < doms[i].size()) break;
            idx[i] = 0;
            if (i == 0) return out;
        }
        if (doms.empty()) return out;
    }
}

struct RunMatrix {
    std::vector<std::vector<Value>> assignments;
    std::vector<bool> expected;                 // per assignment
    std::vector<std::vector<char>> observed;    // [version][assignment]
};

bool run_driver(const fs::path& exe, const std::vector<Value>& values) {
    std::vector<std::string> argv{exe.string()};
    for (Value v : values) argv.push_back(std::to_string(v));
    ProcessOptions po;
    po.timeout = std::chrono::seconds(30);
    const auto r = run_process(argv, po);
    if (!r.started || r.timed_out || r.signal != 0) {
        throw VerificationError("driver " + exe.filename().string() + " did not run to completion: " + r.err);
    }
    const bool marker = r.out.find(kReachedMarker) != std::string::npos;
    if (r.exit_code == 0 && marker) return true;
    if (r.exit_code == 1 && !marker) return false;
    throw VerificationError("driver " + exe.filename().string() + " exited with unexpected status " +
                            std::to_string(r.exit_code));
}

RunMatrix execute(const CspInstance& csp, const std::vector<TransformSpec>& versions,
                  std::vector<std::vector<Value>> assignments, const VerifierOptions& options) {
    ScratchDir scratch(options.work_dir);
    std::vector<fs::path> exes;
    for (const auto& spec : versions) exes.push_back(compile_driver(csp, spec, options, scratch.path()));

    RunMatrix m;
    const CompiledInstance compiled(csp);
    for (const auto& a : assignments) m.expected.push_back(compiled.satisfies(a));
    m.assignments = std::move(assignments);
    m.observed.assign(versions.size(), std::vector<char>(m.assignments.size(), 0));

    const std::size_t jobs = versions.size() * m.assignments.size();
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::optional<std::string> error;
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs) return;
            const std::size_t v = j / m.assignments.size();
            const std::size_t a = j % m.assignments.size();
            try {
                m.observed[v][a] = run_driver(exes[v], m.assignments[a]) ? 1 : 0;
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!error) error = e.what();
                next.store(jobs);
                return;
            }
        }
    };
    const unsigned n = std::max(1u, options.workers);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    if (error) throw VerificationError(*error);
    return m;
}

}  // namespace

VerificationReport differential_check(const CspInstance& csp, const std::vector<TransformSpec>& versions,
                                      const VerifierOptions& options) {
    VerificationReport rep;
    rep.instance = csp.name();
    rep.search_space = csp.search_space();
    for (const auto& s : versions) rep.versions.push_back(version_label(s));

    std::vector<std::vector<Value>> assignments;
    bool exhaustive = rep.search_space <= options.exhaustive_bound;
    if (exhaustive) {
        assignments = domain_product(csp);
    } else if (options.samples == 0) {
        rep.status = VerificationStatus::SkippedTooLarge;
        rep.accepted.assign(versions.size(), 0);
        return rep;
    } else {
        std::mt19937_64 rng(options.seed);
        const auto sol = solve(csp);
        if (sol.witness) {
            std::vector<Value> w;
            for (const auto& v : csp.variables()) w.push_back(sol.witness->at(v.id));
            assignments.push_back(std::move(w));
        }
        for (std::uint64_t i = 0; i < options.samples; ++i) assignments.push_back(random_assignment(csp, rng));
    }

    const RunMatrix m = execute(csp, versions, std::move(assignments), options);
    for (std::size_t v = 0; v < versions.size(); ++v) {
        std::uint64_t acc = 0;
        for (std::size_t a = 0; a < m.assignments.size(); ++a) {
            const bool obs = m.observed[v][a] != 0;
            acc += obs ? 1 : 0;
            if (obs != m.expected[a]) rep.mismatches.push_back({rep.versions[v], m.assignments[a], m.expected[a], obs});
        }
        rep.accepted.push_back(acc);
        rep.assignments_checked += m.assignments.size();
    }
    std::sort(rep.mismatches.begin(), rep.mismatches.end());
    if (!rep.mismatches.empty()) {
        rep.status = VerificationStatus::Fail;
    } else {
        rep.status = exhaustive ? VerificationStatus::Pass : VerificationStatus::Sampled;
    }
    return rep;
}

bool cross_version_equivalence(const CspInstance& csp, const std::vector<TransformSpec>& versions,
                               const VerifierOptions& options) {
    if (csp.search_space() > options.exhaustive_bound) {
        throw VerificationError("search space of " + csp.name() + " exceeds the exhaustive bound");
    }
    if (versions.size() < 2) return true;
    const RunMatrix m = execute(csp, versions, domain_product(csp), options);
    return std::all_of(m.observed.begin(), m.observed.end(), [&](const auto& row) { return row == m.observed.front(); });
}

}  // namespace csp2c
