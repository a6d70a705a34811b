#include "csp2c/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "csp2c/process.hpp"
#include "csp2c/xcsp_parser.hpp"

namespace csp2c {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ToolKind k) noexcept {
    return k == ToolKind::Analysis ? "analysis" : "baseline";
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Reached: return "Reached";
        case Outcome::NotReached: return "NotReached";
        case Outcome::Timeout: return "Timeout";
        case Outcome::ToolError: return "ToolError";
    }
    return "?";
}

Outcome parse_outcome(std::string_view s) {
    for (Outcome o : {Outcome::Reached, Outcome::NotReached, Outcome::Timeout, Outcome::ToolError}) {
        if (s == to_string(o)) return o;
    }
    throw HarnessError("unknown outcome '" + std::string(s) + "'");
}

void ToolSpec::validate() const {
    if (name.empty()) throw HarnessError("tool without a name");
    if (run.empty()) throw HarnessError("tool '" + name + "' has no run template");
    if (!(timeout_seconds > 0) || !std::isfinite(timeout_seconds)) {
        throw HarnessError("tool '" + name + "' needs a positive timeout");
    }
    try {
        std::regex re(success_pattern);
    } catch (const std::regex_error& e) {
        throw HarnessError("tool '" + name + "': invalid success pattern: " + e.what());
    }
}

std::string InstanceEntry::id() const { return path.stem().string(); }

bool is_baseline(const RunRecord& r) noexcept { return r.version == kBaselineVersion; }

std::string format_seconds(double s) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, s);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

namespace {

std::string slurp(const fs::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw HarnessError("cannot read " + file.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const json& entries(const json& doc, const char* key) {
    if (doc.is_array()) return doc;
    if (doc.is_object() && doc.contains(key) && doc.at(key).is_array()) return doc.at(key);
    throw HarnessError(std::string("manifest must be an array or an object with a '") + key + "' array");
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw HarnessError(std::string("invalid manifest: ") + e.what());
    }
}

}  // namespace

std::vector<ToolSpec> parse_tool_manifest(const std::string& json_text) {
    const json doc = parse_json(json_text);
    std::vector<ToolSpec> tools;
    std::set<std::string> seen;
    try {
        for (const auto& e : entries(doc, "tools")) {
            ToolSpec t;
            t.name = e.at("name").get<std::string>();
            const std::string kind = e.value("kind", "analysis");
            if (kind == "analysis") {
                t.kind = ToolKind::Analysis;
            } else if (kind == "baseline") {
                t.kind = ToolKind::Baseline;
            } else {
                throw HarnessError("tool '" + t.name + "': kind must be 'analysis' or 'baseline'");
            }
            if (e.contains("prepare") && !e.at("prepare").is_null()) t.prepare = e.at("prepare").get<std::string>();
            t.run = e.value("run", "");
            t.timeout_seconds = e.value("timeout", kDefaultToolTimeoutSeconds);
            t.success_pattern = e.value("success_pattern", "");
            if (e.contains("dialect")) t.dialect = parse_dialect(e.at("dialect").get<std::string>());
            t.validate();
            if (!seen.insert(t.name).second) throw HarnessError("duplicate tool '" + t.name + "'");
            tools.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw HarnessError(std::string("invalid tool manifest: ") + e.what());
    } catch (const CodegenError& e) {
        throw HarnessError(std::string("invalid tool manifest: ") + e.what());
    }
    return tools;
}

std::vector<InstanceEntry> parse_instance_manifest(const std::string& json_text) {
    const json doc = parse_json(json_text);
    std::vector<InstanceEntry> out;
    std::set<std::string> seen;
    try {
        for (const auto& e : entries(doc, "instances")) {
            InstanceEntry i;
            i.path = e.at("path").get<std::string>();
            if (e.contains("family") && !e.at("family").is_null()) i.family = parse_family(e.at("family").get<std::string>());
            if (e.contains("size") && !e.at("size").is_null()) i.size = e.at("size").get<std::int64_t>();
            if (e.contains("expected") && !e.at("expected").is_null()) i.expected = e.at("expected").get<std::string>();
            if (!seen.insert(i.id()).second) throw HarnessError("duplicate instance id '" + i.id() + "'");
            out.push_back(std::move(i));
        }
    } catch (const json::exception& e) {
        throw HarnessError(std::string("invalid instance manifest: ") + e.what());
    } catch (const CodegenError& e) {
        throw HarnessError(std::string("invalid instance manifest: ") + e.what());
    }
    return out;
}

std::vector<ToolSpec> load_tool_manifest(const fs::path& file) { return parse_tool_manifest(slurp(file)); }

std::vector<InstanceEntry> load_instance_manifest(const fs::path& file) {
    return parse_instance_manifest(slurp(file));
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

namespace {

struct Job {
    std::size_t instance = 0;
    std::size_t tool = 0;
    std::optional<TransformSpec> spec;  // nullopt for baselines
};

std::chrono::milliseconds to_ms(double seconds) {
    return std::chrono::milliseconds(static_cast<long long>(std::ceil(seconds * 1000.0)));
}

RunRecord execute_job(const Job& job, const InstanceEntry& inst, const CspInstance& csp, const ToolSpec& tool,
                      const fs::path& dir, std::chrono::milliseconds grace) {
    RunRecord rec;
    rec.tool = tool.name;
    rec.instance = inst.id();
    rec.version = job.spec ? version_label(*job.spec) : std::string(kBaselineVersion);

    std::map<std::string, std::string> values{{"instance", rec.instance}, {"version", rec.version}};
    fs::path src;
    std::string stem;
    if (job.spec) {
        TransformSpec spec = *job.spec;
        spec.dialect = tool.dialect;
        stem = fs::path(output_file_name(rec.instance, spec)).stem().string();
        src = dir / (stem + ".c");
        try {
            const GeneratedProgram prog = transform(csp, spec);
            std::ofstream f(src);
            f << prog.source;
            if (!f) throw HarnessError("cannot write " + src.string());
        } catch (const std::exception& e) {
            rec.outcome = Outcome::ToolError;
            rec.detail = e.what();
            return rec;
        }
    } else {
        src = fs::absolute(inst.path);
        stem = rec.instance + "__" + tool.name;
    }
    values["src"] = src.string();
    values["bitcode"] = (dir / (stem + "__" + tool.name + ".bc")).string();
    values["out"] = (dir / (stem + "__" + tool.name + ".out")).string();

    ProcessOptions po;
    po.timeout = to_ms(tool.timeout_seconds);
    po.kill_grace = grace;
    if (tool.prepare) {
        const auto p = run_shell(expand_template(*tool.prepare, values), po);
        if (!p.exited_ok()) {
            rec.outcome = Outcome::ToolError;
            rec.detail = "prepare step failed: " + p.err;
            return rec;
        }
    }
    const auto r = run_shell(expand_template(tool.run, values), po);
    rec.wallclock_seconds = r.wallclock_seconds;
    if (r.timed_out) {
        rec.outcome = Outcome::Timeout;
        rec.wallclock_seconds = std::max(r.wallclock_seconds, tool.timeout_seconds);
    } else if (!r.started || r.signal != 0 || r.exit_code == 126 || r.exit_code == 127) {
        rec.outcome = Outcome::ToolError;
        rec.detail = r.err;
    } else {
        const std::regex re(tool.success_pattern);
        const bool hit = !tool.success_pattern.empty() &&
                         (std::regex_search(r.out, re) || std::regex_search(r.err, re));
        rec.outcome = hit ? Outcome::Reached : Outcome::NotReached;
    }
    return rec;
}

}  // namespace

std::vector<RunRecord> run_matrix(const std::vector<InstanceEntry>& instances, const std::vector<ToolSpec>& tools,
                                  const MatrixOptions& options) {
    if (options.workers > 1 && !options.allow_parallel) {
        throw HarnessError("more than one worker requires explicitly allowing parallel runs");
    }
    for (const auto& t : tools) t.validate();

    std::vector<CspInstance> csps;
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        auto parsed = parse_file(inst.path);
        if (!parsed.ok()) {
            std::string msg = "cannot load " + inst.path.string();
            for (const auto& d : parsed.errors()) msg += "\n  " + d.to_string();
            throw HarnessError(msg);
        }
        const auto fam = instance_family(*parsed.instance);
        if (!fam) throw HarnessError(inst.path.string() + ": no single constraint family");
        if (inst.family && *inst.family != *fam) {
            throw HarnessError(inst.path.string() + ": manifest family does not match its constraints");
        }
        csps.push_back(std::move(*parsed.instance));

        for (std::size_t t = 0; t < tools.size(); ++t) {
            if (tools[t].kind == ToolKind::Baseline) jobs.push_back({i, t, std::nullopt});
        }
        std::vector<int> versions = options.versions;
        if (versions.empty()) {
            for (int v = 1; v <= version_count(*fam); ++v) versions.push_back(v);
        }
        for (int v : versions) {
            TransformSpec spec;
            try {
                spec = version_to_spec(*fam, v);
            } catch (const CodegenError& e) {
                throw HarnessError(e.what());
            }
            for (std::size_t t = 0; t < tools.size(); ++t) {
                if (tools[t].kind == ToolKind::Analysis) jobs.push_back({i, t, spec});
            }
        }
    }

    std::vector<fs::path> dirs;
    for (const auto& inst : instances) {
        dirs.push_back(options.work_dir / inst.id());
        fs::create_directories(dirs.back());
    }

    std::vector<RunRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[j];
            records[j] = execute_job(job, instances[job.instance], csps[job.instance], tools[job.tool],
                                     dirs[job.instance], options.kill_grace);
        }
    };
    const unsigned n = std::max(1u, options.workers);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    return records;
}

void normalize(std::vector<RunRecord>& records, std::optional<std::string> baseline_tool) {
    if (!baseline_tool) {
        for (const auto& r : records) {
            if (is_baseline(r)) {
                baseline_tool = r.tool;
                break;
            }
        }
    }
    std::map<std::string, double> base;
    if (baseline_tool) {
        for (const auto& r : records) {
            if (is_baseline(r) && r.tool == *baseline_tool && r.wallclock_seconds > 0 &&
                (r.outcome == Outcome::Reached || r.outcome == Outcome::NotReached)) {
                base.emplace(r.instance, r.wallclock_seconds);
            }
        }
    }
    for (auto& r : records) {
        r.normalized.reset();
        if (is_baseline(r)) continue;
        if (auto it = base.find(r.instance); it != base.end()) r.normalized = r.wallclock_seconds / it->second;
    }
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace {

// "ext2" < "ext10"; other labels compare as text.
bool version_less(const std::string& a, const std::string& b) {
    auto split = [](const std::string& s) {
        std::size_t k = s.size();
        while (k > 0 && std::isdigit(static_cast<unsigned char>(s[k - 1]))) --k;
        long long num = -1;
        if (k < s.size()) std::from_chars(s.data() + k, s.data() + s.size(), num);
        return std::pair{s.substr(0, k), num};
    };
    return split(a) < split(b);
}

}  // namespace

Report build_report(const std::vector<RunRecord>& records, const std::map<std::string, std::int64_t>& sizes,
                    bool parallel) {
    if (records.empty()) throw HarnessError("no records to report");
    Report rep;
    rep.records = records;
    rep.parallel = parallel;

    std::vector<const RunRecord*> analysis;
    for (const auto& r : records) {
        if (!is_baseline(r)) analysis.push_back(&r);
    }
    rep.no_analysis_tools = analysis.empty();
    rep.raw_seconds = std::none_of(analysis.begin(), analysis.end(), [](const RunRecord* r) { return r->normalized.has_value(); });
    if (rep.no_analysis_tools) rep.warnings.push_back("no analysis tools");
    if (!rep.no_analysis_tools && rep.raw_seconds) {
        rep.warnings.push_back("no baseline timings; robustness reports raw seconds");
    }

    struct Acc {
        double sum = 0;
        std::size_t n = 0;
        std::size_t timeouts = 0;
    };
    auto key_less = [](const std::pair<std::string, std::string>& a, const std::pair<std::string, std::string>& b) {
        if (a.first != b.first) return a.first < b.first;
        return version_less(a.second, b.second);
    };
    std::map<std::pair<std::string, std::string>, Acc, decltype(key_less)> rob(key_less);
    std::map<std::pair<std::string, std::int64_t>, std::size_t> scal;
    std::set<std::string> unsized;
    for (const RunRecord* r : analysis) {
        Acc& a = rob[{r->tool, r->version}];
        if (r->outcome == Outcome::Timeout) {
            ++a.timeouts;
        } else if (r->outcome != Outcome::ToolError) {
            const std::optional<double> v = rep.raw_seconds ? std::optional(r->wallclock_seconds) : r->normalized;
            if (v) {
                a.sum += *v;
                ++a.n;
            }
        }
        if (auto it = sizes.find(r->instance); it != sizes.end()) {
            scal[{r->tool, it->second}] += r->outcome == Outcome::Timeout ? 1 : 0;
        } else {
            unsized.insert(r->instance);
        }
    }
    for (const auto& [k, a] : rob) {
        RobustnessRow row{k.first, k.second, std::nullopt, a.timeouts, a.n};
        if (a.n > 0) row.mean = a.sum / static_cast<double>(a.n);
        rep.robustness.push_back(row);
    }
    for (const auto& [k, t] : scal) rep.scalability.push_back({k.first, k.second, t});
    for (const auto& id : unsized) rep.warnings.push_back("instance '" + id + "' has no size; left out of scalability");
    return rep;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

double parse_double(const std::string& s, const fs::path& file) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw HarnessError(file.string() + ": bad number '" + s + "'");
    }
    return v;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw HarnessError("cannot write " + p.string());
    return f;
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream f(file);
    if (!f) throw HarnessError("cannot read " + file.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(f, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::vector<fs::path> emit_csv(const Report& report, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;

    const fs::path raw = dir / "raw.csv";
    {
        auto f = open_out(raw);
        f << "tool,instance,version,outcome,wallclock_s,normalized\n";
        for (const auto& r : report.records) {
            f << csv_field(r.tool) << ',' << csv_field(r.instance) << ',' << csv_field(r.version) << ','
              << to_string(r.outcome) << ',' << format_seconds(r.wallclock_seconds) << ','
              << (r.normalized ? format_seconds(*r.normalized) : "") << '\n';
        }
        if (!f) throw HarnessError("cannot write " + raw.string());
    }
    written.push_back(raw);

    const fs::path rob = dir / "robustness.csv";
    {
        auto f = open_out(rob);
        f << "tool,version,mean_normalized,timeouts,n\n";
        for (const auto& r : report.robustness) {
            f << csv_field(r.tool) << ',' << csv_field(r.version) << ',' << (r.mean ? format_seconds(*r.mean) : "")
              << ',' << r.timeouts << ',' << r.n << '\n';
        }
        if (!f) throw HarnessError("cannot write " + rob.string());
    }
    written.push_back(rob);

    const fs::path sca = dir / "scalability.csv";
    {
        auto f = open_out(sca);
        f << "tool,size_index,timeouts\n";
        for (const auto& r : report.scalability) f << csv_field(r.tool) << ',' << r.size_index << ',' << r.timeouts << '\n';
        if (!f) throw HarnessError("cannot write " + sca.string());
    }
    written.push_back(sca);
    return written;
}

std::vector<RunRecord> read_records_csv(const fs::path& file) {
    const auto lines = read_lines(file);
    if (lines.empty() || lines.front() != "tool,instance,version,outcome,wallclock_s,normalized") {
        throw HarnessError(file.string() + ": not a raw records file");
    }
    std::vector<RunRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = csv_split(lines[i]);
        if (f.size() != 6) throw HarnessError(file.string() + ":" + std::to_string(i + 1) + ": expected 6 fields");
        RunRecord r;
        r.tool = f[0];
        r.instance = f[1];
        r.version = f[2];
        r.outcome = parse_outcome(f[3]);
        r.wallclock_seconds = parse_double(f[4], file);
        if (!f[5].empty()) r.normalized = parse_double(f[5], file);
        out.push_back(std::move(r));
    }
    return out;
}

void write_sidecars(const fs::path& dir, const std::vector<InstanceEntry>& instances, bool parallel) {
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "instances.csv");
        f << "instance,size\n";
        for (const auto& i : instances) {
            if (i.size) f << csv_field(i.id()) << ',' << *i.size << '\n';
        }
    }
    auto f = open_out(dir / "run_info.json");
    json info{{"parallel", parallel}};
    if (parallel) info["note"] = "parallel, timings indicative";
    f << info.dump(2) << '\n';
}

std::map<std::string, std::int64_t> read_sizes_csv(const fs::path& file) {
    const auto lines = read_lines(file);
    if (lines.empty() || lines.front() != "instance,size") throw HarnessError(file.string() + ": not a sizes file");
    std::map<std::string, std::int64_t> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = csv_split(lines[i]);
        std::int64_t v = 0;
        if (f.size() != 2 || std::from_chars(f[1].data(), f[1].data() + f[1].size(), v).ec != std::errc()) {
            throw HarnessError(file.string() + ":" + std::to_string(i + 1) + ": malformed row");
        }
        out[f[0]] = v;
    }
    return out;
}

bool read_parallel_flag(const fs::path& run_info) {
    try {
        return json::parse(slurp(run_info)).value("parallel", false);
    } catch (const json::exception& e) {
        throw HarnessError(run_info.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr double kPlotHeight = 300.0;
constexpr double kLeft = 60.0;
constexpr double kTop = 40.0;
constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<std::string> tools_of(const auto& rows) {
    std::vector<std::string> tools;
    for (const auto& r : rows) {
        if (std::find(tools.begin(), tools.end(), r.tool) == tools.end()) tools.push_back(r.tool);
    }
    return tools;
}

std::string svg_open(double width, double height, const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + num(kLeft) +
           "\" y=\"20\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
}

std::string legend(const std::vector<std::string>& tools, double x) {
    std::string s;
    for (std::size_t t = 0; t < tools.size(); ++t) {
        const double y = kTop + 14.0 * static_cast<double>(t);
        s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"10\" height=\"10\" fill=\"" +
             kPalette[t % std::size(kPalette)] + "\"/>\n";
        s += "<text x=\"" + num(x + 14) + "\" y=\"" + num(y + 9) + "\">" + xml_escape(tools[t]) + "</text>\n";
    }
    return s;
}

std::string robustness_svg(const Report& rep) {
    const auto tools = tools_of(rep.robustness);
    std::vector<std::string> versions;
    for (const auto& r : rep.robustness) {
        if (std::find(versions.begin(), versions.end(), r.version) == versions.end()) versions.push_back(r.version);
    }
    std::sort(versions.begin(), versions.end(), version_less);
    double max = 0;
    for (const auto& r : rep.robustness) max = std::max(max, r.mean.value_or(0.0));

    const double bar = 14.0;
    const double group = bar * static_cast<double>(std::max<std::size_t>(tools.size(), 1)) + 10.0;
    const double width = kLeft + group * static_cast<double>(versions.size()) + 160.0;
    const double base = kTop + kPlotHeight;
    std::string s = svg_open(width, base + 50.0,
                             rep.raw_seconds ? "Mean time per version (seconds)" : "Mean normalized time per version");
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(base) + "\" x2=\"" + num(width - 160.0) + "\" y2=\"" +
         num(base) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(base) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"4\" y=\"" + num(kTop + 4) + "\">" + num(max) + "</text>\n";
    for (std::size_t v = 0; v < versions.size(); ++v) {
        const double gx = kLeft + 5.0 + group * static_cast<double>(v);
        for (std::size_t t = 0; t < tools.size(); ++t) {
            auto it = std::find_if(rep.robustness.begin(), rep.robustness.end(),
                                   [&](const RobustnessRow& r) { return r.tool == tools[t] && r.version == versions[v]; });
            if (it == rep.robustness.end() || !it->mean) continue;
            const double h = max > 0 ? *it->mean / max * kPlotHeight : 0.0;
            s += "<rect class=\"bar\" data-tool=\"" + xml_escape(tools[t]) + "\" data-version=\"" +
                 xml_escape(versions[v]) + "\" x=\"" + num(gx + bar * static_cast<double>(t)) + "\" y=\"" +
                 num(base - h) + "\" width=\"" + num(bar - 2) + "\" height=\"" + num(h) + "\" fill=\"" +
                 kPalette[t % std::size(kPalette)] + "\"/>\n";
        }
        s += "<text x=\"" + num(gx) + "\" y=\"" + num(base + 16) + "\">" + xml_escape(versions[v]) + "</text>\n";
    }
    s += legend(tools, width - 150.0);
    return s + "</svg>\n";
}

std::string scalability_svg(const Report& rep) {
    const auto tools = tools_of(rep.scalability);
    std::vector<std::int64_t> sizes;
    std::size_t max = 1;
    for (const auto& r : rep.scalability) {
        sizes.push_back(r.size_index);
        max = std::max(max, r.timeouts);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    const double step = 40.0;
    const double width = kLeft + step * static_cast<double>(sizes.size()) + 160.0;
    const double base = kTop + kPlotHeight;
    auto xpos = [&](std::int64_t size) {
        const auto k = std::lower_bound(sizes.begin(), sizes.end(), size) - sizes.begin();
        return kLeft + step / 2 + step * static_cast<double>(k);
    };
    std::string s = svg_open(width, base + 50.0, "Timeouts per problem size");
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(base) + "\" x2=\"" + num(width - 160.0) + "\" y2=\"" +
         num(base) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(base) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"4\" y=\"" + num(kTop + 4) + "\">" + std::to_string(max) + "</text>\n";
    for (std::int64_t size : sizes) {
        s += "<text x=\"" + num(xpos(size) - 4) + "\" y=\"" + num(base + 16) + "\">" + std::to_string(size) + "</text>\n";
    }
    for (std::size_t t = 0; t < tools.size(); ++t) {
        std::string pts;
        for (const auto& r : rep.scalability) {
            if (r.tool != tools[t]) continue;
            const double y = base - static_cast<double>(r.timeouts) / static_cast<double>(max) * kPlotHeight;
            pts += (pts.empty() ? "" : " ") + num(xpos(r.size_index)) + "," + num(y);
        }
        s += "<polyline class=\"series\" data-tool=\"" + xml_escape(tools[t]) + "\" fill=\"none\" stroke=\"" +
             kPalette[t % std::size(kPalette)] + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    }
    s += legend(tools, width - 150.0);
    return s + "</svg>\n";
}

}  // namespace

std::vector<fs::path> emit_svg(Report& report, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    const fs::path rob = dir / "robustness.svg";
    {
        auto f = open_out(rob);
        f << robustness_svg(report);
        if (!f) throw HarnessError("cannot write " + rob.string());
    }
    written.push_back(rob);
    if (report.scalability.empty()) {
        report.warnings.push_back("scalability table is empty; no scalability chart written");
        return written;
    }
    const fs::path sca = dir / "scalability.svg";
    {
        auto f = open_out(sca);
        f << scalability_svg(report);
        if (!f) throw HarnessError("cannot write " + sca.string());
    }
    written.push_back(sca);
    return written;
}

}  // namespace csp2c
