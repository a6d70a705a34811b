#include <catch2/catch_amalgamated.hpp>

#include "brute_force.hpp"
#include "corpus.hpp"
#include "csp2c/verifier.hpp"

using namespace csp2c;
using testsupport::load_valid;

namespace {

std::string flip_first_ne(const std::string& src) {
    std::string s = src;
    const auto at = s.find("!=", s.find("// constraints"));
    if (at != std::string::npos) s[at] = '=';
    return s;
}

}  // namespace

TEST_CASE("drivers agree with the oracle on every assignment", "[verifier]") {
    for (const std::string file : {"fig1a.xml", "triangle-unsat.xml", "fig1bc.xml", "intension-unsat.xml"}) {
        INFO(file);
        const auto csp = load_valid(file);
        const auto fam = *instance_family(csp);
        const auto rep = differential_check(csp, all_versions(fam));
        CHECK(rep.status == VerificationStatus::Pass);
        CHECK(rep.mismatches.empty());
        CHECK(rep.assignments_checked == csp.search_space() * static_cast<std::uint64_t>(version_count(fam)));
        const auto solutions = testsupport::all_solutions(csp).size();
        for (auto a : rep.accepted) CHECK(a == solutions);
    }
}

TEST_CASE("an injected fault is detected", "[verifier][fault]") {
    const auto csp = load_valid("queens4.xml");
    VerifierOptions o;
    o.source_mutator = flip_first_ne;
    const auto rep = differential_check(csp, {version_to_spec(Family::Intensional, 1)}, o);
    CHECK(rep.status == VerificationStatus::Fail);
    REQUIRE_FALSE(rep.mismatches.empty());
    CHECK(rep.mismatches.front().version == "int1");
    CHECK(std::is_sorted(rep.mismatches.begin(), rep.mismatches.end()));
    CHECK_THAT(rep.to_string(), Catch::Matchers::ContainsSubstring("FAIL"));
}

TEST_CASE("cross-version equivalence", "[verifier]") {
    const auto csp = load_valid("aim-mini.xml");
    CHECK(cross_version_equivalence(csp, all_versions(Family::Extensional)));

    VerifierOptions o;
    int calls = 0;
    o.source_mutator = [&](const std::string& s) {
        if (++calls != 2) return s;
        std::string broken = s;
        const auto at = broken.find("x0==0", broken.find("// constraints"));
        REQUIRE(at != std::string::npos);
        broken[at + 4] = '1';
        return broken;
    };
    CHECK_FALSE(cross_version_equivalence(csp, all_versions(Family::Extensional), o));
}

TEST_CASE("large instances are skipped or sampled", "[verifier][sampling]") {
    const auto csp = load_valid("costas3.xml");
    VerifierOptions o;
    o.exhaustive_bound = 10;
    const auto skipped = differential_check(csp, {version_to_spec(Family::Intensional, 2)}, o);
    CHECK(skipped.status == VerificationStatus::SkippedTooLarge);
    CHECK(skipped.assignments_checked == 0);

    o.samples = 20;
    const auto sampled = differential_check(csp, {version_to_spec(Family::Intensional, 2)}, o);
    CHECK(sampled.status == VerificationStatus::Sampled);
    CHECK(sampled.assignments_checked == 21);  // the oracle witness plus the samples
    CHECK(sampled.accepted.front() >= 1);

    CHECK_THROWS_AS(cross_version_equivalence(csp, all_versions(Family::Intensional), o), VerificationError);
}

TEST_CASE("a broken compiler command is an error", "[verifier]") {
    VerifierOptions o;
    o.compile_command = "false {src} {out}";
    CHECK_THROWS_AS(differential_check(load_valid("pigeonhole.xml"), {version_to_spec(Family::Intensional, 1)}, o),
                    VerificationError);
}

TEST_CASE("parallel workers give the same report", "[verifier]") {
    const auto csp = load_valid("grid2d.xml");
    VerifierOptions o;
    o.workers = 3;
    const auto par = differential_check(csp, all_versions(Family::Intensional), o);
    const auto seq = differential_check(csp, all_versions(Family::Intensional));
    CHECK(par.status == VerificationStatus::Pass);
    CHECK(par.accepted == seq.accepted);
    CHECK(par.assignments_checked == seq.assignments_checked);
}
