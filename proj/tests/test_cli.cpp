#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "loewner_lab/conditions.hpp"

namespace fs = std::filesystem;

namespace {

std::string env(const char* name) {
    const char* v = std::getenv(name);
    REQUIRE_MESSAGE(v != nullptr, name << " is not set");
    return v;
}

struct Run {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args, const std::string& workers = "1") {
    fs::path tmp = env("LL_TMP");
    fs::create_directories(tmp);
    std::string cmd = "LOEWNER_LAB_WORKERS=" + workers + " " + env("LL_CLI") + " " + args + " >" +
                      (tmp / "stdout").string() + " 2>" + (tmp / "stderr").string();
    int rc = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(tmp / "stdout");
    r.err = slurp(tmp / "stderr");
    return r;
}

std::string tmp(const std::string& name) { return (fs::path(env("LL_TMP")) / name).string(); }
std::string domain(const std::string& name) { return (fs::path(env("LL_DOMAINS")) / name).string(); }

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("sample is deterministic across reruns and worker counts") {
    std::string args = "sample --model percolation --domain " + domain("rhombus32.json") + " --n 8 --seed 4";
    Run a = run(args, "1"), b = run(args, "1"), c = run(args, "4");
    CHECK(a.code == 0);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    int lines = 0;
    std::istringstream is(a.out);
    for (std::string l; std::getline(is, l);) {
        ++lines;
        CHECK_NOTHROW(nlohmann::json::parse(l));
    }
    CHECK(lines == 8);
}

TEST_CASE("exit codes") {
    CHECK(run("convert --direction G2-\\>C2 --C 2").code == 0);
    CHECK(run("convert --direction sideways --C 2").code == 1);
    CHECK(run("sample --model nonsense --domain " + domain("rhombus32.json")).code == 1);
    CHECK(run("sample --bogus-flag").code == 1);
    CHECK(run("--help").code == 0);
    // the UST Peano curve fails the crossing condition
    Run f = run("check-condition --model ust-peano --domain " + domain("ust32.json") +
                " --C 4 --r 2 --n 40 --min-trials 30 --seed 1 --json -");
    CHECK(f.code == 2);
    auto j = nlohmann::json::parse(f.out);
    CHECK(j.at("verdict") == "FAIL");
}

TEST_CASE("convert reports the constants") {
    Run r = run("convert --direction G2-\\>G3 --C 2");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.dump().find("\"K\":2.0") != std::string::npos);
}

TEST_CASE("config files") {
    std::string good = tmp("good.json");
    write(good, R"({"schema": "loewner-lab/config@1", "model": "percolation", "domain": ")" + domain("rhombus32.json") +
                    R"(", "n": 3, "seed": 4})");
    Run a = run("--config " + good + " sample");
    Run b = run("sample --model percolation --domain " + domain("rhombus32.json") + " --n 3 --seed 4");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    // flags override the file
    Run c = run("--config " + good + " sample --n 2");
    CHECK(c.code == 0);
    CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 2);

    std::string broken = tmp("broken.json");
    write(broken, "{\"n\": 3,\n \"seed\": }");
    Run d = run("--config " + broken + " sample");
    CHECK(d.code == 1);
    CHECK(d.err.find("line 2") != std::string::npos);

    std::string unknown = tmp("unknown.json");
    write(unknown, R"({"sample": {"n": 3, "colour": "red"}})");
    Run e = run("--config " + unknown + " sample");
    CHECK(e.code == 1);
    CHECK(e.err.find("colour") != std::string::npos);

    std::string schema = tmp("schema.json");
    write(schema, R"({"schema": "something-else@2"})");
    CHECK(run("--config " + schema + " sample").code == 1);
}

TEST_CASE("merge-reports adds shard counts") {
    std::string base = "check-condition --model percolation --domain " + domain("rhombus32.json") +
                       " --C 4 --r 1.5 --n 20 --min-trials 10";
    REQUIRE(run(base + " --seed 1 --csv " + tmp("s1.csv")).code <= 2);
    REQUIRE(run(base + " --seed 2 --csv " + tmp("s2.csv")).code <= 2);
    Run m = run("merge-reports " + tmp("s1.csv") + " " + tmp("s2.csv") + " --C 4 --min-trials 10 --csv " +
                tmp("merged.csv"));
    CHECK(m.code <= 2);
    std::ifstream f1(tmp("s1.csv")), f2(tmp("s2.csv")), fm(tmp("merged.csv"));
    auto r1 = ll::read_report_csv(f1), r2 = ll::read_report_csv(f2), rm = ll::read_report_csv(fm);
    long t1 = 0, t2 = 0, tm = 0;
    for (auto& r : r1.rows) t1 += r.trials;
    for (auto& r : r2.rows) t2 += r.trials;
    for (auto& r : rm.rows) tm += r.trials;
    CHECK(tm == t1 + t2);
    CHECK(rm.rows.size() == r1.rows.size());
}

TEST_CASE("trace and extract-driving round trip through files") {
    Run t = run("trace --kappa 2 --T 0.1 --dt 0.001 --seed 3 --out " + tmp("trace.ndjson"));
    REQUIRE(t.code == 0);
    Run e = run("extract-driving --in " + tmp("trace.ndjson") + " --index 0 --out " + tmp("w.csv"));
    REQUIRE(e.code == 0);
    std::string csv = slurp(tmp("w.csv"));
    CHECK(csv.rfind("t,w\n", 0) == 0);
    Run again = run("trace --driving " + tmp("w.csv") + " --out -");
    CHECK(again.code == 0);
}
