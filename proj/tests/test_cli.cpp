#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args)
{
    std::string cmd = std::string(MAHOWALD_BINARY) + " --data \"" + MAHOWALD_DATA_FILE + "\" " +
                      args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe))
        r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

RunResult run_raw(const std::string& args)
{
    std::string cmd = std::string(MAHOWALD_BINARY) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe))
        r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("help lists every subcommand and the shared flags")
{
    RunResult r = run_raw("--help");
    CHECK(r.exit_code == 0);
    for (const char* word : {"ingest", "complex", "ahss", "malg", "resolve", "verify-table",
                             "trace", "--data", "--format"})
        CHECK(r.output.find(word) != std::string::npos);
}

TEST_CASE("complex output is stable byte for byte")
{
    RunResult a = run("complex --bottom -2 --top 0");
    RunResult b = run("complex --bottom -2 --top 0");
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output ==
          "P^0_-2: cells -2..0\n"
          "  0 -> -2  eta\n"
          "  0 -> -1  two_iota\n");
}

TEST_CASE("verify-table exits zero on the bundled data")
{
    RunResult r = run("verify-table");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0 mismatches") != std::string::npos);
    RunResult again = run("verify-table");
    CHECK(again.output == r.output);
}

TEST_CASE("json output carries the schema version")
{
    for (const char* cmd : {"ingest", "complex --bottom -2 --top 0",
                            "ahss --bottom -4 --top 0 --degree 3", "resolve eta",
                            "verify-table", "malg h_1"}) {
        RunResult r = run(std::string("--format json ") + cmd);
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("\"schema\": 1") != std::string::npos);
    }
    // the format flag is also accepted after the subcommand
    RunResult r = run("verify-table --format json");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"schema\": 1") != std::string::npos);
}

TEST_CASE("resolve prints the conclusion of the quoted computation")
{
    RunResult r = run("resolve eta_4 --trace");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("determined") != std::string::npos);
    CHECK(r.output.find("pi(Delta h_1 h_3) in M(eta_4)") != std::string::npos);
}

TEST_CASE("trace subcommand replays what it prints")
{
    RunResult r = run("trace nu*sigmabar");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("trace replayed: ok") != std::string::npos);
    CHECK(r.output.find("nu*kappabar_2") != std::string::npos);
}

TEST_CASE("malg subcommand reports the route")
{
    RunResult r = run("malg \"h_1 h_4\"");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("h_2 h_5") != std::string::npos);
    CHECK(r.output.find("cartan") != std::string::npos);
}

TEST_CASE("ahss subcommand shows entries, differentials and survivors")
{
    RunResult r = run("ahss --bottom -18 --top 0 --degree 15 --filtration-floor 4");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("d_4(theta_4[-14]) = pi(p)[-18]") != std::string::npos);
    CHECK(r.output.find("pi(Delta h_1 h_3)[-17]") != std::string::npos);
}

TEST_CASE("missing data file exits with the coverage code")
{
    RunResult r = run_raw("--data /nonexistent/stems.facts ingest");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("error") != std::string::npos);
}

TEST_CASE("unknown names exit with the coverage code")
{
    RunResult r = run("resolve not_an_element");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("not_an_element") != std::string::npos);
}
