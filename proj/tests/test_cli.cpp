#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

const std::string cli{QCHAN_CLI_PATH};
const std::filesystem::path fixtures{QCHAN_FIXTURE_DIR};

struct Outcome {
    int status = -1;
    std::string out;
};

Outcome run(const std::string& args)
{
    Outcome o;
    const std::string cmd = "'" + cli + "' " + args + " 2>/dev/null";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p)
        return o;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0)
        o.out.append(buf.data(), got);
    const int rc = ::pclose(p);
    o.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return o;
}

std::string fx(const std::string& name) { return "'" + (fixtures / name).string() + "'"; }

std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("qchan_cli_test_" + name);
}

} // namespace

TEST(Cli, ValidateIdentity)
{
    const auto o = run("validate " + fx("identity_channel.json"));
    ASSERT_EQ(o.status, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_TRUE(j["validation"]["trace_preserving"].get<bool>());
    EXPECT_TRUE(j["validation"]["unital"].get<bool>());
}

TEST(Cli, AlgebraWithoutIdentity)
{
    const auto o = run("algebra " + fx("paper_sec4_2.json") + " --no-identity");
    ASSERT_EQ(o.status, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["algebra"]["dimension"], 5);
    EXPECT_TRUE(j["algebra"]["star_closed"].get<bool>());
    EXPECT_EQ(j["algebra"]["labels"], nlohmann::json::parse(R"(["1","2","11","12","21"])"));
}

TEST(Cli, ReportFirstFamily)
{
    const auto o = run("report " + fx("example1_phi_0.7853981633974483.json"));
    ASSERT_EQ(o.status, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["prediction"]["period_bound"], 2);
    const auto& ps = j["spectrum"]["peripheral_set"];
    ASSERT_EQ(ps.size(), 2u);
    std::vector<double> re;
    for (const auto& c : ps) {
        re.push_back(c["value"][0].get<double>());
        EXPECT_NEAR(c["value"][1].get<double>(), 0.0, 1e-7);
    }
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], -1.0, 1e-7);
    EXPECT_NEAR(re[1], 1.0, 1e-7);
}

TEST(Cli, ByteIdenticalReruns)
{
    const std::string args = "report " + fx("example1_phi_1.0.json") + " --seed 5";
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    const auto c = run("report " + fx("paper_sec4_2.json") + " " + fx("depolarizing_qubit.json"));
    const auto d = run("report " + fx("paper_sec4_2.json") + " " + fx("depolarizing_qubit.json"));
    EXPECT_EQ(c.out, d.out);
}

TEST(Cli, MultipleFixturesGiveArray)
{
    const auto o = run("validate " + fx("identity_channel.json") + " " + fx("paper_sec4_2.json"));
    ASSERT_EQ(o.status, 0);
    const auto j = nlohmann::json::parse(o.out);
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j.size(), 2u);
}

TEST(Cli, PreconditionExitCode)
{
    const auto o = run("predict " + fx("example2_phi_1.0471975511965976.json"));
    EXPECT_EQ(o.status, 2);
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["error"]["kind"], "precondition");
    EXPECT_EQ(j["error"]["exit_code"], 2);
}

TEST(Cli, MalformedFixture)
{
    const auto path = temp_path("bad.json");
    {
        std::ofstream f(path);
        f << R"({"name": "bad", "dim": 2, "kraus": [[ [[1,0],[0,0]], [[0,0]] ]]})";
    }
    const auto o = run("validate '" + path.string() + "'");
    EXPECT_EQ(o.status, 2);
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["error"]["kind"], "parse");
    EXPECT_NE(j["error"]["message"].get<std::string>().find("row 1"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run("frobnicate " + fx("identity_channel.json")).status, 2);
    EXPECT_EQ(run("validate /nonexistent/file.json").status, 2);
    EXPECT_EQ(run("").status, 2);
}

TEST(Cli, OutFileMatchesStdout)
{
    const auto path = temp_path("out.json");
    std::filesystem::remove(path);
    const std::string base = "primitivity " + fx("depolarizing_qubit.json") + " --mmax 3";
    const auto o = run(base + " --out '" + path.string() + "'");
    ASSERT_EQ(o.status, 0);
    EXPECT_TRUE(o.out.empty());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), run(base).out);
    const auto j = nlohmann::json::parse(ss.str());
    EXPECT_EQ(j["primitivity"]["m_max"], 3);
    EXPECT_EQ(j["primitivity"]["witness_m"], 1);
    std::filesystem::remove(path);
}

TEST(Cli, SimulateReportsPeriod)
{
    const auto o = run("simulate " + fx("unitary_qutrit_phase.json") + " --steps 30");
    ASSERT_EQ(o.status, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["dynamics"]["detected_period"], 3);
    EXPECT_EQ(j["dynamics"]["steps"], 30);
}

TEST(Cli, ShemeshCommand)
{
    const auto o = run("shemesh " + fx("example2_phi_1.0471975511965976.json"));
    ASSERT_EQ(o.status, 0) << o.out;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["shemesh"]["pairs"].size(), 3u);
    EXPECT_EQ(j["shemesh"]["generalized"]["dim"], 1);
}
