#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

CliRun run_cli(const std::string& args)
{
    const fs::path log = fs::temp_directory_path() / ("mevlens_cli_" + std::to_string(::getpid()) + ".log");
    const std::string cmd = std::string("\"") + MEVLENS_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    fs::path out;
    void SetUp() override
    {
        out = fs::temp_directory_path() /
              ("mevlens_cli_out_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(out);
    }
    void TearDown() override { fs::remove_all(out); }
    std::string common() const
    {
        return std::string("--fixtures \"") + MEVLENS_DEMO_DIR + "\" --out \"" + out.string() + "\" ";
    }
};

}  // namespace

TEST_F(Cli, HelpExitsZero)
{
    const CliRun r = run_cli("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.output.find("crosslayer"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandExitsOne)
{
    const CliRun r = run_cli(common() + "frobnicate");
    EXPECT_EQ(r.code, 1) << r.output;
    EXPECT_NE(r.output.find("error"), std::string::npos);
}

TEST_F(Cli, MissingNestedSubcommandExitsOne)
{
    EXPECT_EQ(run_cli(common() + "detect").code, 1);
}

TEST_F(Cli, InvertedRangeExitsOne)
{
    const CliRun r = run_cli(common() + "--from-block 20 --to-block 10 detect arb");
    EXPECT_EQ(r.code, 1) << r.output;
}

TEST_F(Cli, UnknownChainExitsOne)
{
    const CliRun r = run_cli(common() + "--chain solana detect arb");
    EXPECT_EQ(r.code, 1) << r.output;
    EXPECT_NE(r.output.find("solana"), std::string::npos);
}

TEST_F(Cli, MissingChainFileNamesThePath)
{
    const CliRun r = run_cli("--fixtures /nonexistent/dir --out \"" + out.string() + "\" detect arb");
    EXPECT_EQ(r.code, 1) << r.output;
    EXPECT_NE(r.output.find("/nonexistent/dir"), std::string::npos) << r.output;
}

TEST_F(Cli, DetectArbWritesFindings)
{
    const CliRun r = run_cli(common() + "detect arb");
    ASSERT_EQ(r.code, 0) << r.output;
    const std::string body = slurp(out / "findings" / "arbitrage_ethereum.jsonl");
    EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 25);
}

TEST_F(Cli, ReportOnNoFindingsGivesHeaderOnlyTables)
{
    const CliRun r = run_cli(common() + "report");
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* name : {"monthly_counts.csv", "profit_stats.csv", "flash_loans.csv"}) {
        const std::string csv = slurp(out / "report" / name);
        ASSERT_FALSE(csv.empty()) << name;
        EXPECT_EQ(csv.find("\r\n"), csv.size() - 2) << name;
    }
}

TEST_F(Cli, CrosslayerRejectsEthereum)
{
    const CliRun r = run_cli(common() + "--chain ethereum crosslayer infer");
    EXPECT_EQ(r.code, 1) << r.output;
}
