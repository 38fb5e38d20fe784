#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "json.hpp"
#include "support.hpp"

namespace {

struct Result {
    int code;
    std::string out;
};

// Runs the CLI with the given arguments, capturing stdout and stderr together.
Result run(const std::string& args, const std::string& env = {}) {
    testsupport::TempDir tmp("cli-out");
    const auto log = tmp.path / "out.txt";
    const std::string cmd = env + " " + PQCHAINLAB_BIN + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testsupport::slurp(log)};
}

std::size_t count_entries(const std::filesystem::path& p) {
    return nlohmann::json::parse(testsupport::slurp(p)).size();
}

}  // namespace

TEST(Cli, GenScenariosDefaultAndCampaign) {
    testsupport::TempDir wd("cli");
    const std::string w = "-C " + wd.path.string();
    ASSERT_EQ(run(w + " gen-scenarios").code, 0);
    EXPECT_EQ(count_entries(wd.path / "scenarios.json"), 17u);
    const auto first = testsupport::slurp(wd.path / "scenarios.json");
    ASSERT_EQ(run(w + " gen-scenarios").code, 0);
    EXPECT_EQ(testsupport::slurp(wd.path / "scenarios.json"), first);
    ASSERT_EQ(run(w + " gen-scenarios --campaign B -o " + (wd.path / "b.json").string()).code, 0);
    EXPECT_EQ(count_entries(wd.path / "b.json"), 6u);
}

TEST(Cli, WorkdirFromEnvironment) {
    testsupport::TempDir wd("cli-env");
    ASSERT_EQ(run("gen-scenarios --campaign D", "PQCHAINLAB_WORKDIR=" + wd.path.string()).code, 0);
    EXPECT_EQ(count_entries(wd.path / "scenarios.json"), 3u);
}

TEST(Cli, ProvisionBenchAnalyzePipeline) {
    testsupport::TempDir wd("cli-pipe");
    const std::string w = "-C " + wd.path.string();
    ASSERT_EQ(run(w + " gen-scenarios --campaign C -o " + (wd.path / "c.json").string()).code, 0);
    // Keep to the two all-ML-leaf rows of campaign C plus the baseline.
    auto all = nlohmann::json::parse(testsupport::slurp(wd.path / "c.json"));
    nlohmann::json keep = nlohmann::json::array();
    for (auto& s : all)
        if (s["leaf_family"] == "ml") keep.push_back(s);
    {
        std::ofstream(wd.path / "scenarios.json") << keep.dump(2);
    }
    const auto prov = run(w + " provision --seed 0a0b0c --issued-at 1767225600");
    ASSERT_EQ(prov.code, 0) << prov.out;
    const auto manifest = nlohmann::json::parse(testsupport::slurp(wd.path / "pki" / "manifest.json"));
    EXPECT_EQ(manifest["seed"], "0a0b0c");
    EXPECT_EQ(manifest["issued_at"], 1767225600);
    EXPECT_EQ(manifest["scenarios"].size(), 2u);
    EXPECT_TRUE(manifest.contains("host"));
    EXPECT_FALSE(std::filesystem::exists(wd.path / "pki" / "x25519mlkem768__ml_root__ml_leaf" / "int.cert"));

    const auto cert = testsupport::slurp(wd.path / "pki" / "x25519mlkem768__ml_root__ml_leaf" / "leaf.cert");
    ASSERT_EQ(run(w + " provision --seed 0a0b0c --issued-at 1767225600").code, 0);
    EXPECT_EQ(testsupport::slurp(wd.path / "pki" / "x25519mlkem768__ml_root__ml_leaf" / "leaf.cert"), cert);

    const auto bench = run(w + " bench --runs 50 --warmup 1");
    ASSERT_EQ(bench.code, 0) << bench.out;
    std::string line;
    std::ifstream jsonl(wd.path / "results" / "x25519mlkem768__ml_root__ml_leaf.jsonl");
    int n = 0;
    while (std::getline(jsonl, line)) ++n;
    EXPECT_EQ(n, 50);
    const auto rm = nlohmann::json::parse(testsupport::slurp(wd.path / "results" / "manifest.json"));
    EXPECT_EQ(rm["policy"], "mirror");
    EXPECT_EQ(rm["seed"], "0a0b0c");

    // The baseline is not among these rows.
    EXPECT_EQ(run(w + " analyze").code, 4);
    const auto ok = run(w + " analyze --baseline x25519mlkem768__ml_root__ml_leaf");
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_TRUE(std::filesystem::exists(wd.path / "report" / "capacity.csv"));
}

TEST(Cli, AnalyzeFixture) {
    testsupport::TempDir wd("cli-fx");
    const auto r = run("analyze --fixture paper -o " + wd.path.string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto corr = testsupport::slurp(wd.path / "correlations.csv");
    EXPECT_NE(corr.find("0.7493"), std::string::npos);
    for (const char* svg : {"latency_by_scenario.svg", "client_vs_server_cpu.svg", "infrastructure_multiplier.svg"})
        EXPECT_TRUE(std::filesystem::exists(wd.path / svg)) << svg;
}

TEST(Cli, ReportFixture) {
    testsupport::TempDir wd("cli-report");
    const auto r = run("report --fixture paper -o " + wd.path.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Cost regimes"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(wd.path / "summary.md"));
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("bench --policy sideways").code, 1);
    EXPECT_EQ(run("analyze --fixture paper --baseline no_such_row -o /tmp/pqchain-cli-nobase").code, 4);
    testsupport::TempDir wd("cli-codes");
    EXPECT_EQ(run("-C " + wd.path.string() + " provision").code, 1);  // no scenarios.json
    std::ofstream(wd.path / "scenarios.json") << "[{\"scenario_id\": 1}]";
    EXPECT_EQ(run("-C " + wd.path.string() + " provision --seed 00").code, 4);
    EXPECT_EQ(run("-C " + wd.path.string() + " analyze --config " + (wd.path / "scenarios.json").string() +
                  " --fixture paper")
                  .code,
              4);
}

TEST(Cli, ReproduceFixtureOnly) {
    const auto r = run("reproduce --fixture-only");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS 1 "), std::string::npos) << r.out;
}

TEST(Cli, ReproduceNamesFailingStage) {
    testsupport::TempDir wd("cli-fault");
    const auto r = run("-C " + wd.path.string() + " reproduce", "PQCHAINLAB_CRYPTO_FAULT=1");
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("provision:"), std::string::npos) << r.out;
}
