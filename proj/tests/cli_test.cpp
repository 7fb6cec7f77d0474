// End-to-end tests of the command-line surface: exit codes, printed
// counts, emitted files, and flag/environment handling.

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct cli_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("arraylog_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    cli_result run(const std::string& args) {
        fs::path out_file = dir_ / "stdout.txt";
        fs::path err_file = dir_ / "stderr.txt";
        std::string cmd = std::string(ARRAYLOG_CLI_PATH) + " " + args + " >" +
                          out_file.string() + " 2>" + err_file.string();
        int status = std::system(cmd.c_str());
        cli_result r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out_file);
        r.err = slurp(err_file);
        return r;
    }

    fs::path out_dir() const { return dir_ / "out"; }

    static inline int counter_ = 0;
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ReachOnFiveNodePathPrintsTen) {
    auto facts = write("path5.tsv", "1\t2\n2\t3\n3\t4\n4\t5\n");
    auto r = run("run --program reach --facts Edge=" + facts.string() +
                 " --out " + out_dir().string());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out, "Reach 10\n");
}

TEST_F(CliTest, MissingFactsIsUsageError) {
    auto r = run("run --program reach --out " + out_dir().string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("Edge"), std::string::npos);
}

TEST_F(CliTest, UnknownEdbInFactsIsUsageError) {
    auto facts = write("e.tsv", "1 2\n");
    auto r = run("run --program reach --facts Nope=" + facts.string() +
                 " --facts Edge=" + facts.string() + " --out " +
                 out_dir().string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("Nope"), std::string::npos);
}

TEST_F(CliTest, TinyBudgetExitsTwoAndNamesPhase) {
    std::string big;
    for (int i = 0; i < 200; ++i)
        big += std::to_string(i) + "\t" + std::to_string(i + 1) + "\n";
    auto facts = write("chain.tsv", big);
    auto r = run("run --program reach --facts Edge=" + facts.string() +
                 " --out " + out_dir().string() + " --memory-budget 1024");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("memory budget exceeded"), std::string::npos);
    EXPECT_NE(r.err.find("phase"), std::string::npos);
}

TEST_F(CliTest, EmitFactsAndStatsWriteFiles) {
    auto facts = write("path3.tsv", "1 2\n2 3\n");
    auto r = run("run --program reach --facts Edge=" + facts.string() +
                 " --out " + out_dir().string() + " --emit-facts --stats");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(slurp(out_dir() / "Reach.tsv"), "1\t2\n1\t3\n2\t3\n");
    std::string stats = slurp(out_dir() / "stats.tsv");
    EXPECT_EQ(stats.rfind("phase\tseconds\n", 0), 0u);
    EXPECT_NE(stats.find("relation\tReach"), std::string::npos);
}

TEST_F(CliTest, CustomProgramFile) {
    auto prog = write("copy.dl",
                      ".decl E(2)\n"
                      "Out(y, x) :- E(x, y).\n");
    auto facts = write("e.tsv", "1 2\n3 4\n");
    auto r = run("run --program " + prog.string() + " --facts E=" +
                 facts.string() + " --out " + out_dir().string() +
                 " --emit-facts");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out, "Out 2\n");
    EXPECT_EQ(slurp(out_dir() / "Out.tsv"), "2\t1\n4\t3\n");
}

TEST_F(CliTest, ParseDiagnosticsAreReportedWithLocation) {
    auto prog = write("bad.dl", ".decl E(2)\nP(x) :- .\n");
    auto facts = write("e.tsv", "1 2\n");
    auto r = run("run --program " + prog.string() + " --facts E=" +
                 facts.string() + " --out " + out_dir().string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find(":2:"), std::string::npos);
}

TEST_F(CliTest, DictionaryModeKicksInForTokens) {
    auto facts = write("words.tsv", "alice bob\nbob carol\n");
    auto r = run("run --program reach --facts Edge=" + facts.string() +
                 " --out " + out_dir().string() + " --emit-facts");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out, "Reach 3\n");
    std::string decoded = slurp(out_dir() / "Reach.tsv");
    EXPECT_NE(decoded.find("alice\tbob\n"), std::string::npos);
    EXPECT_NE(decoded.find("alice\tcarol\n"), std::string::npos);
}

TEST_F(CliTest, EbmFlagPreservesOutputs) {
    std::string chain;
    for (int i = 1; i < 40; ++i)
        chain += std::to_string(i) + "\t" + std::to_string(i + 1) + "\n";
    auto facts = write("chain.tsv", chain);
    auto on = run("run --program reach --facts Edge=" + facts.string() +
                  " --out " + (dir_ / "on").string() +
                  " --ebm on --emit-facts");
    auto off = run("run --program reach --facts Edge=" + facts.string() +
                   " --out " + (dir_ / "off").string() +
                   " --ebm off --emit-facts");
    EXPECT_EQ(on.exit_code, 0);
    EXPECT_EQ(off.exit_code, 0);
    EXPECT_EQ(slurp(dir_ / "on" / "Reach.tsv"),
              slurp(dir_ / "off" / "Reach.tsv"));
}

TEST_F(CliTest, EnvironmentVariablesMirrorFlags) {
    auto facts = write("e.tsv", "1 2\n2 3\n");
    setenv("ENGINE_WORKERS", "2", 1);
    setenv("ENGINE_EBM", "off", 1);
    auto r = run("run --program reach --facts Edge=" + facts.string() +
                 " --out " + out_dir().string());
    unsetenv("ENGINE_WORKERS");
    unsetenv("ENGINE_EBM");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out, "Reach 3\n");

    setenv("ENGINE_LOAD_FACTOR", "1.5", 1);
    auto bad = run("run --program reach --facts Edge=" + facts.string() +
                   " --out " + out_dir().string());
    unsetenv("ENGINE_LOAD_FACTOR");
    EXPECT_EQ(bad.exit_code, 1);
}

TEST_F(CliTest, ByteIdenticalOutputsAcrossWorkerCounts) {
    std::string edges;
    for (int i = 0; i < 60; ++i)
        edges += std::to_string(i % 17) + "\t" + std::to_string((i * 7) % 17) +
                 "\n";
    auto facts = write("g.tsv", edges);
    std::string first;
    for (const char* workers : {"1", "2", "4"}) {
        auto out = dir_ / ("w" + std::string(workers));
        auto r = run("run --program reach --facts Edge=" + facts.string() +
                     " --out " + out.string() + " --workers " + workers +
                     " --emit-facts");
        EXPECT_EQ(r.exit_code, 0);
        std::string bytes = slurp(out / "Reach.tsv");
        if (first.empty())
            first = bytes;
        else
            EXPECT_EQ(bytes, first);
    }
}
