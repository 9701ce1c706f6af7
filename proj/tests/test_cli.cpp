#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(FMA_BINARY) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

using Table = std::vector<std::vector<std::string>>;

Table parse_tsv(const std::string& text) {
  Table rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    if (!line.empty() && line.back() == '\t') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fma_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help").code, 0);
  const Result r = run("decompose --help");
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--input", "--synth", "--span", "--step", "--window", "--terms", "--out"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(Cli, DecomposeF1) {
  const Result r = run("decompose --synth f1 --span 100 --window p1 --terms 5");
  ASSERT_EQ(r.code, 0);
  const Table t = parse_tsv(r.out);
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"index", "freq", "period", "amp_abs", "amp_phase",
                                            "residual_norm"}));
  // Leakage from the near-resonant term at -0.02 shifts the constant by ~1e-5.
  EXPECT_NEAR(std::stod(t[1][1]), 0.0, 3e-5);
  EXPECT_NEAR(std::stod(t[1][3]), 1.0, 1e-4);
  EXPECT_NEAR(std::stod(t[2][1]), 1.0, 1e-4);
  EXPECT_NEAR(std::stod(t[2][2]), 2.0 * M_PI, 1e-3);
}

TEST_F(Cli, DecomposePureTone) {
  const Result r = run("decompose --synth tone:0.4 --span 1000 --window p1");
  ASSERT_EQ(r.code, 0);
  const Table t = parse_tsv(r.out);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_NEAR(std::stod(t[1][1]), 0.4, 1e-12);
  EXPECT_NEAR(std::stod(t[1][2]), 2.0 * M_PI / 0.4, 1e-9);

  const Table constant = parse_tsv(run("decompose --synth tone:0 --span 10").out);
  ASSERT_EQ(constant.size(), 2u);
  EXPECT_EQ(constant[1][2], "");
}

TEST_F(Cli, DecomposeRejectsBadInput) {
  write("empty.csv", "");
  EXPECT_EQ(run("decompose --input " + path("empty.csv")).code, 2);
  std::string rows = "t,re,im\n";
  for (int j = 0; j < 30; ++j) rows += std::to_string(j == 12 ? 12.5 : j) + ",1,0\n";
  write("uneven.csv", rows);
  EXPECT_EQ(run("decompose --input " + path("uneven.csv")).code, 2);
  write("junk.csv", "t,re,im\n0,1,0\n1,x,0\n");
  EXPECT_EQ(run("decompose --input " + path("junk.csv")).code, 2);
  EXPECT_EQ(run("decompose --input " + path("missing.csv")).code, 4);
  EXPECT_EQ(run("decompose --synth f1 --span 10 --window hann").code, 2);
  EXPECT_EQ(run("decompose --synth f1").code, 2);
  EXPECT_EQ(run("decompose --synth f1 --span 10 --input " + path("empty.csv")).code, 2);
  EXPECT_EQ(run("decompose --synth tone:abc --span 10").code, 2);
  EXPECT_EQ(run("decompose --synth f1 --span 10 --terms 0").code, 2);
  EXPECT_EQ(run("decompose --synth f1 --span 10 --out /nonexistent/dir/x.tsv").code, 4);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, SynthGridLength) {
  const Result r = run("synth --model f1 --span 100 --step 0.0122718463");
  ASSERT_EQ(r.code, 0);
  const double t_half = 2.0 * M_PI * 100;
  const long rows = 2 * static_cast<long>(std::ceil(t_half / 0.0122718463)) + 1;
  const Table t = parse_tsv(r.out);
  EXPECT_EQ(static_cast<long>(t.size()), rows + 1);
  EXPECT_EQ(t[0][0], "t,re,im");
}

TEST_F(Cli, DealiasTableRow) {
  const Result r = run("dealias --synth tone:990.5pi --span 1000 --step 1 --step2 1.001 "
                       "--units angular-over-pi");
  ASSERT_EQ(r.code, 0);
  const Table t = parse_tsv(r.out);
  ASSERT_GE(t.size(), 2u);
  EXPECT_EQ(t[0][0], "nu0");
  EXPECT_NEAR(std::stod(t[1][0]), 990.5, 1e-9);
  EXPECT_NEAR(std::stod(t[1][1]), 0.5, 1e-9);
  EXPECT_EQ(t[1][3], "495");

  const Result cycles = run("dealias --synth tone:990.5pi --span 1000 --step 1 --step2 1.001");
  ASSERT_EQ(cycles.code, 0);
  EXPECT_NEAR(std::stod(parse_tsv(cycles.out)[1][0]), 495.25, 1e-9);
}

TEST_F(Cli, DealiasFromFiles) {
  ASSERT_EQ(run("synth --model tone:5.5pi --span 100 --step 1 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run("synth --model tone:5.5pi --span 100 --step 1.001 --out " + path("b.csv")).code, 0);
  const Result r = run("dealias --input-a " + path("a.csv") + " --input-b " + path("b.csv") +
                       " --units angular-over-pi --terms 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(std::stod(parse_tsv(r.out)[1][0]), 5.5, 1e-9);
  EXPECT_EQ(run("dealias --input-a " + path("b.csv") + " --input-b " + path("a.csv")).code, 2);
  EXPECT_EQ(run("dealias --input-a " + path("a.csv")).code, 2);
  EXPECT_EQ(run("dealias --synth tone:1 --span 10 --step 1 --step2 1").code, 2);
}

TEST_F(Cli, RoundtripThroughTerms) {
  const std::string model = "tone:0.5@1+tone:1.3@0.4,0.2+tone:-0.8@0.25";
  ASSERT_EQ(run("synth --model " + model + " --span 200 --step 0.5 --out " + path("s.csv")).code, 0);
  const Result first =
      run("decompose --input " + path("s.csv") + " --window p2 --terms 3 --out " + path("t.tsv"));
  ASSERT_EQ(first.code, 0);
  EXPECT_TRUE(fs::exists(path("t.tsv.json")));
  ASSERT_EQ(run("synth --from-terms " + path("t.tsv") + " --span 200 --step 0.5 --out " +
                path("r.csv")).code,
            0);
  const Result second = run("decompose --input " + path("r.csv") + " --window p2 --terms 3");
  ASSERT_EQ(second.code, 0);
  std::ifstream in(path("t.tsv"));
  std::stringstream text;
  text << in.rdbuf();
  const Table a = parse_tsv(text.str());
  const Table b = parse_tsv(second.out);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(std::stod(a[i][1]), std::stod(b[i][1]), 1e-10);
}

TEST_F(Cli, BenchTable2) {
  const Result r = run("bench table2");
  ASSERT_EQ(r.code, 0);
  const Table t = parse_tsv(r.out);
  ASSERT_EQ(t.size(), 21u);
  EXPECT_EQ(t[0][0], "nu0_over_pi");
  EXPECT_NEAR(std::stod(t[1][0]), 0.99, 1e-15);
  EXPECT_NEAR(std::stod(t[20][2]), 2.0, 1e-12);
}

TEST_F(Cli, BenchConvergence) {
  const std::string out = path("c.tsv");
  const Result r = run("bench convergence --model f1 --window p1 --correct t1 --correct-terms 5 "
                       "--span-lo 20 --span-hi 40 --points 5 --threads 2 --out " + out);
  ASSERT_EQ(r.code, 0);
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  const Table t = parse_tsv(text.str());
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t[0][2], "error");
  EXPECT_NEAR(std::stod(t[1][0]), 20.0, 1e-9);
  EXPECT_TRUE(fs::exists(out + ".json"));
  EXPECT_EQ(run("bench convergence --model f3").code, 2);
  EXPECT_EQ(run("bench convergence --window exp --correct t1 --points 5").code, 2);
}

TEST_F(Cli, BenchIsDeterministic) {
  const std::string args = "bench convergence --model f2 --window p0 --span-lo 20 --span-hi 30 --points 3";
  const Result a = run(args + " --threads 1");
  const Result b = run(args + " --threads 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
