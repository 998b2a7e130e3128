#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "lqrt/cli.hpp"
#include "sampling.hpp"

namespace cli = lqrt::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::path(testing::TempDir()) / ("lqrt_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

std::string column(const std::vector<double>& x, const std::string& header = "") {
  std::ostringstream ss;
  ss.precision(17);
  if (!header.empty()) ss << header << "\n";
  for (double v : x) ss << v << "\n";
  return ss.str();
}

// Runs the built binary with the given argument string.
Result run_binary(const std::string& args, const std::string& stdin_file = "") {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  std::string cmd = std::string("'") + LQRT_CLI_PATH + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  if (!stdin_file.empty()) cmd += " < '" + stdin_file + "'";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

struct Files {
  fs::path a, b, shifted, pairs;
};

const Files& files() {
  static const Files f = [] {
    std::mt19937_64 gen(42);
    const auto a = testdata::normal(gen, 50);
    const auto b = testdata::normal(gen, 70);
    const auto s = testdata::normal(gen, 50, 1.0);
    std::ostringstream pairs;
    pairs.precision(17);
    pairs << "before,after\n";
    for (std::size_t i = 0; i < a.size(); ++i) pairs << a[i] << "," << s[i] << "\n";
    return Files{write_file("a.csv", column(a, "value")), write_file("b.csv", column(b)),
                 write_file("s.csv", column(s)), write_file("pairs.csv", pairs.str())};
  }();
  return f;
}

// --- input parsing

TEST(ReadSample, PlainAndHeader) {
  std::istringstream plain("1.0\n2.0\n3.0\n");
  EXPECT_EQ(cli::read_sample(plain), (std::vector<double>{1.0, 2.0, 3.0}));
  std::istringstream header("value\n1\n2\n");
  EXPECT_EQ(cli::read_sample(header), (std::vector<double>{1.0, 2.0}));
  std::istringstream blanks("\n  4.5 \n\n-2e-3\r\n");
  EXPECT_EQ(cli::read_sample(blanks), (std::vector<double>{4.5, -2e-3}));
}

TEST(ReadSample, ErrorsNameTheLine) {
  std::istringstream bad("1\nabc\n");
  try {
    cli::read_sample(bad, "data.csv");
    FAIL() << "expected an error";
  } catch (const cli::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("data.csv:2"), std::string::npos) << e.what();
  }
  std::istringstream empty("header\n\n");
  EXPECT_THROW(cli::read_sample(empty), cli::InputError);
  std::istringstream inf("1\ninf\n");
  EXPECT_THROW(cli::read_sample(inf), cli::InputError);
  std::istringstream two("1 2\n");
  EXPECT_THROW(cli::read_sample(two), cli::InputError);
  EXPECT_THROW(cli::read_sample(std::string("/nonexistent/file.csv")), cli::InputError);
}

TEST(ReadTwoColumns, Separators) {
  std::istringstream in("x,y\n1,2\n3;4\n5 6\n");
  const auto [a, b] = cli::read_two_columns(in);
  EXPECT_EQ(a, (std::vector<double>{1, 3, 5}));
  EXPECT_EQ(b, (std::vector<double>{2, 4, 6}));
}

// --- argument parsing

cli::ParseOutcome parse(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::parse_args(args, out, err);
}

TEST(ParseArgs, Defaults) {
  const auto r = parse({"onesample", "data.csv", "--mu0", "0"});
  ASSERT_TRUE(r.config);
  const auto& c = *r.config;
  EXPECT_EQ(c.subcommand, cli::Subcommand::onesample);
  EXPECT_EQ(c.inputs, (std::vector<std::string>{"data.csv"}));
  EXPECT_EQ(c.mu0, 0.0);
  EXPECT_FALSE(c.q);
  EXPECT_EQ(c.effective_bootstrap(), 100);
  EXPECT_TRUE(c.equal_var);
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_FALSE(c.seed);
  EXPECT_EQ(c.format, cli::Format::json);
}

TEST(ParseArgs, DirectMapping) {
  const auto r = parse({"unpaired", "a.csv", "b.csv", "--no-equal-var", "--q", "0.7", "--bootstrap", "1000", "--seed",
                        "314"});
  ASSERT_TRUE(r.config);
  const auto& c = *r.config;
  EXPECT_EQ(c.subcommand, cli::Subcommand::unpaired);
  EXPECT_EQ(c.inputs, (std::vector<std::string>{"a.csv", "b.csv"}));
  EXPECT_FALSE(c.equal_var);
  EXPECT_EQ(c.q, 0.7);
  EXPECT_EQ(c.effective_bootstrap(), 1000);
  EXPECT_EQ(c.seed, 314u);
}

TEST(ParseArgs, NegativeMuAndSimulateLists) {
  auto r = parse({"onesample", "x.csv", "--mu0", "-1.25", "--format", "csv", "--alpha", "0.1"});
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->mu0, -1.25);
  EXPECT_EQ(r.config->format, cli::Format::csv);
  EXPECT_EQ(r.config->alpha, 0.1);

  r = parse({"simulate", "--scenario", "one_sample,paired", "--tests", "lqrt,ttest", "--eps", "0,0.2", "--reps", "3",
             "--hypothesis", "null"});
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->scenarios, (std::vector<std::string>{"one_sample", "paired"}));
  EXPECT_EQ(r.config->tests, (std::vector<std::string>{"lqrt", "ttest"}));
  EXPECT_EQ(r.config->eps, (std::vector<double>{0.0, 0.2}));
  EXPECT_EQ(r.config->reps, 3);
  EXPECT_EQ(r.config->hypothesis, lqrt::gem::Hypothesis::null_hypothesis);
  EXPECT_EQ(r.config->effective_bootstrap(), 200);
}

TEST(ParseArgs, Rejections) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"onesample", "x.csv", "--q", "1.5"},
           {"onesample", "x.csv", "--q", "0"},
           {"onesample", "x.csv", "--bootstrap", "0"},
           {"onesample", "x.csv", "--alpha", "1"},
           {"onesample", "x.csv", "--format", "xml"},
           {"onesample", "x.csv", "--frobnicate"},
           {"onesample"},
           {"unpaired", "a.csv"},
           {"paired", "a.csv"},
           {"paired", "a.csv", "b.csv", "--paired-columns"},
           {"simulate", "--eps", "0.7"},
           {"simulate", "--tests", "huber"},
           {"simulate", "--scenario", "three_sample"},
           {},
       }) {
    const auto r = parse(args);
    EXPECT_FALSE(r.config);
    EXPECT_EQ(r.exit_code, 2);
  }
}

TEST(ParseArgs, HelpExitsZero) {
  std::ostringstream out, err;
  const auto r = cli::parse_args(std::vector<std::string>{"--help"}, out, err);
  EXPECT_FALSE(r.config);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(out.str().find("onesample"), std::string::npos);
}

// --- output formatting

TEST(Format, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 2.220446049250313e-16, -123456.789, 1e300}) {
    EXPECT_EQ(std::stod(cli::format_number(v)), v);
  }
  EXPECT_EQ(cli::format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(cli::json_number(INFINITY), "null");
}

// --- end to end through the binary

TEST(Binary, OneSampleJson) {
  const auto r = run_binary("onesample '" + files().a.string() + "' --mu0 0 --seed 7");
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* key : {"\"statistic\": ", "\"pvalue\": ", "\"q\": ", "\"bootstrap\": 100", "\"degenerate_fraction\": ",
                          "\"seed\": 7"}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key << " in " << r.out;
  }
  const auto pos = r.out.find("\"pvalue\": ");
  const double p = std::stod(r.out.substr(pos + 10));
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

TEST(Binary, ByteIdenticalSeededRuns) {
  const std::string args = "unpaired '" + files().a.string() + "' '" + files().b.string() + "' --seed 7 --bootstrap 150";
  const auto first = run_binary(args);
  const auto second = run_binary(args);
  const auto threaded = run_binary(args + " --threads 4");
  ASSERT_EQ(first.status, 0) << first.err;
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(first.out, threaded.out);
}

TEST(Binary, PairedForms) {
  const auto two_files = run_binary("paired '" + files().a.string() + "' '" + files().shifted.string() + "' --seed 3");
  const auto columns = run_binary("paired --paired-columns '" + files().pairs.string() + "' --seed 3");
  ASSERT_EQ(two_files.status, 0) << two_files.err;
  ASSERT_EQ(columns.status, 0) << columns.err;
  EXPECT_EQ(two_files.out, columns.out);
  EXPECT_NE(two_files.out.find("\"pvalue\": 0,"), std::string::npos) << two_files.out;
}

TEST(Binary, CsvAndStdin) {
  const auto r = run_binary("onesample - --seed 5 --q 0.8 --format csv", files().a.string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "test,n,mu0,statistic,pvalue,q,q_selected,bootstrap,degenerate_fraction,reject,alpha,seed");
  EXPECT_NE(r.out.find(",0.80000000000000004,false,100,"), std::string::npos) << r.out;
}

TEST(Binary, SelectQ) {
  const auto r = run_binary("selectq '" + files().a.string() + "' --format csv");
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0, selected = 0;
  std::getline(lines, line);
  EXPECT_EQ(line, "q,objective,selected");
  while (std::getline(lines, line)) {
    ++rows;
    selected += line.ends_with(",true");
  }
  EXPECT_EQ(rows, 51);
  EXPECT_EQ(selected, 1);
}

TEST(Binary, SimulateSingleRep) {
  const auto r = run_binary("simulate --scenario one_sample,unpaired_equal_var --eps 0,0.1,0.3 --reps 1 --bootstrap 20 "
                            "--seed 11");
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "scenario,test,epsilon,rate,ci_low,ci_high,reps,alpha,seed");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 9u) << line;
    EXPECT_TRUE(f[3] == "0" || f[3] == "1") << line;
    EXPECT_EQ(f[6], "1");
    EXPECT_EQ(f[8], "11");
  }
  // (4 tests + 3 tests) x 3 contamination levels
  EXPECT_EQ(rows, 21);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_binary("onesample '" + files().a.string() + "' --q 1.5").status, 2);
  EXPECT_EQ(run_binary("onesample '" + files().a.string() + "' --bogus").status, 2);
  EXPECT_EQ(run_binary("--help").status, 0);

  const auto missing = run_binary("onesample /nonexistent/x.csv --seed 1");
  EXPECT_EQ(missing.status, 1);
  EXPECT_TRUE(missing.out.empty());
  EXPECT_NE(missing.err.find("cannot open"), std::string::npos);

  const auto bad = write_file("bad.csv", "1\n2\nxyz\n");
  const auto parse_error = run_binary("onesample '" + bad.string() + "' --seed 1");
  EXPECT_EQ(parse_error.status, 1);
  EXPECT_NE(parse_error.err.find(":3:"), std::string::npos) << parse_error.err;

  const auto tiny = write_file("tiny.csv", "1\n2\n");
  EXPECT_EQ(run_binary("onesample '" + tiny.string() + "' --seed 1").status, 1);

  const auto uneven = run_binary("paired '" + files().a.string() + "' '" + files().b.string() + "' --seed 1");
  EXPECT_EQ(uneven.status, 1);

  EXPECT_EQ(run_binary("simulate --scenario one_sample --tests ranksum --reps 1").status, 1);
}

}  // namespace
