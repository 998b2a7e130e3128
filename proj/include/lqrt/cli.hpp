#pragma once

// Command-line front end: argument parsing, sample ingestion, dispatch and
// report rendering. Kept in a header so tests can drive it in-process.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "lqrt/lqrt.hpp"

namespace lqrt::cli {

enum class Subcommand { onesample, paired, unpaired, selectq, simulate };
enum class Format { json, csv };

inline constexpr int kDefaultTestBootstrap = 100;
inline constexpr int kDefaultSimulationBootstrap = 200;

struct RunConfig {
  Subcommand subcommand = Subcommand::onesample;
  std::vector<std::string> inputs;
  double mu0 = 0.0;
  std::optional<double> q;  // empty: auto
  std::optional<int> bootstrap;
  bool equal_var = true;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  Format format = Format::json;
  unsigned threads = 1;
  bool paired_columns = false;

  // simulate
  std::vector<std::string> scenarios;  // empty: all four
  std::vector<std::string> tests;      // empty: every test of each scenario
  std::vector<double> eps;             // empty: default grid
  int reps = 500;
  gem::Hypothesis hypothesis = gem::Hypothesis::alternative;

  [[nodiscard]] int effective_bootstrap() const {
    if (bootstrap) return *bootstrap;
    return subcommand == Subcommand::simulate ? kDefaultSimulationBootstrap : kDefaultTestBootstrap;
  }
};

/// Malformed input data (bad number, empty file, unreadable path).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Input

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t' || line[i] == ';')) ++i;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ',' || line[i] == ' ' || line[i] == '\t' || line[i] == ';')) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

/// Reads rows of `width` numeric fields; the first non-empty line may be a
/// header when its first token is not numeric.
inline std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t width,
                                                  const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_fields(body);
    if (first_content) {
      first_content = false;
      if (!fields.empty() && !parse_double(fields.front())) continue;
    }
    if (fields.size() != width) {
      throw InputError(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " value(s), found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (auto f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        throw InputError(name + ":" + std::to_string(line_no) + ": not a number: '" + std::string(f) + "'");
      }
      if (!std::isfinite(*v)) {
        throw InputError(name + ":" + std::to_string(line_no) + ": value is not finite");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(name + ": no observations");
  return rows;
}

template <class Fn>
auto with_input(const std::string& path, Fn fn) {
  if (path == "-") return fn(std::cin, std::string("<stdin>"));
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return fn(in, path);
}

}  // namespace detail

/// One value per line; an optional header line; blank lines ignored.
inline std::vector<double> read_sample(std::istream& in, const std::string& name = "<input>") {
  std::vector<double> out;
  for (auto& row : detail::read_rows(in, 1, name)) out.push_back(row.front());
  return out;
}

/// Path or "-" for standard input.
inline std::vector<double> read_sample(const std::string& path) {
  return detail::with_input(path, [](std::istream& in, const std::string& name) { return read_sample(in, name); });
}

/// Two columns per line (comma, semicolon or whitespace separated).
inline std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::istream& in,
                                                                             const std::string& name = "<input>") {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (auto& row : detail::read_rows(in, 2, name)) {
    out.first.push_back(row[0]);
    out.second.push_back(row[1]);
  }
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> read_two_columns(const std::string& path) {
  return detail::with_input(path, [](std::istream& in, const std::string& name) { return read_two_columns(in, name); });
}

// ---------------------------------------------------------------------------
// Argument parsing

struct ParseOutcome {
  std::optional<RunConfig> config;  // empty when parsing ended the run
  int exit_code = 0;
};

inline ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out = std::cout,
                               std::ostream& err = std::cerr) {
  CLI::App app{"Robust Lq-likelihood-ratio-type tests for normal means", "lqrt"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string q_text = "auto";
  std::string format_text = "json";
  std::string hypothesis_text = "alternative";
  std::uint64_t seed_value = 0;

  auto check_q = [](const std::string& s) -> std::string {
    if (s == "auto") return {};
    const auto v = detail::parse_double(s);
    if (!v || !(*v > 0.0 && *v <= 1.0)) return "q must be 'auto' or a number in (0, 1]";
    return {};
  };
  auto check_alpha = [](const std::string& s) -> std::string {
    const auto v = detail::parse_double(s);
    if (!v || !(*v > 0.0 && *v < 1.0)) return "alpha must lie strictly between 0 and 1";
    return {};
  };

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--bootstrap", cfg.bootstrap, "Bootstrap resamples")->check(CLI::Range(1, 100000000));
    sub->add_option("--seed", seed_value, "Random seed (default: nondeterministic)");
    sub->add_option("--threads", cfg.threads, "Worker threads, 0 = all hardware threads");
  };
  auto add_test_options = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--q", q_text, "Lq parameter in (0, 1] or 'auto'")->check(check_q);
    sub->add_option("--alpha", cfg.alpha, "Significance level")->check(check_alpha);
    sub->add_option("--format", format_text, "Output format")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* onesample = app.add_subcommand("onesample", "One-sample test of the mean");
  onesample->add_option("input", cfg.inputs, "Sample file ('-' for stdin)")->required()->expected(1);
  onesample->add_option("--mu0", cfg.mu0, "Mean under the null hypothesis");
  add_test_options(onesample);

  auto* paired = app.add_subcommand("paired", "Paired two-sample test of equal means");
  paired->add_option("inputs", cfg.inputs, "Two sample files, or one two-column file with --paired-columns")
      ->required()
      ->expected(1, 2);
  paired->add_flag("--paired-columns", cfg.paired_columns, "Read both samples from one two-column file");
  add_test_options(paired);

  auto* unpaired = app.add_subcommand("unpaired", "Unpaired two-sample test of equal means");
  unpaired->add_option("inputs", cfg.inputs, "Two sample files")->required()->expected(2);
  unpaired->add_flag("--equal-var,!--no-equal-var", cfg.equal_var, "Assume a shared variance (default)");
  add_test_options(unpaired);

  auto* selectq = app.add_subcommand("selectq", "Report the adaptive choice of q");
  selectq->add_option("inputs", cfg.inputs, "One or two sample files")->required()->expected(1, 2);
  selectq->add_flag("--equal-var,!--no-equal-var", cfg.equal_var, "Variance assumption (two samples)");
  selectq->add_option("--format", format_text, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* simulate = app.add_subcommand("simulate", "Gross-error-model size/power simulation (CSV)");
  simulate->add_option("--scenario", cfg.scenarios, "one_sample, paired, unpaired_equal_var, unpaired_unequal_var")
      ->delimiter(',')
      ->check(CLI::IsMember({"one_sample", "paired", "unpaired_equal_var", "unpaired_unequal_var"}));
  simulate->add_option("--tests", cfg.tests, "lqrt, ttest, wilcoxon, sign, ranksum")
      ->delimiter(',')
      ->check(CLI::IsMember({"lqrt", "ttest", "wilcoxon", "sign", "ranksum"}));
  simulate->add_option("--eps", cfg.eps, "Contamination levels")->delimiter(',')->check(CLI::Range(0.0, 0.4999999999));
  simulate->add_option("--reps", cfg.reps, "Monte Carlo repetitions")->check(CLI::Range(1, 100000000));
  simulate->add_option("--alpha", cfg.alpha, "Significance level")->check(check_alpha);
  simulate->add_option("--hypothesis", hypothesis_text, "Generate data under 'null' or 'alternative'")
      ->check(CLI::IsMember({"null", "alternative"}));
  add_common(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return {std::nullopt, 0};
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return {std::nullopt, 2};
  }

  const auto bad_usage = [&](const std::string& msg) {
    err << "error: " << msg << "\n\n" << app.help();
    return ParseOutcome{std::nullopt, 2};
  };

  if (*onesample) cfg.subcommand = Subcommand::onesample;
  if (*paired) cfg.subcommand = Subcommand::paired;
  if (*unpaired) cfg.subcommand = Subcommand::unpaired;
  if (*selectq) cfg.subcommand = Subcommand::selectq;
  if (*simulate) cfg.subcommand = Subcommand::simulate;

  if (cfg.subcommand == Subcommand::paired) {
    if (cfg.paired_columns && cfg.inputs.size() != 1) return bad_usage("--paired-columns takes exactly one file");
    if (!cfg.paired_columns && cfg.inputs.size() != 2) return bad_usage("paired needs two files or --paired-columns");
  }
  if (q_text != "auto") cfg.q = detail::parse_double(q_text);
  cfg.format = format_text == "csv" ? Format::csv : Format::json;
  cfg.hypothesis = hypothesis_text == "null" ? gem::Hypothesis::null_hypothesis : gem::Hypothesis::alternative;
  for (CLI::App* sub : {onesample, paired, unpaired, simulate}) {
    if (*sub && sub->count("--seed") > 0) cfg.seed = seed_value;
  }
  return {std::move(cfg), 0};
}

inline ParseOutcome parse_args(const std::vector<std::string>& args, std::ostream& out = std::cout,
                               std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"lqrt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data(), out, err);
}

// ---------------------------------------------------------------------------
// Output

/// 17 significant digits; round-trips every double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

inline std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

/// Flat key/value report rendered either as one JSON object or as a CSV
/// header plus one row.
class Report {
 public:
  Report& add(std::string key, std::string json_value, std::string csv_value) {
    fields_.push_back({std::move(key), std::move(json_value), std::move(csv_value)});
    return *this;
  }
  Report& number(std::string key, double v) { return add(std::move(key), json_number(v), format_number(v)); }
  Report& integer(std::string key, std::uint64_t v) {
    return add(std::move(key), std::to_string(v), std::to_string(v));
  }
  Report& text(std::string key, std::string_view v) { return add(std::move(key), json_string(v), std::string(v)); }
  Report& boolean(std::string key, bool v) {
    return add(std::move(key), v ? "true" : "false", v ? "true" : "false");
  }

  void write(std::ostream& out, Format format) const {
    if (format == Format::json) {
      out << "{";
      for (std::size_t i = 0; i < fields_.size(); ++i) {
        out << (i ? ", " : "") << json_string(fields_[i].key) << ": " << fields_[i].json;
      }
      out << "}\n";
      return;
    }
    for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? "," : "") << fields_[i].key;
    out << "\n";
    for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? "," : "") << fields_[i].csv;
    out << "\n";
  }

 private:
  struct Field {
    std::string key;
    std::string json;
    std::string csv;
  };
  std::vector<Field> fields_;
};

inline constexpr std::string_view kSimulationHeader = "scenario,test,epsilon,rate,ci_low,ci_high,reps,alpha,seed";

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline TestOptions test_options(const RunConfig& cfg) {
  TestOptions opts;
  opts.q = cfg.q;
  opts.bootstrap = cfg.effective_bootstrap();
  opts.seed = lqrt::detail::resolve_seed(cfg.seed);
  opts.exec.threads = cfg.threads;
  return opts;
}

inline void write_outcome(std::ostream& out, const RunConfig& cfg, std::string_view test, const TestOutcome& r,
                          const std::vector<std::size_t>& sizes, std::optional<bool> equal_var) {
  Report rep;
  rep.text("test", test);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    rep.integer(sizes.size() == 1 ? "n" : "n" + std::to_string(i + 1), sizes[i]);
  }
  if (cfg.subcommand == Subcommand::onesample) rep.number("mu0", cfg.mu0);
  if (equal_var) rep.boolean("equal_var", *equal_var);
  rep.number("statistic", r.statistic)
      .number("pvalue", r.pvalue)
      .number("q", r.q_used.value())
      .boolean("q_selected", r.q_selected)
      .integer("bootstrap", static_cast<std::uint64_t>(r.bootstrap_count))
      .number("degenerate_fraction", r.degenerate_fraction)
      .boolean("reject", r.pvalue <= cfg.alpha)
      .number("alpha", cfg.alpha)
      .integer("seed", r.seed);
  rep.write(out, cfg.format);
}

inline void write_selection(std::ostream& out, Format format, const QSelectionReport& r) {
  if (format == Format::csv) {
    out << "q,objective,selected\n";
    for (const auto& g : r.grid) {
      out << format_number(g.q) << "," << format_number(g.objective) << ","
          << (g.q == r.q_hat.value() ? "true" : "false") << "\n";
    }
    return;
  }
  out << "{\"q_hat\": " << json_number(r.q_hat.value()) << ", \"grid\": [";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    out << (i ? ", " : "") << "{\"q\": " << json_number(r.grid[i].q)
        << ", \"objective\": " << json_number(r.grid[i].objective) << "}";
  }
  out << "]}\n";
}

inline void run_simulation(std::ostream& out, const RunConfig& cfg) {
  std::vector<gem::Setup> setups;
  if (cfg.scenarios.empty()) {
    for (const auto& s : gem::builtin_scenarios()) setups.push_back(s.setup);
  } else {
    for (const auto& name : cfg.scenarios) setups.push_back(gem::parse_setup(name));
  }
  gem::RunOptions opts;
  opts.reps = cfg.reps;
  opts.alpha = cfg.alpha;
  opts.bootstrap = cfg.effective_bootstrap();
  opts.seed = lqrt::detail::resolve_seed(cfg.seed);
  opts.hypothesis = cfg.hypothesis;
  opts.exec.threads = cfg.threads;
  const std::vector<double> eps = cfg.eps.empty() ? gem::default_eps_grid() : cfg.eps;

  // Validate the whole request before spending time on any of it.
  std::vector<std::pair<gem::Setup, std::vector<gem::TestId>>> plan;
  for (gem::Setup setup : setups) {
    std::vector<gem::TestId> tests;
    if (cfg.tests.empty()) {
      tests = gem::tests_for(setup);
    } else {
      for (const auto& name : cfg.tests) tests.push_back(gem::parse_test(name));
    }
    const auto valid = gem::tests_for(setup);
    for (gem::TestId t : tests) {
      if (std::find(valid.begin(), valid.end(), t) == valid.end()) {
        throw ConfigError("test '" + std::string(gem::test_name(t)) + "' does not apply to scenario '" +
                          std::string(gem::setup_name(setup)) + "'");
      }
    }
    plan.emplace_back(setup, std::move(tests));
  }

  out << kSimulationHeader << "\n";
  for (const auto& [setup, tests] : plan) {
    const gem::ScenarioSpec& sc = gem::builtin_scenario(setup);
    for (gem::TestId t : tests) {
      for (const auto& est : gem::run_scenario(sc, t, eps, opts)) {
        out << sc.name() << "," << est.test_name << "," << format_number(est.epsilon) << ","
            << format_number(est.rejection_rate) << "," << format_number(est.ci_low) << ","
            << format_number(est.ci_high) << "," << est.repetitions << "," << format_number(est.alpha) << ","
            << est.seed << "\n";
      }
    }
  }
}

}  // namespace detail

/// Executes a parsed configuration. Returns 0 on success and 1 on input or
/// domain errors (reported on err).
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    // Render into a buffer so a failure never leaves a partial report behind.
    std::ostringstream buf;
    switch (cfg.subcommand) {
      case Subcommand::onesample: {
        const auto x = read_sample(cfg.inputs.at(0));
        const auto r = lqrtest_1samp(x, cfg.mu0, detail::test_options(cfg));
        detail::write_outcome(buf, cfg, "onesample", r, {x.size()}, std::nullopt);
        break;
      }
      case Subcommand::paired: {
        std::vector<double> a;
        std::vector<double> b;
        if (cfg.paired_columns) {
          std::tie(a, b) = read_two_columns(cfg.inputs.at(0));
        } else {
          a = read_sample(cfg.inputs.at(0));
          b = read_sample(cfg.inputs.at(1));
        }
        const auto r = lqrtest_rel(a, b, detail::test_options(cfg));
        detail::write_outcome(buf, cfg, "paired", r, {a.size()}, std::nullopt);
        break;
      }
      case Subcommand::unpaired: {
        const auto a = read_sample(cfg.inputs.at(0));
        const auto b = read_sample(cfg.inputs.at(1));
        const auto r = lqrtest_ind(a, b, cfg.equal_var, detail::test_options(cfg));
        detail::write_outcome(buf, cfg, "unpaired", r, {a.size(), b.size()}, cfg.equal_var);
        break;
      }
      case Subcommand::selectq: {
        const auto a = read_sample(cfg.inputs.at(0));
        if (cfg.inputs.size() == 1) {
          detail::write_selection(buf, cfg.format, select_q_1samp(a));
        } else {
          const auto b = read_sample(cfg.inputs.at(1));
          detail::write_selection(buf, cfg.format, select_q_ind(a, b, cfg.equal_var));
        }
        break;
      }
      case Subcommand::simulate:
        detail::run_simulation(buf, cfg);
        break;
    }
    out << buf.str();
    out.flush();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int main(int argc, const char* const* argv) {
  const ParseOutcome parsed = parse_args(argc, argv);
  if (!parsed.config) return parsed.exit_code;
  return run(*parsed.config);
}

}  // namespace lqrt::cli
