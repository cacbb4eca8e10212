// limits-sd: validate models, run and compare scenarios, calibrate the AI
// pathway. Exit codes: 0 ok, 1 validation failure, 2 runtime or usage error,
// 3 calibration tolerance not met.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "limits_sd/calibration.hpp"
#include "limits_sd/report.hpp"

namespace fs = std::filesystem;
using namespace limits_sd;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kTolerance = 3 };

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

struct Corpus {
  ModelSpec spec;
  std::string source;  // "embedded" or a path
  std::uint64_t checksum = 0;
};

// --seed-corpus wins over LIMITS_SD_CORPUS, which wins over the embedded
// corpus. A file next to the corpus named <file>.fnv1a64 is checked if present.
Corpus load_corpus(const std::string& seed) {
  std::string path = seed;
  if (path.empty()) {
    if (const char* env = std::getenv("LIMITS_SD_CORPUS"); env && *env) path = env;
  }
  if (path.empty()) return {load_world3_corpus(), "embedded", world3_corpus_checksum()};
  const std::string text = read_file(path);
  const fs::path sum = path + ".fnv1a64";
  if (fs::exists(sum)) {
    std::istringstream in(read_file(sum));
    std::string hex;
    in >> hex;
    return {load_corpus_text(text, std::stoull(hex, nullptr, 16)), path, fnv1a64(text)};
  }
  return {parse_model_text(text), path, fnv1a64(text)};
}

struct Global {
  std::string out = ".";
  bool quiet = false;
  std::string seed_corpus;
};

struct RunOptions {
  double from = 1900, to = 2100, dt = 0.5;
};

SimConfig make_config(const RunOptions& o) {
  SimConfig c;
  c.t_start = o.from;
  c.t_end = o.to;
  c.dt = o.dt;
  return c;
}

nlohmann::ordered_json manifest_base(const std::string& command, const Corpus& corpus, const Global& g) {
  nlohmann::ordered_json m;
  m["tool"] = "limits-sd";
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["corpus"] = {{"source", corpus.source}, {"fnv1a64", checksum_hex(corpus.checksum)}};
  m["preset"] = {{"name", std::string(kDefaultPresetName)},
                 {"fnv1a64", checksum_hex(fnv1a64(embedded::ai_params_preset))}};
  m["seed_corpus"] = g.seed_corpus;
  return m;
}

void finish(nlohmann::ordered_json m, const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& [name, text] : files) {
    write_file(dir / name, text);
    list.push_back({{"file", name}, {"fnv1a64", checksum_hex(fnv1a64(text))}});
  }
  m["outputs"] = list;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

nlohmann::ordered_json config_json(const SimConfig& c) {
  return {{"from", c.t_start}, {"to", c.t_end}, {"dt", c.dt}};
}

// ---- commands ---------------------------------------------------------------

int cmd_validate(const std::string& path, const Global& g) {
  const std::string text = read_file(path);
  try {
    ModelSpec spec = parse_model_text(text);
    if (!g.quiet) std::cout << path << ": ok, " << spec.size() << " elements\n";
    return kOk;
  } catch (const AlgebraicLoop& e) {
    std::cerr << path << ": " << e.what() << "\n";
    std::string cycle;
    for (const auto& n : e.cycle()) cycle += n + " -> ";
    if (!e.cycle().empty()) cycle += e.cycle().front();
    std::cerr << path << ": cycle: " << cycle << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kValidation;
  }
}

int cmd_run(const std::string& name, const RunOptions& ro, const Global& g) {
  const Corpus corpus = load_corpus(g.seed_corpus);
  const Scenario& s = default_registry().find(name);
  const SimConfig cfg = make_config(ro);
  const RunResult r = run_scenario(s, cfg, corpus.spec);
  auto m = manifest_base("run " + name, corpus, g);
  m["config"] = config_json(cfg);
  finish(m, g.out, {{name + ".csv", run_csv(r)}, {name + ".warnings.log", warnings_log(r.warnings)}});
  if (!g.quiet) {
    std::cout << "wrote " << (fs::path(g.out) / (name + ".csv")).string() << " (" << r.times.size() << " rows, "
              << r.series.size() << " variables, " << r.warnings.size() << " warnings)\n";
  }
  return kOk;
}

std::vector<double> parse_years(const std::string& text) {
  std::vector<double> years;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_number(item);
    if (!v) throw InvalidConfig("bad year '" + item + "'");
    years.push_back(*v);
  }
  if (years.empty()) throw InvalidConfig("--years is empty");
  return years;
}

std::optional<YearWindow> parse_window(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  auto a = parse_number(text.substr(0, colon));
  auto b = colon == std::string::npos ? std::nullopt : parse_number(text.substr(colon + 1));
  if (!a || !b) throw InvalidConfig("--window must look like 2020:2070");
  return YearWindow{*a, *b};
}

int cmd_compare(const std::string& base_name, const std::string& other_name, std::vector<std::string> vars,
                const std::string& years_text, const std::string& window_text, const RunOptions& ro, const Global& g) {
  const Corpus corpus = load_corpus(g.seed_corpus);
  const SimConfig cfg = make_config(ro);
  const RunResult base = run_scenario(default_registry().find(base_name), cfg, corpus.spec);
  const RunResult other = run_scenario(default_registry().find(other_name), cfg, corpus.spec);
  if (vars.empty()) vars = {world3::kPersistentPollution, world3::kHumanEcologicalFootprint};
  const std::vector<double> years = years_text.empty() ? kBenchmarkYears : parse_years(years_text);
  const auto window = parse_window(window_text);

  std::string csv = comparison_csv_header();
  std::string summary;
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& v : vars) {
    const ComparisonReport rep = compare_runs(base, other, v, years, window);
    csv += comparison_csv_rows(rep);
    summary += comparison_summary(rep) + "\n";
    files.emplace_back(v + ".svg", svg_line_chart(v, base.times, {{base_name, base.at(v)}, {other_name, other.at(v)}}));
  }
  const std::string stem = base_name + "_vs_" + other_name;
  files.emplace_back(stem + ".csv", csv);
  files.emplace_back(stem + ".summary.txt", summary);
  std::vector<Warning> warnings = base.warnings;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  files.emplace_back(stem + ".warnings.log", warnings_log(warnings));

  auto m = manifest_base("compare " + base_name + " " + other_name, corpus, g);
  m["config"] = config_json(cfg);
  m["variables"] = vars;
  m["years"] = years;
  m["window"] = window_text;
  finish(m, g.out, files);
  if (!g.quiet) std::cout << summary;
  return kOk;
}

int cmd_calibrate(const std::string& targets_path, const std::string& bounds_path, std::size_t budget, double tol,
                  const Global& g) {
  const Corpus corpus = load_corpus(g.seed_corpus);
  const CalibrationTarget target =
      targets_path.empty() ? published_pollution_target() : parse_targets(read_file(targets_path));
  const ParamBounds bounds = bounds_path.empty() ? default_bounds() : parse_bounds(read_file(bounds_path));
  const CalibrationProblem problem(target, corpus.spec);
  const CalibrationResult r = calibrate_ai_params(problem, bounds, budget);

  bool within = true;
  for (const auto& res : r.residuals) within = within && res && std::abs(*res) <= tol;

  std::string report = format_calibration_report(r, target, tol);
  std::string validation;
  try {
    // Footprint deltas are reported for validation only; they are never fitted.
    const CalibrationProblem hef(published_footprint_target(), corpus.spec);
    const auto achieved = hef.achieved(r.params);
    const CalibrationTarget& ht = hef.target();
    bool close = true, positive = true;
    validation += "\nfootprint validation (not fitted), tolerance 3 pp\nyear,published_pct,achieved_pct\n";
    for (std::size_t i = 0; i < achieved.size(); ++i) {
      validation += format_number(ht.years[i]) + "," + format_number(ht.target_pct[i]) + "," +
                    (achieved[i] ? format_number(*achieved[i]) : "undefined") + "\n";
      close = close && achieved[i] && std::abs(*achieved[i] - ht.target_pct[i]) <= 3.0;
      positive = positive && achieved[i] && *achieved[i] > 0.0;
    }
    const bool last_max = !achieved.empty() && achieved.back() &&
                          std::all_of(achieved.begin(), achieved.end(), [&](const auto& a) {
                            return a && *a <= *achieved.back();
                          });
    validation += close ? "footprint deltas within 3 pp\n"
                        : std::string("FLAG: footprint deltas not within 3 pp; sign and ordering check: ") +
                              (positive && last_max ? "pass" : "fail") + "\n";
  } catch (const Error& e) {
    validation = std::string("\nfootprint validation unavailable: ") + e.what() + "\n";
  }
  report += validation;

  std::vector<std::string> notes{"Calibrated AI pathway parameters.",
                                 "Model checksum (fnv1a64 of canonical text): " + checksum_hex(r.corpus_checksum),
                                 "Budget " + std::to_string(budget) + ", evaluations " + std::to_string(r.evaluations) +
                                     ", objective " + format_number(r.objective)};
  if (!within) notes.push_back("FLAG: residuals exceed " + format_number(tol) + " pp");
  if (!r.diagnostic.empty()) notes.push_back(r.diagnostic);

  auto m = manifest_base("calibrate", corpus, g);
  m["targets"] = targets_path;
  m["bounds"] = bounds_path;
  m["budget"] = budget;
  m["tol"] = tol;
  finish(m, g.out, {{"ai-params.preset", format_ai_preset(r.params, notes)}, {"calibration_report.txt", report}});
  if (!g.quiet) std::cout << report;
  return within ? kOk : kTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"System dynamics runner for World3-03 with an AI pollution pathway"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress console summaries");
  app.add_option("--seed-corpus", g.seed_corpus, "Use this model-format file instead of the built-in corpus");

  std::string model_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a model file");
  validate->add_option("file", model_path)->required();

  RunOptions ro;
  auto add_grid = [&](CLI::App* c) {
    c->add_option("--from", ro.from, "Start year")->capture_default_str();
    c->add_option("--to", ro.to, "End year")->capture_default_str();
    c->add_option("--dt", ro.dt, "Time step in years")->capture_default_str();
  };

  std::string scenario;
  auto* run = app.add_subcommand("run", "Run a registered scenario and write CSV");
  run->add_option("scenario", scenario)->required();
  add_grid(run);

  std::string base, other, years, window;
  std::vector<std::string> vars;
  auto* compare = app.add_subcommand("compare", "Compare two scenarios");
  compare->add_option("base", base)->required();
  compare->add_option("other", other)->required();
  compare->add_option("--var", vars, "Variable to compare (repeatable)");
  compare->add_option("--years", years, "Comma-separated benchmark years");
  compare->add_option("--window", window, "Cumulative overshoot window FROM:TO");
  add_grid(compare);

  std::string targets, bounds;
  std::size_t budget = 500;
  double tol = 2.0;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the AI pathway to target deltas");
  calibrate->add_option("--targets", targets, "Targets file (default: published pollution deltas)");
  calibrate->add_option("--bounds", bounds, "Parameter bounds file");
  calibrate->add_option("--budget", budget, "Objective evaluations")->capture_default_str();
  calibrate->add_option("--tol", tol, "Residual tolerance in percentage points")->capture_default_str();

  for (auto* sub : {validate, run, compare, calibrate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntime;
  }

  try {
    if (*validate) return cmd_validate(model_path, g);
    // Fail before any long computation if the output directory is unusable.
    fs::create_directories(g.out);
    if (!fs::is_directory(g.out)) throw Error("not a directory: " + fs::path(g.out).string());
    if (*run) return cmd_run(scenario, ro, g);
    if (*compare) return cmd_compare(base, other, vars, years, window, ro, g);
    if (*calibrate) return cmd_calibrate(targets, bounds, budget, tol, g);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
