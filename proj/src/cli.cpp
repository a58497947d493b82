#include "guidecheck/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "guidecheck/alignment.hpp"
#include "guidecheck/bpmn.hpp"
#include "guidecheck/dotted_chart.hpp"
#include "guidecheck/error.hpp"
#include "guidecheck/event_log.hpp"
#include "guidecheck/petri.hpp"
#include "guidecheck/pnml.hpp"
#include "guidecheck/random.hpp"
#include "guidecheck/report.hpp"

namespace guidecheck::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string log_path;
  std::string model_path;
  std::string out_dir = ".";
  ColumnMapping mapping;
  std::string date_format{kIsoDateFormat};
  std::optional<long> max_days;
  std::size_t min_variant_count = 1;
  std::string waves;
  std::uint64_t seed = 42;
  std::string format = "csv";

  std::string abstraction_path;

  double log_move_cost = 1.0;
  double model_move_cost = 1.0;
  std::size_t state_budget = alignment::AlignOptions{}.state_budget;
  unsigned threads = 0;

  std::size_t count = 100;
  std::size_t max_steps = 500;
  std::size_t noise = 0;
  std::string noise_kinds = "drop,insert,swap";
  std::string start_date = "2020-03-01";
};

/// Carries an exit code out of a command.
class ExitError : public std::runtime_error {
 public:
  ExitError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

std::ifstream open_input(const std::string& path, std::string_view what) {
  if (path.empty()) throw ExitError(kExitUsage, fmt::format("no {} given", what));
  std::ifstream in{path, std::ios::binary};
  if (!in) throw ExitError(kExitInput, fmt::format("cannot read {} '{}'", what, path));
  return in;
}

std::ofstream open_output(const RunConfig& config, std::string_view file_name) {
  const fs::path path = fs::path{config.out_dir} / file_name;
  std::ofstream out{path, std::ios::binary};
  if (!out) throw ExitError(kExitInput, fmt::format("cannot write '{}'", path.string()));
  return out;
}

void prepare_out_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ExitError(kExitInput, fmt::format("cannot create output directory '{}': {}", config.out_dir, ec.message()));
}

EventLog load_log(const RunConfig& config) {
  auto in = open_input(config.log_path, "log");
  const fs::path path{config.log_path};
  try {
    if (path.extension() == ".xes") return parse_xes(in, path.stem().string());
    return parse_csv(in, config.mapping, config.date_format, path.stem().string());
  } catch (const Error& e) {
    throw ExitError(kExitInput, fmt::format("cannot read log '{}': {}", config.log_path, e.what()));
  }
}

petri::PetriNet load_net(const RunConfig& config) {
  auto in = open_input(config.model_path, "model");
  if (fs::path{config.model_path}.extension() == ".pnml") {
    try {
      return petri::read_pnml(in);
    } catch (const Error& e) {
      throw ExitError(kExitInput, fmt::format("cannot read net '{}': {}", config.model_path, e.what()));
    }
  }
  bpmn::Model model;
  try {
    model = bpmn::parse(in);
  } catch (const ParseError& e) {
    throw ExitError(kExitInput, fmt::format("cannot read model '{}': {}", config.model_path, e.what()));
  } catch (const Error& e) {
    throw ExitError(kExitCompile, fmt::format("invalid model '{}': {}", config.model_path, e.what()));
  }
  try {
    return petri::compile(model);
  } catch (const Error& e) {
    throw ExitError(kExitCompile, fmt::format("cannot compile '{}': {}", config.model_path, e.what()));
  }
}

WaveBoundaries load_waves(const RunConfig& config) {
  if (config.waves.empty()) return {};
  try {
    return WaveBoundaries::parse(config.waves);
  } catch (const Error& e) {
    throw ExitError(kExitUsage, fmt::format("invalid --waves '{}': {}", config.waves, e.what()));
  }
}

std::string format_fitness(double value) { return std::isnan(value) ? "n/a" : fmt::format("{:.2f}", value); }

// preprocess -------------------------------------------------------------------

int cmd_preprocess(const RunConfig& config, std::ostream& out) {
  const EventLog input = load_log(config);
  EventLog log = input;
  if (config.max_days) log = remove_duration_outliers(log, *config.max_days);
  if (!config.abstraction_path.empty()) {
    auto in = open_input(config.abstraction_path, "abstraction map");
    AbstractionMap map;
    try {
      map = read_abstraction_map(in);
    } catch (const Error& e) {
      throw ExitError(kExitInput, fmt::format("cannot read abstraction map: {}", e.what()));
    }
    log = abstract_activities(log, map);
  }
  if (config.min_variant_count > 1) log = filter_infrequent_variants(log, config.min_variant_count);

  prepare_out_dir(config);
  auto file = open_output(config, "cleaned_log.csv");
  write_csv(log, file, config.mapping, config.date_format);

  const auto before = summarize(input);
  const auto after = summarize(log);
  out << fmt::format("cases:      {}→{}\n", before.cases, after.cases);
  out << fmt::format("activities: {}→{}\n", before.activities, after.activities);
  out << fmt::format("variants:   {}→{}\n", before.variants, after.variants);
  out << fmt::format("events:     {}→{}\n", before.events, after.events);
  out << fmt::format("{} patient cases, {} activities, {} variants, and {} events\n", after.cases, after.activities,
                     after.variants, after.events);
  return kExitOk;
}

// check ------------------------------------------------------------------------

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto format = parse_report_format(config.format);
  const auto net = load_net(config);
  EventLog log = load_log(config);
  if (config.max_days) log = remove_duration_outliers(log, *config.max_days);
  if (config.min_variant_count > 1) log = filter_infrequent_variants(log, config.min_variant_count);
  const auto buckets = split_by_waves(log, load_waves(config));

  alignment::CostScheme costs;
  costs.log_move = config.log_move_cost;
  costs.model_visible = config.model_move_cost;
  try {
    costs.validate();
  } catch (const ContractError& e) {
    throw ExitError(kExitUsage, e.what());
  }
  alignment::AlignOptions options;
  options.state_budget = config.state_budget;

  prepare_out_dir(config);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto& bucket = buckets[i];
    alignment::ConformanceResult result;
    try {
      result = alignment::align_log(net, bucket, costs, options, config.threads);
    } catch (const ModelError& e) {
      throw ExitError(kExitCompile, fmt::format("model cannot be aligned against: {}", e.what()));
    }
    const auto report = per_activity_moves(result);

    std::vector<Trace> aligned;
    for (std::size_t t = 0; t < bucket.size(); ++t) {
      if (result.per_trace[t].alignment) aligned.push_back(bucket.traces()[t]);
    }
    check_bookkeeping(report, EventLog{bucket.name(), std::move(aligned)});

    const auto wave = i + 1;
    {
      auto file = open_output(config, fmt::format("report_wave{}.{}", wave, file_extension(format)));
      render(report, format, file);
    }
    {
      auto file = open_output(config, fmt::format("conformance_wave{}.json", wave));
      alignment::write_conformance_json(net, result, file);
    }
    {
      auto file = open_output(config, fmt::format("alignments_wave{}.tsv", wave));
      for (const auto& trace : result.per_trace) {
        file << "# case " << trace.case_id << '\n';
        if (trace.alignment) {
          alignment::write_alignment_dump(net, *trace.alignment, file);
        } else {
          file << "# failed: " << trace.error << '\n';
        }
      }
    }
    out << fmt::format("wave {}: {} cases, {} events, fitness {} (cost-based {})\n", wave, report.case_count,
                       bucket.event_count(), format_fitness(report.log_fitness_average),
                       format_fitness(report.log_fitness_cost_based));
    for (const auto& trace : result.per_trace) {
      if (!trace.alignment) err << fmt::format("wave {}: case '{}' not aligned: {}\n", wave, trace.case_id, trace.error);
    }
    failures += result.failed_count();
  }
  if (failures > 0) {
    err << fmt::format("{} trace(s) exceeded the state budget of {}; partial results written\n", failures,
                       config.state_budget);
    return kExitResource;
  }
  return kExitOk;
}

// convert ----------------------------------------------------------------------

int cmd_convert(const RunConfig& config, std::ostream& out) {
  const auto net = load_net(config);
  const auto stem = fs::path{config.model_path}.stem().string();
  prepare_out_dir(config);
  {
    auto file = open_output(config, stem + ".pnml");
    petri::write_pnml(net, file, stem);
  }
  std::size_t silent = 0;
  for (const auto& t : net.transitions()) silent += t.silent() ? 1 : 0;
  out << fmt::format("{}.pnml: {} places, {} transitions ({} visible, {} silent)\n", stem, net.places().size(),
                     net.transitions().size(), net.transitions().size() - silent, silent);
  const auto diagnostics = petri::check_workflow_net(net);
  if (diagnostics.empty()) {
    out << "workflow-net check: ok\n";
    return kExitOk;
  }
  for (const auto& d : diagnostics) out << "workflow-net check: " << d.message << '\n';
  return kExitCompile;
}

// dotted-chart -----------------------------------------------------------------

int cmd_dotted_chart(const RunConfig& config, std::ostream& out) {
  const auto log = load_log(config);
  const auto chart = dotted_chart(log, load_waves(config));
  prepare_out_dir(config);
  {
    auto file = open_output(config, "dotted_chart.svg");
    write_dotted_chart_svg(chart, file);
  }
  {
    auto file = open_output(config, "dotted_chart.csv");
    write_dotted_chart_csv(chart, file);
  }
  out << fmt::format("{} dots, {} cases, {} wave cutoffs\n", chart.dots.size(), chart.rows.size(),
                     chart.cutoffs.size());
  return kExitOk;
}

// simulate ---------------------------------------------------------------------

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto net = load_net(config);
  Date start;
  NoiseKinds kinds;
  try {
    start = parse_date(config.start_date, kIsoDateFormat);
    kinds = NoiseKinds::parse(config.noise_kinds);
  } catch (const Error& e) {
    throw ExitError(kExitUsage, e.what());
  }
  const auto alphabet = net.visible_labels();
  const auto width = std::max<std::size_t>(4, fmt::format("{}", config.count).size());

  std::vector<Trace> traces;
  std::size_t dead_ends = 0;
  for (std::size_t i = 0; i < config.count; ++i) {
    const auto case_id = fmt::format("case_{:0{}}", i + 1, width);
    const auto first_date = start + std::chrono::days{static_cast<long>(i)};
    auto playout = petri::random_playout(net, mix_seed(config.seed, 2 * i), config.max_steps, case_id, first_date);
    if (const auto* dead = std::get_if<petri::DeadEnd>(&playout)) {
      ++dead_ends;
      err << fmt::format("{}: dead end after {} steps: {}\n", case_id, dead->steps, dead->reason);
      continue;
    }
    auto trace = std::get<Trace>(std::move(playout));
    if (config.noise > 0 && kinds.any()) {
      trace = inject_noise(trace, config.noise, kinds, mix_seed(config.seed, 2 * i + 1), alphabet).trace;
    }
    traces.push_back(std::move(trace));
  }
  const EventLog log{"simulated", std::move(traces)};
  prepare_out_dir(config);
  {
    auto file = open_output(config, "simulated_log.csv");
    write_csv(log, file, config.mapping, config.date_format);
  }
  out << fmt::format("{} traces, {} events, {} dead ends\n", log.size(), log.event_count(), dead_ends);
  if (config.count > 0 && dead_ends == config.count) {
    err << "every playout dead-ended\n";
    return kExitAllDeadEnds;
  }
  return kExitOk;
}

void add_log_options(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--log", config.log_path, "Event log (.csv, or .xes)")->required();
  cmd.add_option("--case-col", config.mapping.case_column, "CSV column holding the case id")->capture_default_str();
  cmd.add_option("--activity-col", config.mapping.activity_column, "CSV column holding the activity")
      ->capture_default_str();
  cmd.add_option("--date-col", config.mapping.date_column, "CSV column holding the event date")
      ->capture_default_str();
  cmd.add_option("--date-format", config.date_format, "Date format (%Y %m %d, time fields ignored)")
      ->capture_default_str();
}

void add_filter_options(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--max-days", config.max_days, "Drop cases spanning more than this many days");
  cmd.add_option("--min-variant-count", config.min_variant_count, "Drop variants occurring fewer times")
      ->capture_default_str();
}

void add_out_option(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--out", config.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Conformance checking of event logs against BPMN guideline models", "guidecheck"};
  app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags take precedence");
  app.require_subcommand(1);

  auto* preprocess = app.add_subcommand("preprocess", "Clean a log: outliers, abstraction, rare variants");
  add_log_options(*preprocess, config);
  add_filter_options(*preprocess, config);
  add_out_option(*preprocess, config);
  preprocess->add_option("--abstraction", config.abstraction_path, "CSV from,to label map (empty to = drop)");

  auto* check = app.add_subcommand("check", "Align a log against a model and report deviations per wave");
  add_log_options(*check, config);
  add_filter_options(*check, config);
  add_out_option(*check, config);
  check->add_option("--model", config.model_path, "Model (.bpmn, or .pnml)")->required();
  check->add_option("--waves", config.waves, "Comma-separated ISO cutoff dates");
  check->add_option("--format", config.format, "Report format: csv, markdown or json")->capture_default_str();
  check->add_option("--log-move-cost", config.log_move_cost, "Cost of a move on log")->capture_default_str();
  check->add_option("--model-move-cost", config.model_move_cost, "Cost of a visible move on model")
      ->capture_default_str();
  check->add_option("--state-budget", config.state_budget, "Search states per alignment before giving up")
      ->capture_default_str();
  check->add_option("--threads", config.threads, "Alignment workers (0 = hardware concurrency)")
      ->capture_default_str();

  auto* convert = app.add_subcommand("convert", "Compile a BPMN model to PNML");
  convert->add_option("--model", config.model_path, "BPMN model")->required();
  add_out_option(*convert, config);

  auto* chart = app.add_subcommand("dotted-chart", "Write a dotted chart (SVG and CSV) of a log");
  add_log_options(*chart, config);
  add_out_option(*chart, config);
  chart->add_option("--waves", config.waves, "Comma-separated ISO cutoff dates");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic log by random playout");
  simulate->add_option("--model", config.model_path, "Model (.bpmn, or .pnml)")->required();
  add_out_option(*simulate, config);
  simulate->add_option("--n", config.count, "Number of traces")->capture_default_str();
  simulate->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  simulate->add_option("--max-steps", config.max_steps, "Firing limit per playout")->capture_default_str();
  simulate->add_option("--noise", config.noise, "Noise edits per trace")->capture_default_str();
  simulate->add_option("--noise-kinds", config.noise_kinds, "Comma-separated subset of drop,insert,swap")
      ->capture_default_str();
  simulate->add_option("--start-date", config.start_date, "First event date of the first case")
      ->capture_default_str();
  simulate->add_option("--case-col", config.mapping.case_column, "Output case column")->capture_default_str();
  simulate->add_option("--activity-col", config.mapping.activity_column, "Output activity column")
      ->capture_default_str();
  simulate->add_option("--date-col", config.mapping.date_column, "Output date column")->capture_default_str();
  simulate->add_option("--date-format", config.date_format, "Output date format")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*preprocess) return cmd_preprocess(config, out);
    if (*check) return cmd_check(config, out, err);
    if (*convert) return cmd_convert(config, out);
    if (*chart) return cmd_dotted_chart(config, out);
    if (*simulate) return cmd_simulate(config, out, err);
  } catch (const ExitError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace guidecheck::cli
