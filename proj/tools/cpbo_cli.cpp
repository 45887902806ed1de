#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpbo/artifacts.hpp"
#include "cpbo/config.hpp"
#include "cpbo/harness.hpp"
#include "cpbo/table_io.hpp"
#include "suites.hpp"

using namespace cpbo;

namespace {

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  int seeds = 0;
  std::string method;
  std::string occupant;
  int days = 0;
  std::string out;
  bool resume = false;
  bool interactive = false;
};

// Options absent from a subcommand count as not given.
bool given(CLI::App& app, const std::string& name) {
  return app.get_option_no_throw(name) != nullptr && app.count(name) > 0;
}

ExperimentConfig resolve(const Overrides& o, CLI::App& app) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (given(app, "--seed") && given(app, "--seeds"))
    throw ConfigError("--seed and --seeds are mutually exclusive");
  if (given(app, "--seed")) cfg.seeds = {o.seed};
  if (given(app, "--seeds")) {
    if (o.seeds < 1) throw ConfigError("--seeds must be >= 1");
    cfg.seeds.clear();
    for (int s = 1; s <= o.seeds; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (given(app, "--method")) {
    const Method m = parse_method(o.method);
    cfg.methods = {Method::baseline};
    if (m != Method::baseline) cfg.methods.push_back(m);
  }
  if (given(app, "--occupant")) {
    const FeedbackMode fb = cfg.occupant.feedback;
    cfg.occupant = OccupantConfig::for_kind(parse_occupant_kind(o.occupant));
    cfg.occupant.feedback = fb;
  }
  if (given(app, "--days")) cfg.days = o.days;
  if (given(app, "--out")) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

int ask_preference(const DayRecord& today, const DayRecord& yesterday) {
  std::ostringstream msg;
  msg << "\nDay " << today.day << " (mean outdoor " << format_double(today.z) << " C)\n"
      << "  today:     indoor " << format_double(today.result.t_ave) << " C, cost "
      << format_double(today.result.cost) << " EUR\n"
      << "  yesterday: indoor " << format_double(yesterday.result.t_ave) << " C, cost "
      << format_double(yesterday.result.cost) << " EUR\n";
  std::cout << msg.str();
  while (true) {
    std::cout << "prefer today vs yesterday? [t/y] " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) throw IoError("interactive feedback: input closed");
    if (line == "t" || line == "today") return 1;
    if (line == "y" || line == "yesterday") return 0;
  }
}

void print_summary(const ExperimentResult& r) {
  for (const auto& [seed, id] : r.identification)
    std::printf("seed %llu: ARX training MAE %.3f C, held-out MAE %.3f C\n",
                static_cast<unsigned long long>(seed), id.model.training_mae,
                id.validation_mae);
  for (const CellResult& c : r.cells) {
    const auto j = c.tuning_utilities();
    if (j.empty()) continue;
    std::printf("%-10s seed %-3llu R_sum %.4f R_ave %.4f\n", to_string(c.method).c_str(),
                static_cast<unsigned long long>(c.seed), compute_metrics(j).r_sum.back(),
                compute_metrics(j).r_ave.back());
  }
  for (const auto& s : summarize_improvements(relative_improvements(r)))
    std::printf("%s vs baseline: median improvement %.2f%% (IQR %.2f%%, n=%zu)\n",
                to_string(s.method).c_str(), 100.0 * s.median, 100.0 * s.iqr(), s.count);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual preference-based tuning of an economic MPC heating controller"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "run a single seed");
    sub->add_option("--seeds", o.seeds, "run seeds 1..k");
    sub->add_option("--out", o.out, "output directory");
  };
  CLI::App* identify = app.add_subcommand("identify", "excitation week, ARX fit and validation");
  add_common(identify);
  CLI::App* tune = app.add_subcommand("tune", "daily tuning loop and artifacts");
  add_common(tune);
  tune->add_option("--method", o.method, "baseline, static or contextual (baseline always runs)");
  tune->add_option("--occupant", o.occupant, "energy or comfort");
  tune->add_option("--days", o.days, "tuning days");
  tune->add_flag("--resume", o.resume, "continue from the latest checkpoints");
  tune->add_flag("--interactive", o.interactive, "ask for each day's preference on the terminal");
  CLI::App* report = app.add_subcommand("report", "re-emit derived tables from a run directory");
  report->add_option("--out", o.out, "run directory")->required();
  CLI::App* oracle = app.add_subcommand("oracle", "brute-force verification suites");
  bool verbose = false;
  oracle->add_flag("-v,--verbose", verbose, "print per-suite details");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (identify->parsed()) {
      const ExperimentConfig cfg = resolve(o, *identify);
      ExperimentResult r;
      r.config = cfg;
      r.config.methods = {Method::baseline};
      Table t;
      t.header = {"seed", "training_rows", "training_mae", "training_one_step_rmse",
                  "validation_mae"};
      for (std::uint64_t seed : cfg.seeds) {
        const IdentificationResult id = run_identification_phase(cfg, seed);
        std::printf("seed %llu: %zu rows, training MAE %.3f C, held-out MAE %.3f C\n",
                    static_cast<unsigned long long>(seed), id.model.training_rows,
                    id.model.training_mae, id.validation_mae);
        t.add_row({std::to_string(seed), std::to_string(id.model.training_rows),
                   format_double(id.model.training_mae),
                   format_double(id.model.training_one_step_rmse),
                   format_double(id.validation_mae)});
        std::ostringstream m;
        write_model(m, id.model);
        write_text_file(cfg.output_dir / "models" / ("seed" + std::to_string(seed) + ".arx"),
                        m.str());
      }
      write_table(cfg.output_dir / "identification.tsv", t);
      return 0;
    }
    if (tune->parsed()) {
      const ExperimentConfig cfg = resolve(o, *tune);
      RunOptions opt;
      opt.resume = o.resume;
      opt.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
      if (o.interactive) opt.feedback = ask_preference;
      const ExperimentResult r = run_experiment(cfg, opt);
      emit_artifacts(r, cfg.output_dir);
      print_summary(r);
      return 0;
    }
    if (report->parsed()) {
      const ExperimentResult r = load_run(o.out);
      emit_artifacts(r, o.out);
      print_summary(r);
      return 0;
    }
    if (oracle->parsed()) return oracle::run_all(verbose) == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
