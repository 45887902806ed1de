#include "cpbo/artifacts.hpp"

#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "cpbo/table_io.hpp"

#ifndef CPBO_VERSION
#define CPBO_VERSION "dev"
#endif

namespace cpbo {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path model_path(const fs::path& dir, std::uint64_t seed) {
  return dir / "models" / ("seed" + std::to_string(seed) + ".arx");
}

fs::path days_path(const fs::path& dir, Method m, std::uint64_t seed) {
  return dir / "days" / (cell_stem(m, seed).string() + ".tsv");
}

Table days_table(const CellResult& c) {
  Table t;
  t.header = {"t",          "day",   "theta1", "theta2", "z",     "cost", "discomfort",
              "t_ave",      "t_env", "J",      "q",      "R_sum", "R_ave",
              "weather_hash"};
  const auto j = c.tuning_utilities();
  const MetricSeries m = j.empty() ? MetricSeries{} : compute_metrics(j);
  std::size_t k = 0;
  for (const DayRecord& r : c.days) {
    std::string rs = "-", ra = "-";
    if (r.t >= 1) {
      rs = format_double(m.r_sum[k]);
      ra = format_double(m.r_ave[k]);
      ++k;
    }
    t.add_row({std::to_string(r.t), std::to_string(r.day),
               format_double(r.theta.price_threshold), format_double(r.theta.lower_setpoint),
               format_double(r.z), format_double(r.result.cost),
               format_double(r.result.discomfort), format_double(r.result.t_ave),
               format_double(r.result.t_env), format_double(r.result.utility),
               r.feedback < 0 ? "-" : std::to_string(r.feedback), rs, ra,
               std::to_string(r.weather_hash)});
  }
  return t;
}

CellResult read_days_table(const fs::path& path, Method m, std::uint64_t seed) {
  const Table t = read_table(path);
  CellResult c;
  c.method = m;
  c.seed = seed;
  auto col = [&](const char* name) { return t.column(name); };
  const std::size_t it = col("t"), iday = col("day"), i1 = col("theta1"), i2 = col("theta2"),
                    iz = col("z"), ic = col("cost"), id = col("discomfort"),
                    ia = col("t_ave"), ie = col("t_env"), ij = col("J"), iq = col("q"),
                    ih = col("weather_hash");
  for (const auto& row : t.rows) {
    DayRecord r;
    r.t = static_cast<int>(parse_int(row[it]));
    r.day = static_cast<int>(parse_int(row[iday]));
    r.theta = {parse_double(row[i1]), parse_double(row[i2])};
    r.z = parse_double(row[iz]);
    r.result.day = r.day;
    r.result.cost = parse_double(row[ic]);
    r.result.discomfort = parse_double(row[id]);
    r.result.t_ave = parse_double(row[ia]);
    r.result.t_env = parse_double(row[ie]);
    r.result.utility = parse_double(row[ij]);
    r.feedback = row[iq] == "-" ? -1 : static_cast<int>(parse_int(row[iq]));
    r.weather_hash = std::stoull(row[ih]);
    c.days.push_back(r);
  }
  return c;
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

void emit_artifacts(const ExperimentResult& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "days", ec);
  fs::create_directories(dir / "models", ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const ExperimentConfig& cfg = r.config;

  ordered_json manifest;
  manifest["tool"] = "cpbo";
  manifest["version"] = CPBO_VERSION;
  manifest["eigen"] = eigen_version();
  manifest["compiler"] = __VERSION__;
  manifest["occupant"] = to_string(cfg.occupant.kind);
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  manifest["methods"] = methods;
  manifest["seeds"] = cfg.seeds;
  manifest["days"] = cfg.days;
  manifest["pairing"] =
      "all methods of a seed run on the same daily weather realizations (checked by trace hash)";
  manifest["weather_paired"] = weather_paired(r);
  manifest["config"] = ordered_json::parse(config_to_json_text(cfg));
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  Table ident;
  ident.header = {"seed", "training_rows", "training_mae", "training_one_step_rmse",
                  "validation_mae"};
  for (const auto& [seed, id] : r.identification) {
    ident.add_row({std::to_string(seed), std::to_string(id.model.training_rows),
                   format_double(id.model.training_mae),
                   format_double(id.model.training_one_step_rmse),
                   format_double(id.validation_mae)});
    std::ostringstream o;
    write_model(o, id.model);
    write_text_file(model_path(dir, seed), o.str());
  }
  write_table(dir / "identification.tsv", ident);

  Table metrics;
  metrics.header = {"method", "seed", "T", "R_sum", "R_ave", "total_cost", "total_discomfort"};
  for (const CellResult& c : r.cells) {
    write_table(days_path(dir, c.method, c.seed), days_table(c));
    const auto j = c.tuning_utilities();
    if (j.empty()) continue;
    const MetricSeries m = compute_metrics(j);
    double cost = 0.0, disc = 0.0;
    for (const DayRecord& d : c.days)
      if (d.t >= 1) {
        cost += d.result.cost;
        disc += d.result.discomfort;
      }
    metrics.add_row({to_string(c.method), std::to_string(c.seed), std::to_string(j.size()),
                     format_double(m.r_sum.back()), format_double(m.r_ave.back()),
                     format_double(cost), format_double(disc)});
  }
  write_table(dir / "metrics.tsv", metrics);

  const auto rows = relative_improvements(r);
  Table imp;
  imp.header = {"method", "seed", "R_sum", "R_sum_baseline", "improvement"};
  for (const auto& row : rows)
    imp.add_row({to_string(row.method), std::to_string(row.seed), format_double(row.r_sum),
                 format_double(row.r_sum_baseline), format_double(row.improvement)});
  write_table(dir / "improvement.tsv", imp);

  Table sum;
  sum.header = {"method", "n", "median", "q25", "q75", "iqr"};
  for (const auto& s : summarize_improvements(rows))
    sum.add_row({to_string(s.method), std::to_string(s.count), format_double(s.median),
                 format_double(s.q25), format_double(s.q75), format_double(s.iqr())});
  write_table(dir / "improvement_summary.tsv", sum);

  Table curves;
  curves.header = {"occupant", "method", "seed", "z", "theta2"};
  const auto zs = theta2_curve_grid(cfg);
  for (const CellResult& c : r.cells) {
    if (c.theta2_curve.size() != zs.size()) continue;
    for (std::size_t i = 0; i < zs.size(); ++i)
      curves.add_row({to_string(cfg.occupant.kind), to_string(c.method),
                      std::to_string(c.seed), format_double(zs[i]),
                      format_double(c.theta2_curve[i])});
  }
  write_table(dir / "theta2_curves.tsv", curves);
}

ExperimentResult load_run(const fs::path& dir) {
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest.json in " + dir.string() + " is not valid: " + e.what());
  }
  if (!manifest.contains("config"))
    throw IoError("manifest.json in " + dir.string() + " has no config echo");
  ExperimentResult r;
  r.config = config_from_json_text(manifest["config"].dump());

  const Table ident = read_table(dir / "identification.tsv");
  const std::size_t is = ident.column("seed"), iv = ident.column("validation_mae");
  for (const auto& row : ident.rows) {
    const auto seed = static_cast<std::uint64_t>(parse_int(row[is]));
    IdentificationResult id;
    id.seed = seed;
    id.validation_mae = parse_double(row[iv]);
    std::istringstream in(read_text_file(model_path(dir, seed)));
    id.model = read_model(in);
    r.identification[seed] = std::move(id);
  }
  for (std::uint64_t seed : r.config.seeds)
    for (Method m : r.config.methods) {
      CellResult c = read_days_table(days_path(dir, m, seed), m, seed);
      if (static_cast<int>(c.days.size()) == r.config.days + 1)
        c.theta2_curve = compute_theta2_curve(r.config, c);
      r.cells.push_back(std::move(c));
    }
  return r;
}

}  // namespace cpbo
