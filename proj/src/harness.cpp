#include "cpbo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpbo/mpc.hpp"
#include "cpbo/table_io.hpp"

namespace cpbo {

namespace fs = std::filesystem;

MetricSeries compute_metrics(std::span<const double> j) {
  if (j.empty()) throw InsufficientDataError("compute_metrics: empty utility series");
  MetricSeries m;
  double sum = 0.0;
  for (std::size_t t = 0; t < j.size(); ++t) {
    sum += j[t];
    m.j.push_back(j[t]);
    m.r_sum.push_back(sum);
    m.r_ave.push_back(sum / static_cast<double>(t + 1));
  }
  return m;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InsufficientDataError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile: q outside [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> CellResult::tuning_utilities() const {
  std::vector<double> j;
  for (const DayRecord& d : days)
    if (d.t >= 1) j.push_back(d.result.utility);
  return j;
}

const CellResult* ExperimentResult::find(Method m, std::uint64_t seed) const {
  for (const CellResult& c : cells)
    if (c.method == m && c.seed == seed) return &c;
  return nullptr;
}

std::vector<double> theta2_curve_grid(const ExperimentConfig& cfg) {
  std::vector<double> zs;
  const Domain& d = cfg.tuner.domain;
  const int n = cfg.theta2_curve_points;
  for (int i = 0; i < n; ++i)
    zs.push_back(d.context_min + (d.context_max - d.context_min) * i / (n - 1));
  return zs;
}

fs::path cell_stem(Method m, std::uint64_t seed) {
  return to_string(m) + "_seed" + std::to_string(seed);
}

fs::path checkpoint_dir(const ExperimentConfig& cfg, Method m, std::uint64_t seed) {
  return cfg.output_dir / "checkpoints" / cell_stem(m, seed);
}

IdentificationResult run_identification_phase(const ExperimentConfig& cfg,
                                              std::uint64_t seed) {
  cfg.validate();
  const IdentificationConfig& ic = cfg.identification;
  const WeatherSource weather(seed, cfg.weather);
  PlantState s;
  s.zone_temp = ic.initial_zone_temp;
  s.wall_temp = ic.initial_wall_temp;
  const int first = ic.start_day - ic.warmup_days;
  s.clock = first * 86400.0;

  IoSeries scratch;
  BaselineController warm(cfg.baseline);
  for (int d = first; d < ic.start_day; ++d)
    s = simulate_day(warm, s, weather.day(d), scratch, cfg.plant).end;

  IdentificationResult r;
  r.seed = seed;
  ExcitationController exc(ic.excitation_lower, ic.excitation_upper,
                           RandomStream(seed, "excitation"));
  for (int d = ic.start_day; d < ic.start_day + ic.excitation_days; ++d)
    s = simulate_day(exc, s, weather.day(d), r.history, cfg.plant).end;
  r.model = fit_arx(r.history, ic.ridge);
  r.start = s;

  // Held-out branch: baseline operation from the post-excitation state.
  IoSeries held_out;
  BaselineController val(cfg.baseline);
  PlantState v = s;
  const int seed_day = cfg.seed_day();
  for (int d = seed_day; d < seed_day + ic.validation_days; ++d)
    v = simulate_day(val, v, weather.day(d), held_out, cfg.plant).end;
  r.validation_mae = open_loop_mae(r.model, held_out);
  return r;
}

namespace {

constexpr int kHistoryKeep = kArxOrder - 1;

std::string config_echo(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.days = 0;
  c.output_dir = "";
  return config_to_json_text(c);
}

struct CellState {
  PlantState plant;
  bool baseline_on = false;
  IoSeries history;
  std::vector<DayRecord> days;
  std::optional<TunerState> tuner;
};

std::string record_line(const DayRecord& r) {
  std::ostringstream o;
  o << r.t << ' ' << r.day << ' ' << format_double(r.theta.price_threshold) << ' '
    << format_double(r.theta.lower_setpoint) << ' ' << format_double(r.z) << ' '
    << format_double(r.result.cost) << ' ' << format_double(r.result.discomfort) << ' '
    << format_double(r.result.t_ave) << ' ' << format_double(r.result.t_env) << ' '
    << format_double(r.result.utility) << ' ' << r.feedback << ' ' << r.weather_hash;
  return o.str();
}

DayRecord parse_record(const std::vector<std::string>& f, std::size_t off) {
  if (f.size() != off + 12) throw IoError("checkpoint: malformed day row");
  DayRecord r;
  r.t = static_cast<int>(parse_int(f[off]));
  r.day = static_cast<int>(parse_int(f[off + 1]));
  r.theta.price_threshold = parse_double(f[off + 2]);
  r.theta.lower_setpoint = parse_double(f[off + 3]);
  r.z = parse_double(f[off + 4]);
  r.result.day = r.day;
  r.result.cost = parse_double(f[off + 5]);
  r.result.discomfort = parse_double(f[off + 6]);
  r.result.t_ave = parse_double(f[off + 7]);
  r.result.t_env = parse_double(f[off + 8]);
  r.result.utility = parse_double(f[off + 9]);
  r.feedback = static_cast<int>(parse_int(f[off + 10]));
  r.weather_hash = std::stoull(f[off + 11]);
  return r;
}

fs::path checkpoint_path(const fs::path& dir, int t) {
  char name[32];
  std::snprintf(name, sizeof name, "day_%03d.ckpt", t);
  return dir / name;
}

void write_checkpoint(const ExperimentConfig& cfg, Method method, std::uint64_t seed,
                      const CellState& st) {
  std::ostringstream o;
  o << "cpbo-checkpoint 1\n";
  o << "method " << to_string(method) << "\nseed " << seed << "\n";
  o << "t " << st.days.back().t << "\n";
  o << "plant " << format_double(st.plant.zone_temp) << ' '
    << format_double(st.plant.wall_temp) << ' ' << format_double(st.plant.clock) << ' '
    << st.plant.clamp_events << "\n";
  o << "baseline_on " << (st.baseline_on ? 1 : 0) << "\n";
  const std::size_t n = st.history.size();
  const std::size_t keep = std::min<std::size_t>(n, kHistoryKeep);
  o << "history " << keep << "\n";
  for (std::size_t k = n - keep; k < n; ++k) {
    o << "h " << format_double(st.history.y[k]);
    for (int i = 0; i < kArxInputs; ++i) o << ' ' << format_double(st.history.u[i][k]);
    o << "\n";
  }
  o << "rows " << st.days.size() << "\n";
  for (const DayRecord& r : st.days) o << "row " << record_line(r) << "\n";
  if (st.tuner) {
    o << "dataset\n";
    write_dataset(o, st.tuner->dataset);
    o << "end dataset\n";
  }
  o << "config\n" << config_echo(cfg);
  const fs::path dir = checkpoint_dir(cfg, method, seed);
  fs::create_directories(dir);
  write_text_file(checkpoint_path(dir, st.days.back().t), o.str());
}

std::optional<CellState> load_latest_checkpoint(const ExperimentConfig& cfg,
                                                const TunerConfig& tcfg, Method method,
                                                std::uint64_t seed) {
  const fs::path dir = checkpoint_dir(cfg, method, seed);
  if (!fs::is_directory(dir)) return std::nullopt;
  int best = -1;
  for (int t = 0; t <= cfg.days; ++t)
    if (fs::exists(checkpoint_path(dir, t))) best = t;
  if (best < 0) return std::nullopt;
  const fs::path path = checkpoint_path(dir, best);
  std::istringstream in(read_text_file(path));
  const std::string where = "checkpoint " + path.string() + ": ";
  auto fields = [&](const char* key, std::size_t count) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(where + "truncated before '" + key + "'");
    auto f = split_fields(line);
    if (f.empty() || f[0] != key || (count && f.size() != count))
      throw IoError(where + "expected '" + key + "' line, got '" + line + "'");
    return f;
  };
  fields("cpbo-checkpoint", 2);
  if (fields("method", 2)[1] != to_string(method)) throw IoError(where + "method mismatch");
  if (fields("seed", 2)[1] != std::to_string(seed)) throw IoError(where + "seed mismatch");
  fields("t", 2);
  CellState st;
  auto p = fields("plant", 5);
  st.plant.zone_temp = parse_double(p[1]);
  st.plant.wall_temp = parse_double(p[2]);
  st.plant.clock = parse_double(p[3]);
  st.plant.clamp_events = static_cast<int>(parse_int(p[4]));
  st.baseline_on = fields("baseline_on", 2)[1] == "1";
  const auto nh = parse_int(fields("history", 2)[1]);
  for (long long k = 0; k < nh; ++k) {
    auto h = fields("h", 2 + kArxInputs);
    st.history.push_back(parse_double(h[1]),
                         {parse_double(h[2]), parse_double(h[3]), parse_double(h[4])});
  }
  const auto nr = parse_int(fields("rows", 2)[1]);
  for (long long k = 0; k < nr; ++k) st.days.push_back(parse_record(fields("row", 13), 1));
  std::string line;
  std::getline(in, line);
  if (line == "dataset") {
    std::ostringstream ds;
    while (std::getline(in, line) && line != "end dataset") ds << line << "\n";
    std::istringstream dsin(ds.str());
    st.tuner = make_tuner_state(tcfg, read_dataset(dsin));
    std::getline(in, line);
  }
  if (line != "config") throw IoError(where + "missing config echo");
  std::ostringstream rest;
  rest << in.rdbuf();
  if (rest.str() != config_echo(cfg))
    throw ConfigError(where + "was written with a different configuration");
  return st;
}

void write_trajectory(const ExperimentConfig& cfg, Method m, std::uint64_t seed,
                      const TrajectoryLog& log) {
  Table t;
  t.header = {"step", "time", "y", "valve", "Q", "p", "T_out", "solar"};
  for (std::size_t k = 0; k < log.size(); ++k)
    t.add_row({std::to_string(k), format_double(hour_of_step(static_cast<int>(k))),
               format_double(log.zone_temp[k]), format_double(log.valve[k]),
               format_double(log.heat_kw[k]), format_double(log.price[k]),
               format_double(log.outdoor[k]), format_double(log.solar[k])});
  const fs::path dir = cfg.output_dir / "trajectories";
  fs::create_directories(dir);
  write_table(dir / (cell_stem(m, seed).string() + "_day" + std::to_string(log.day) + ".tsv"),
              t);
}

TunerConfig tuner_config_for(const ExperimentConfig& cfg, Method m) {
  TunerConfig t = cfg.tuner;
  t.kernel.contextual = m == Method::contextual_pbo;
  return t;
}

}  // namespace

std::vector<double> compute_theta2_curve(const ExperimentConfig& cfg, const CellResult& cell) {
  if (cell.method == Method::baseline) return {};
  std::vector<EvalPoint> points;
  std::vector<int> outcomes;
  for (const DayRecord& r : cell.days) {
    points.push_back({r.theta, Context{r.z}});
    if (r.t >= 1) outcomes.push_back(r.feedback);
  }
  const TunerState st =
      make_tuner_state(tuner_config_for(cfg, cell.method), PreferenceDataset(points, outcomes));
  if (st.dataset.num_comparisons() < 5) return {};
  std::vector<Context> zs;
  for (double z : theta2_curve_grid(cfg)) zs.push_back(Context{z});
  return predict_optimal_theta2(st, zs);
}

CellResult run_cell(const ExperimentConfig& cfg, const IdentificationResult& id,
                    Method method, const RunOptions& options) {
  cfg.validate();
  const std::uint64_t seed = id.seed;
  const TunerConfig tcfg = tuner_config_for(cfg, method);
  const WeatherSource weather(seed, cfg.weather);
  const int seed_day = cfg.seed_day();
  auto log = [&](const std::string& s) {
    if (options.log) options.log(s);
  };

  std::optional<CellState> resumed;
  if (options.resume) resumed = load_latest_checkpoint(cfg, tcfg, method, seed);
  CellState st;
  if (resumed) {
    st = std::move(*resumed);
    log(to_string(method) + " seed " + std::to_string(seed) + ": resuming after day t=" +
        std::to_string(st.days.back().t));
  } else {
    st.plant = id.start;
    st.history = id.history;
  }

  BaselineController baseline(cfg.baseline);
  baseline.set_heating(st.baseline_on);
  MpcController mpc(id.model, weather, cfg.mpc, cfg.tuner.seed_theta);

  auto context_of = [&](int d) {
    return tcfg.domain.clamp(Context{weather.day(d).mean_outdoor()}).mean_outdoor_temp;
  };

  // Runs one day and records it; θ is ignored by the baseline.
  auto run_day = [&](int t, const ParamPoint& theta) {
    const int d = seed_day + t;
    const WeatherDay& w = weather.day(d);
    DayRecord r;
    r.t = t;
    r.day = d;
    r.z = context_of(d);
    r.weather_hash = weather_hash(w);
    try {
      Controller* ctrl = &baseline;
      if (method != Method::baseline) {
        r.theta = theta;
        mpc.set_theta(theta);
        ctrl = &mpc;
      }
      DayRun run = simulate_day(*ctrl, st.plant, w, st.history, cfg.plant);
      st.plant = run.end;
      st.baseline_on = baseline.heating();
      r.result = evaluate_day(run.log, w, cfg.occupant);
      if (cfg.write_trajectories) write_trajectory(cfg, method, seed, run.log);
    } catch (const LpFailure& e) {
      const fs::path dump = cfg.output_dir / "failures" /
                            (cell_stem(method, seed).string() + "_day" +
                             std::to_string(d) + ".lp");
      fs::create_directories(dump.parent_path());
      std::ofstream out(dump);
      dump_lp(out, e.problem());
      throw RunError(to_string(method) + ", seed " + std::to_string(seed) + ", day " +
                         std::to_string(d) + ": " + e.what() + " [LP written to " +
                         dump.string() + "]",
                     to_string(method), seed, d);
    } catch (const RunError&) {
      throw;
    } catch (const Error& e) {
      throw RunError(to_string(method) + ", seed " + std::to_string(seed) + ", day " +
                         std::to_string(d) + ": " + e.what(),
                     to_string(method), seed, d);
    }
    return r;
  };

  if (st.days.empty()) {
    DayRecord r = run_day(0, cfg.tuner.seed_theta);
    st.days.push_back(r);
    if (method != Method::baseline) st.tuner = make_tuner_state(tcfg, Context{r.z});
    write_checkpoint(cfg, method, seed, st);
  }

  for (int t = st.days.back().t + 1; t <= cfg.days; ++t) {
    if (options.stop_after && t > *options.stop_after) break;
    const int d = seed_day + t;
    ParamPoint theta;
    if (method != Method::baseline) {
      try {
        theta = propose(*st.tuner, Context{context_of(d)});
      } catch (const Error& e) {
        throw RunError(to_string(method) + ", seed " + std::to_string(seed) + ", day " +
                           std::to_string(d) + ": " + e.what(),
                       to_string(method), seed, d);
      }
    }
    DayRecord r = run_day(t, theta);
    if (method != Method::baseline) {
      const DayRecord& prev = st.days.back();
      if (options.feedback) {
        r.feedback = options.feedback(r, prev) ? 1 : 0;
      } else {
        RandomStream rng(seed, "occupant", {static_cast<std::uint64_t>(d)});
        r.feedback =
            preference_feedback(r.result.utility, prev.result.utility, cfg.occupant, rng);
      }
      st.tuner = update(*st.tuner, r.theta, Context{r.z}, r.feedback);
    }
    st.days.push_back(r);
    write_checkpoint(cfg, method, seed, st);
    if (st.history.size() > 4 * kStepsPerDay) {
      IoSeries trimmed;
      for (std::size_t k = st.history.size() - kHistoryKeep; k < st.history.size(); ++k)
        trimmed.push_back(st.history.y[k],
                          {st.history.u[0][k], st.history.u[1][k], st.history.u[2][k]});
      st.history = std::move(trimmed);
    }
    log(to_string(method) + " seed " + std::to_string(seed) + " day " + std::to_string(d) +
        " theta=(" + format_double(r.theta.price_threshold) + ", " +
        format_double(r.theta.lower_setpoint) + ") z=" + format_double(r.z) +
        " J=" + format_double(r.result.utility) + " q=" + std::to_string(r.feedback));
  }

  CellResult out;
  out.method = method;
  out.seed = seed;
  out.days = std::move(st.days);
  if (static_cast<int>(out.days.size()) == cfg.days + 1)
    out.theta2_curve = compute_theta2_curve(cfg, out);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options,
                                std::map<std::uint64_t, IdentificationResult>* cache) {
  cfg.validate();
  ExperimentResult r;
  r.config = cfg;
  for (std::uint64_t seed : cfg.seeds) {
    if (cache && cache->count(seed)) {
      r.identification[seed] = cache->at(seed);
    } else {
      r.identification[seed] = run_identification_phase(cfg, seed);
      if (cache) (*cache)[seed] = r.identification[seed];
    }
    const IdentificationResult& id = r.identification[seed];
    if (options.log)
      options.log("seed " + std::to_string(seed) + ": ARX training MAE " +
                  format_double(id.model.training_mae) + ", held-out MAE " +
                  format_double(id.validation_mae));
    for (Method m : cfg.methods) r.cells.push_back(run_cell(cfg, id, m, options));
  }
  return r;
}

bool weather_paired(const ExperimentResult& r) {
  for (const CellResult& a : r.cells)
    for (const CellResult& b : r.cells) {
      if (a.seed != b.seed) continue;
      const std::size_t n = std::min(a.days.size(), b.days.size());
      for (std::size_t i = 0; i < n; ++i)
        if (a.days[i].day != b.days[i].day || a.days[i].weather_hash != b.days[i].weather_hash)
          return false;
    }
  return true;
}

std::vector<ImprovementRow> relative_improvements(const ExperimentResult& r) {
  std::vector<ImprovementRow> rows;
  for (const CellResult& c : r.cells) {
    if (c.method == Method::baseline) continue;
    const CellResult* base = r.find(Method::baseline, c.seed);
    if (!base) continue;
    const auto uc = c.tuning_utilities();
    const auto ub = base->tuning_utilities();
    if (uc.empty() || uc.size() != ub.size()) continue;
    ImprovementRow row;
    row.method = c.method;
    row.seed = c.seed;
    row.r_sum = compute_metrics(uc).r_sum.back();
    row.r_sum_baseline = compute_metrics(ub).r_sum.back();
    if (row.r_sum_baseline == 0.0)
      throw InsufficientDataError("relative improvement: baseline utility sums to zero");
    row.improvement = (row.r_sum - row.r_sum_baseline) / std::abs(row.r_sum_baseline);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ImprovementSummary> summarize_improvements(const std::vector<ImprovementRow>& rows) {
  std::vector<ImprovementSummary> out;
  for (Method m : {Method::static_pbo, Method::contextual_pbo}) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.method == m) v.push_back(r.improvement);
    if (v.empty()) continue;
    ImprovementSummary s;
    s.method = m;
    s.count = v.size();
    s.median = quantile(v, 0.5);
    s.q25 = quantile(v, 0.25);
    s.q75 = quantile(v, 0.75);
    out.push_back(s);
  }
  return out;
}

}  // namespace cpbo
