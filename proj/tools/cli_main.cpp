// Batch front end: run | verify | sweep over a JSON configuration.
// Exit codes: 0 all certificates pass, 1 configuration error, 2 certificate
// violation (the violating row or witness is printed).

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "gradflow/flows.hpp"
#include "gradflow/io.hpp"
#include "gradflow/oracle.hpp"
#include "gradflow/rng.hpp"

namespace fs = std::filesystem;
using namespace gradflow;
using io::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config: " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct ProblemSetup {
  SpaceDescriptor space;
  GeodesicBall region;
  std::vector<FunctionalSpec> functionals;
  std::vector<double> weights;  // measure weights, empty if absent
  StepSchedule schedule = StepSchedule::Harmonic(1.0);
  std::string flow;
  Point start;
  long max_k = 1000;
  std::optional<Point> reference;
  bool reference_from_oracle = false;
};

ProblemSetup parse_problem(const json& cfg) {
  ProblemSetup p{.space = io::parse_space(cfg.at("space")),
                 .region = GeodesicBall(),
                 .functionals = {},
                 .weights = {},
                 .schedule = StepSchedule::Harmonic(1.0),
                 .flow = cfg.at("flow").get<std::string>(),
                 .start = Point(),
                 .max_k = cfg.value("max_k", 1000L),
                 .reference = std::nullopt,
                 .reference_from_oracle = false};
  p.region = io::parse_region(p.space, cfg.at("region"));
  if (cfg.contains("functionals")) {
    for (const json& jf : cfg.at("functionals"))
      p.functionals.push_back(io::parse_functional(p.region, jf));
  }
  if (cfg.contains("weights"))
    p.weights = cfg.at("weights").get<std::vector<double>>();
  if (cfg.contains("schedule")) p.schedule = io::parse_schedule(cfg.at("schedule"));
  p.start = cfg.contains("start") ? io::parse_point(p.space, cfg.at("start"))
                                  : p.region.center;
  if (cfg.contains("reference")) {
    const json& r = cfg.at("reference");
    if (r.is_string() && r.get<std::string>() == "oracle") {
      p.reference_from_oracle = true;
    } else if (r.is_array()) {
      p.reference = io::parse_point(p.space, r);
    }
  }
  return p;
}

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

FunctionalSpec sum_functional(const std::vector<FunctionalSpec>& fs) {
  std::vector<DistanceAtom> atoms;
  for (const auto& f : fs)
    for (const auto& a : f.atoms()) atoms.push_back(a);
  return FunctionalSpec::WeightedSum(std::move(atoms), fs[0].region());
}

Point oracle_reference(const FunctionalSpec& f) {
  const oracle::GridResult g = oracle::grid_minimize(f, f.region());
  return minimize_on_ball(f, f.region(), g.minimizer);
}

// The oracle reference is identical across seeds; solve it once up front.
void resolve_oracle_reference(ProblemSetup* p, const json& cfg) {
  if (!p->reference_from_oracle) return;
  if (p->flow == "ppa") {
    p->reference = oracle_reference(p->functionals[0]);
  } else if (p->flow == "cyclic" || p->flow == "cyclic_lower") {
    p->reference = oracle_reference(sum_functional(p->functionals));
  } else if (p->flow == "inductive_mean" || p->flow == "stochastic") {
    std::vector<FunctionalSpec> fs;
    std::vector<double> w;
    if (p->flow == "inductive_mean") {
      for (const json& ja : cfg.at("anchors"))
        fs.push_back(FunctionalSpec::SquaredDistance(
            io::parse_point(p->space, ja), p->region));
      w = p->weights.empty() ? uniform_weights(fs.size()) : p->weights;
    } else {
      fs = p->functionals;
      w = p->weights.empty() ? uniform_weights(fs.size()) : p->weights;
    }
    const auto [mean, var] = expectation_and_variance(MeasureSpec(fs, w));
    (void)var;
    p->reference = mean;
  }
  p->reference_from_oracle = false;
}

struct RunOutput {
  RunRecord record;
  std::string csv;
  json doc;
};

RunOutput execute_one(const ProblemSetup& p, const json& cfg,
                      std::uint64_t seed) {
  RunOutput out;
  if (p.flow == "ppa") {
    if (p.functionals.size() != 1)
      throw InvalidArgument("ppa expects exactly one functional");
    out.record =
        ppa(p.functionals[0], p.schedule, p.start, p.region, p.max_k, p.reference);
  } else if (p.flow == "cyclic" || p.flow == "cyclic_lower") {
    const ResolventMode mode = p.flow == "cyclic" ? ResolventMode::upper_prox
                                                  : ResolventMode::lower_grad;
    out.record = cyclic_ppa(p.functionals, p.schedule, p.start, p.region, mode,
                            p.max_k, p.reference, false, seed);
  } else if (p.flow == "stochastic") {
    const auto w = p.weights.empty() ? uniform_weights(p.functionals.size())
                                     : p.weights;
    MeasureSpec mu(p.functionals, w);
    out.record = stochastic_ppa(mu, p.schedule, p.start, p.region, seed, p.max_k);
  } else if (p.flow == "inductive_mean") {
    std::vector<Point> anchors;
    for (const json& ja : cfg.at("anchors"))
      anchors.push_back(io::parse_point(p.space, ja));
    const auto w = p.weights.empty() ? uniform_weights(anchors.size()) : p.weights;
    out.record = inductive_mean_sampled(anchors, w, p.region, seed, p.max_k);
    if (p.reference) {
      out.record.reference = p.reference;
      for (auto& row : out.record.rows)
        row.dist_to_ref = distance(row.x, *p.reference);
    }
  } else {
    throw InvalidArgument("unknown flow kind: " + p.flow);
  }
  out.csv = io::run_record_csv(out.record);
  out.doc = io::run_record_json(out.record, cfg);
  return out;
}

std::vector<std::uint64_t> config_seeds(const json& cfg,
                                        std::optional<std::uint64_t> override_seed) {
  if (override_seed) return {*override_seed};
  if (cfg.contains("seeds")) return cfg.at("seeds").get<std::vector<std::uint64_t>>();
  const std::uint64_t base = cfg.value("seed", 1ull);
  const long trials = cfg.value("trials", 1L);
  if (trials <= 1) return {base};
  std::vector<std::uint64_t> seeds;
  for (long t = 0; t < trials; ++t)
    seeds.push_back(CounterRng::child_seed(base, static_cast<std::uint64_t>(t)));
  return seeds;
}

// Runs fn(i) for i in [0, n) across `jobs` threads; outputs are indexed, so
// the merge order is independent of scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<int>(jobs, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string median_decay_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "k,median_dist_sq\n";
  if (runs.empty()) return out.str();
  const std::size_t rows = runs[0].rows.size();
  for (std::size_t k = 0; k < rows; ++k) {
    std::vector<double> d2;
    d2.reserve(runs.size());
    for (const auto& r : runs)
      d2.push_back(r.rows[k].dist_to_ref * r.rows[k].dist_to_ref);
    std::sort(d2.begin(), d2.end());
    const double med = d2.size() % 2 == 1
                           ? d2[d2.size() / 2]
                           : 0.5 * (d2[d2.size() / 2 - 1] + d2[d2.size() / 2]);
    out << runs[0].rows[k].m << ',' << io::format_double(med) << '\n';
  }
  return out.str();
}

// Least-squares slope of log d^2 against log k after a short burn-in; the
// window spans decades of k so trajectory noise averages out of the fit.
double loglog_slope(const RunRecord& run) {
  const std::size_t burn_in =
      run.rows.size() > 40 ? std::max<std::size_t>(10, run.rows.size() / 20)
                           : run.rows.size() / 4;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = burn_in; i < run.rows.size(); ++i) {
    const double d2 = run.rows[i].dist_to_ref * run.rows[i].dist_to_ref;
    if (d2 > 0.0 && run.rows[i].m > 0)
      pts.emplace_back(std::log(static_cast<double>(run.rows[i].m)), std::log(d2));
  }
  if (pts.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_run(const json& cfg, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override, int jobs, double tol) {
  ProblemSetup p = parse_problem(cfg);
  resolve_oracle_reference(&p, cfg);
  const auto seeds = config_seeds(cfg, seed_override);

  if (p.flow == "jensen") {
    if (p.functionals.size() != 1)
      throw InvalidArgument("jensen expects exactly one functional");
    std::vector<Point> atoms;
    for (const json& ja : cfg.at("anchors"))
      atoms.push_back(io::parse_point(p.space, ja));
    const auto w = p.weights.empty() ? uniform_weights(atoms.size()) : p.weights;
    int exit_code = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const JensenRecord rec =
          jensen_run(atoms, w, p.functionals[0], p.region, seeds[i], p.max_k);
      write_file(out_dir / ("jensen_seed" + std::to_string(seeds[i]) + ".csv"),
                 io::jensen_csv(rec));
      if (rec.min_gap < -tol) {
        std::cerr << "certificate violation: jensen gap " << rec.min_gap
                  << " at seed " << seeds[i] << "\n";
        exit_code = 2;
      }
    }
    return exit_code;
  }

  std::vector<RunOutput> outputs(seeds.size());
  std::vector<std::string> errors(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    try {
      outputs[i] = execute_one(p, cfg, seeds[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw InvalidArgument(e);

  int exit_code = 0;
  std::vector<RunRecord> records;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string stem = "run_seed" + std::to_string(seeds[i]);
    write_file(out_dir / (stem + ".csv"), outputs[i].csv);
    write_file(out_dir / (stem + ".json"), outputs[i].doc.dump(2) + "\n");
    const double r = outputs[i].record.min_certificate_residual();
    if (r < -tol) {
      for (const auto& row : outputs[i].record.rows) {
        if (std::min({row.monotone_residual, row.bound_residual,
                      row.drift_margin}) < -tol) {
          std::cerr << "certificate violation at m=" << row.m
                    << " residual=" << r << " seed=" << seeds[i] << "\n";
          break;
        }
      }
      exit_code = 2;
    }
    records.push_back(std::move(outputs[i].record));
  }
  if (records.size() > 1 && records[0].reference)
    write_file(out_dir / "median_decay.csv", median_decay_csv(records));
  return exit_code;
}

int cmd_verify(const json& cfg, const fs::path& out_dir, int jobs,
               std::optional<double> tol_override) {
  if (!cfg.contains("checks") || cfg.at("checks").empty())
    throw InvalidArgument("verify: empty check list");
  const json& checks = cfg.at("checks");

  std::vector<json> reports(checks.size());
  std::vector<std::string> errors(checks.size());
  parallel_for(checks.size(), jobs, [&](std::size_t i) {
    const json& c = checks[i];
    try {
      const std::string type = c.at("type").get<std::string>();
      const SpaceDescriptor space = io::parse_space(c.at("space"));
      const GeodesicBall region = io::parse_region(space, c.at("region"));
      const int samples = c.value("samples", 1000);
      const std::uint64_t seed = c.value("seed", 1ull);
      if (type == "curvature") {
        const std::string side = c.at("side").get<std::string>();
        const double tol = tol_override.value_or(1e-8);
        const auto rep = oracle::verify_curvature(
            region, samples,
            side == "upper" ? BoundSide::upper : BoundSide::lower,
            c.value("kappa", space.kappa), seed);
        reports[i] = io::report_json("curvature_" + side, rep, tol);
      } else if (type == "k_convexity") {
        const FunctionalSpec f = io::parse_functional(region, c.at("functional"));
        const double K = c.at("K").get<double>();
        const double tol = tol_override.value_or(1e-8);
        const auto rep = oracle::verify_k_convexity(f, K, samples, seed);
        reports[i] = io::report_json("k_convexity", rep, tol);
      } else if (type == "variance") {
        std::vector<FunctionalSpec> fs;
        for (const json& jf : c.at("functionals"))
          fs.push_back(io::parse_functional(region, jf));
        const auto w = c.contains("weights")
                           ? c.at("weights").get<std::vector<double>>()
                           : uniform_weights(fs.size());
        const double tol = tol_override.value_or(1e-7);
        const auto rep =
            oracle::verify_variance_inequality(MeasureSpec(fs, w), samples, seed);
        reports[i] = io::report_json("variance_inequality", rep, tol);
      } else {
        throw InvalidArgument("unknown check type: " + type);
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw InvalidArgument(e);

  json all = json::array();
  int exit_code = 0;
  for (const auto& rep : reports) {
    all.push_back(rep);
    if (!rep.at("pass").get<bool>()) {
      std::cerr << "check " << rep.at("check").get<std::string>()
                << " failed: margin " << rep.at("min_margin").get<double>()
                << " witness " << rep.at("witness").get<std::string>() << "\n";
      exit_code = 2;
    }
  }
  write_file(out_dir / "verify_report.json", all.dump(2) + "\n");
  std::cout << all.dump(2) << "\n";
  return exit_code;
}

int cmd_sweep(const json& cfg, const fs::path& out_dir,
              std::optional<std::uint64_t> seed_override, int jobs, double tol) {
  std::vector<json> cells;
  if (cfg.contains("schedules")) {
    for (const json& s : cfg.at("schedules")) {
      json cell = cfg;
      cell.erase("schedules");
      cell["schedule"] = s;
      cells.push_back(cell);
    }
  } else {
    cells.push_back(cfg);
  }

  std::ostringstream table;
  table << "schedule,seed,slope,terminal_dist_sq,min_residual\n";
  int exit_code = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    ProblemSetup p = parse_problem(cells[ci]);
    resolve_oracle_reference(&p, cells[ci]);
    const auto seeds = config_seeds(cells[ci], seed_override);
    std::vector<RunOutput> outputs(seeds.size());
    std::vector<std::string> errors(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t i) {
      try {
        outputs[i] = execute_one(p, cells[ci], seeds[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (const auto& e : errors)
      if (!e.empty()) throw InvalidArgument(e);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const RunRecord& r = outputs[i].record;
      const double dterm = r.rows.back().dist_to_ref;
      table << p.schedule.describe() << ',' << seeds[i] << ','
            << io::format_double(loglog_slope(r)) << ','
            << io::format_double(dterm * dterm) << ','
            << io::format_double(r.min_certificate_residual()) << '\n';
      if (r.min_certificate_residual() < -tol) exit_code = 2;
    }
    // single trajectories fluctuate; the decay rate is read off the median
    if (seeds.size() > 1 && outputs[0].record.reference) {
      RunRecord median = outputs[0].record;
      for (std::size_t k = 0; k < median.rows.size(); ++k) {
        std::vector<double> d;
        d.reserve(seeds.size());
        for (const auto& o : outputs) d.push_back(o.record.rows[k].dist_to_ref);
        std::sort(d.begin(), d.end());
        median.rows[k].dist_to_ref =
            d.size() % 2 == 1 ? d[d.size() / 2]
                              : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
      }
      const double dterm = median.rows.back().dist_to_ref;
      table << p.schedule.describe() << ",median,"
            << io::format_double(loglog_slope(median)) << ','
            << io::format_double(dterm * dterm) << ",0\n";
    }
  }
  write_file(out_dir / "sweep_summary.csv", table.str());
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time gradient flows on model geodesic spaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<double> tolerance;

  for (const char* name : {"run", "verify", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("config", config_path)->required();
    sub->add_option("--out", out_dir);
    sub->add_option("--seed", seed);
    sub->add_option("--jobs", jobs);
    sub->add_option("--tolerance", tolerance);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    const fs::path out(out_dir);
    const std::string sub = app.get_subcommands()[0]->get_name();
    if (sub == "run")
      return cmd_run(cfg, out, seed, jobs, tolerance.value_or(1e-7));
    if (sub == "verify") return cmd_verify(cfg, out, jobs, tolerance);
    return cmd_sweep(cfg, out, seed, jobs, tolerance.value_or(1e-7));
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }
}
