#include "tvinfer/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvinfer/csv.hpp"
#include "tvinfer/graph.hpp"
#include "tvinfer/inference.hpp"
#include "tvinfer/log.hpp"
#include "tvinfer/simulate.hpp"

namespace tvinfer::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Flags {
  std::optional<std::string> config, kernel, error_model, out, data, rule;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> alpha, bandwidth, lambda2, xi, zeta, t, lambda1;
  std::optional<Index> nmc;
  bool verbose = false, quiet = false;
};

struct RunConfig {
  std::string command;
  fs::path out = ".";
  std::optional<fs::path> data;
  std::string response = "y";
  int threads = 0;
  PipelineConfig pipeline;
  std::vector<double> grid;
  double t = 0.5;
  SimulationConfig sim;
  Symmetrization rule = Symmetrization::or_rule;
};

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + key + "' in " + where);
  }
}

ErrorCovModel parse_error_model(const std::string& name, const json& j) {
  if (name == "iid_known") return IidKnown{j.contains("sigma") ? get<double>(j, "sigma") : 1.0};
  if (name == "iid_estimated") return IidEstimated{};
  if (name == "banded") {
    BandedEstimate b;
    if (j.contains("band_h")) b.h = get<Index>(j, "band_h");
    if (j.contains("band_rho")) b.rho = get<double>(j, "band_rho");
    if (j.contains("band_constant")) b.constant = get<double>(j, "band_constant");
    return b;
  }
  throw ConfigError("unknown error model '" + name + "' (iid_known, iid_estimated, banded)");
}

LambdaRule parse_lambda1(const json& v) {
  if (v.is_number()) return LambdaRule::fixed_value(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "cv") return LambdaRule::cross_validated();
    if (s == "theory") return LambdaRule::theory(PenaltyRegime::iid());
  }
  throw ConfigError("lambda1 must be a number, \"cv\" or \"theory\"");
}

void load_simulation(const json& j, SimulationConfig& sim) {
  check_keys(j,
             {"n", "p", "s", "design", "toeplitz_r", "error", "phi", "rho", "lrd_truncation", "error_scale",
              "n_knots", "replications", "methods", "covariance", "fp_calibration", "fp_target"},
             "simulation");
  if (j.contains("n")) sim.n = get<Index>(j, "n");
  if (j.contains("p")) sim.p = get<Index>(j, "p");
  if (j.contains("s")) sim.s = get<Index>(j, "s");
  const double r = j.contains("toeplitz_r") ? get<double>(j, "toeplitz_r") : 0.5;
  if (j.contains("design")) sim.design = parse_design(get<std::string>(j, "design"), r);
  sim.design.r = r;
  if (j.contains("error")) sim.error = parse_error_process(get<std::string>(j, "error"));
  if (j.contains("phi")) sim.error.phi = get<double>(j, "phi");
  if (j.contains("rho")) sim.error.rho = get<double>(j, "rho");
  if (j.contains("lrd_truncation")) sim.error.lrd_truncation = get<Index>(j, "lrd_truncation");
  if (j.contains("error_scale")) sim.error.scale = get<double>(j, "error_scale");
  if (j.contains("n_knots")) sim.n_knots = get<Index>(j, "n_knots");
  if (j.contains("replications")) sim.replications = get<Index>(j, "replications");
  if (j.contains("methods")) {
    sim.methods.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "methods")) sim.methods.push_back(parse_method(m));
  }
  if (j.contains("covariance")) {
    const auto c = get<std::string>(j, "covariance");
    if (c == "oracle") sim.covariance = CovarianceChoice::oracle;
    else if (c == "estimated") sim.covariance = CovarianceChoice::estimated;
    else throw ConfigError("simulation covariance must be oracle or estimated");
  }
  if (j.contains("fp_calibration")) sim.fp_calibration = get<Index>(j, "fp_calibration");
  if (j.contains("fp_target")) sim.fp_target = get<double>(j, "fp_target");
}

RunConfig build_config(const std::string& command, const Flags& f) {
  json j = json::object();
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw ConfigError("cannot open config file " + *f.config);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + *f.config + ": " + e.what());
    }
  }
  check_keys(j,
             {"seed", "threads", "alpha", "bandwidth", "lambda2", "xi", "zeta", "nmc", "kernel", "error_model", "sigma",
              "band_h", "band_rho", "band_constant", "lambda1", "data", "response", "out", "grid", "t", "rule",
              "simulation"},
             "config");

  RunConfig rc;
  rc.command = command;
  auto& pc = rc.pipeline;
  auto& inf = pc.inference;
  if (j.contains("simulation")) load_simulation(j.at("simulation"), rc.sim);

  if (j.contains("seed")) inf.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("threads")) rc.threads = get<int>(j, "threads");
  if (j.contains("alpha")) inf.alpha = get<double>(j, "alpha");
  if (j.contains("bandwidth")) pc.kernel.bandwidth = get<double>(j, "bandwidth");
  if (j.contains("lambda2")) pc.lambda2 = get<double>(j, "lambda2");
  if (j.contains("xi")) inf.xi = get<double>(j, "xi");
  if (j.contains("zeta")) inf.zeta = get<double>(j, "zeta");
  if (j.contains("nmc")) inf.n_mc = get<Index>(j, "nmc");
  if (j.contains("kernel")) pc.kernel.kind = parse_kernel(get<std::string>(j, "kernel"));
  std::optional<std::string> error_model;
  if (j.contains("error_model")) error_model = get<std::string>(j, "error_model");
  std::optional<LambdaRule> lambda1;
  if (j.contains("lambda1")) lambda1 = parse_lambda1(j.at("lambda1"));
  if (j.contains("data")) rc.data = get<std::string>(j, "data");
  if (j.contains("response")) rc.response = get<std::string>(j, "response");
  if (j.contains("out")) rc.out = get<std::string>(j, "out");
  if (j.contains("grid")) rc.grid = get<std::vector<double>>(j, "grid");
  if (j.contains("t")) rc.t = get<double>(j, "t");
  std::optional<std::string> rule;
  if (j.contains("rule")) rule = get<std::string>(j, "rule");

  if (f.seed) inf.seed = *f.seed;
  if (f.threads) rc.threads = *f.threads;
  if (f.alpha) inf.alpha = *f.alpha;
  if (f.bandwidth) pc.kernel.bandwidth = *f.bandwidth;
  if (f.lambda2) pc.lambda2 = *f.lambda2;
  if (f.xi) inf.xi = *f.xi;
  if (f.zeta) inf.zeta = *f.zeta;
  if (f.nmc) inf.n_mc = *f.nmc;
  if (f.kernel) pc.kernel.kind = parse_kernel(*f.kernel);
  if (f.error_model) error_model = *f.error_model;
  if (f.lambda1) lambda1 = LambdaRule::fixed_value(*f.lambda1);
  if (lambda1) pc.lambda1 = *lambda1;
  if (f.data) rc.data = *f.data;
  if (f.out) rc.out = *f.out;
  if (f.t) rc.t = *f.t;
  if (f.rule) rule = *f.rule;

  if (rc.threads < 0) throw ConfigError("thread count must be nonnegative");
  if (rule) {
    if (*rule == "or") rc.rule = Symmetrization::or_rule;
    else if (*rule == "and") rc.rule = Symmetrization::and_rule;
    else throw ConfigError("symmetrization rule must be 'or' or 'and'");
  }

  if (command == "simulate") {
    auto& s = rc.sim;
    s.seed = inf.seed;
    s.alpha = inf.alpha;
    s.xi = inf.xi;
    s.zeta = inf.zeta;
    s.n_mc = inf.n_mc;
    s.lambda2 = pc.lambda2;
    s.kernel = pc.kernel.kind;
    s.bandwidth = pc.kernel.bandwidth;
    s.lambda1 = lambda1;
    if (error_model) {
      if (*error_model == "oracle") s.covariance = CovarianceChoice::oracle;
      else if (*error_model == "estimated") s.covariance = CovarianceChoice::estimated;
      else throw ConfigError("simulate --error-model must be oracle or estimated");
    }
    s.validate();
  } else {
    if (error_model) pc.error_model = parse_error_model(*error_model, j);
    else if (j.contains("sigma")) pc.error_model = IidKnown{get<double>(j, "sigma")};
    if (!rc.data) throw ConfigError(command + " needs --data");
    pc.lasso.validate();
    pc.inference.validate();
    tvinfer::validate(pc.error_model);
  }
  return rc;
}

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::vector<double> resolve_grid(const RunConfig& rc, Index n) {
  if (rc.grid.empty()) return interior_grid(rc.pipeline.kernel, n);
  return rc.grid;
}

int cmd_infer(const RunConfig& rc) {
  const Dataset data = dataset_from_csv(read_csv(*rc.data), rc.response);
  rc.pipeline.validate(data.n());
  const auto grid = resolve_grid(rc, data.n());
  const PathResult path = infer_path(data, grid, rc.pipeline);

  auto out = open_out(rc.out / "infer.csv");
  out << "t,j,beta_hat,raw_p,adj_p,rejected\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!path.fits[g]) continue;
    const PointwiseFit& fit = *path.fits[g];
    std::vector<char> rejected(static_cast<std::size_t>(data.p()), 0);
    for (Index j : fit.rejected) rejected[static_cast<std::size_t>(j)] = 1;
    for (Index j = 0; j < data.p(); ++j)
      out << csv_row({format_double(grid[g]), std::to_string(j + 1), format_double(fit.estimate.beta_hat(j)),
                      format_double(fit.raw_p(j)), format_double(fit.adj_p(j)),
                      rejected[static_cast<std::size_t>(j)] ? "1" : "0"})
          << '\n';
  }
  if (path.failures() > 0) {
    auto err = open_out(rc.out / "infer_errors.csv");
    err << "t,error\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (!path.errors[g].empty()) {
        err << format_double(grid[g]) << ",\"" << path.errors[g] << "\"\n";
        log_warning("t = " + format_double(grid[g]) + ": " + path.errors[g]);
      }
    if (path.failures() == static_cast<Index>(grid.size())) throw NumericalError("every grid point failed");
  }
  return 0;
}

int cmd_simulate(const RunConfig& rc) {
  const MetricsReport report = run_simulation(rc.sim);
  auto csv = open_out(rc.out / "metrics.csv");
  report.write_csv(csv);
  auto txt = open_out(rc.out / "metrics.txt");
  report.write_table(txt);
  report.write_table(std::cout);
  log_info("simulation runtime " + format_double(report.runtime_seconds) + " s");
  return 0;
}

int cmd_graph(const RunConfig& rc) {
  const CsvTable table = read_csv(*rc.data);
  const MultiSeries series(table.values, table.header);
  rc.pipeline.validate(series.n());
  const auto grid = resolve_grid(rc, series.n());
  GraphConfig gc;
  gc.pipeline = rc.pipeline;
  gc.rule = rc.rule;
  const DynamicGraph g = neighborhood_selection(series, grid, gc);

  const fs::path dir = rc.out / "graph";
  auto manifest = open_out(dir / "manifest.csv");
  auto long_form = open_out(rc.out / "graph_long.csv");
  manifest << "index,t,file,edges\n";
  long_form << "t,node_a,node_b,p_value\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "edges_%04zu.csv", k + 1);
    auto file = open_out(dir / name);
    file << "node_a,node_b,p_value\n";
    const auto edges = edges_at(g, k);
    for (const auto& [a, b] : edges) {
      const auto& la = g.labels[static_cast<std::size_t>(a)];
      const auto& lb = g.labels[static_cast<std::size_t>(b)];
      const std::string pv = format_double(g.edge_p[k](a, b));
      file << csv_row({la, lb, pv}) << '\n';
      long_form << csv_row({format_double(grid[k]), la, lb, pv}) << '\n';
    }
    manifest << csv_row({std::to_string(k + 1), format_double(grid[k]), name, std::to_string(edges.size())}) << '\n';
  }
  return 0;
}

int cmd_nulldist(const RunConfig& rc) {
  const Dataset data = dataset_from_csv(read_csv(*rc.data), rc.response);
  rc.pipeline.validate(data.n());
  if (needs_residuals(rc.pipeline.error_model))
    throw ConfigError("nulldist supports the iid_known and iid_estimated error models");
  const LocalDesign design =
      svd_projection(build_local_design(data, kernel_weights(rc.pipeline.kernel, rc.t, data.n())),
                     rc.pipeline.rank_tol);
  ErrorCovInputs inputs;
  inputs.lasso = rc.pipeline.lasso;
  const Matrix sigma_et = build_sigma_et(rc.pipeline.error_model, design, inputs);
  const NullDistribution null =
      estimate_null_distribution(design, sigma_et, rc.pipeline.resolved_lambda2(data.n()), rc.pipeline.inference);
  auto out = open_out(rc.out / "nulldist.csv");
  out << "min_p\n";
  for (double v : null.sample()) out << format_double(v) << '\n';
  return 0;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--threads", f.threads, "worker threads (0: OpenMP default)");
  app->add_option("--alpha", f.alpha, "FWER level");
  app->add_option("--bandwidth", f.bandwidth, "kernel bandwidth b");
  app->add_option("--lambda2", f.lambda2, "ridge penalty (default 1/n)");
  app->add_option("--xi", f.xi, "bias-correction exponent");
  app->add_option("--zeta", f.zeta, "p-value shift");
  app->add_option("--nmc", f.nmc, "Monte-Carlo draws for the null distribution");
  app->add_option("--kernel", f.kernel, "uniform, epanechnikov or triangular");
  app->add_option("--error-model", f.error_model,
                  "iid_known, iid_estimated or banded (simulate: oracle or estimated)");
  app->add_option("--out", f.out, "output directory");
  app->add_flag("-v,--verbose", f.verbose, "log progress");
  app->add_flag("-q,--quiet", f.quiet, "errors only");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Pointwise FWER-controlled inference for time-varying high-dimensional regression"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* infer = app.add_subcommand("infer", "p-values along a time grid");
  CLI::App* simulate = app.add_subcommand("simulate", "simulation study metrics");
  CLI::App* graph = app.add_subcommand("graph", "dynamic graph by neighborhood selection");
  CLI::App* nulldist = app.add_subcommand("nulldist", "null min-p sample at one time point");
  for (CLI::App* sub : {infer, simulate, graph, nulldist}) add_common(sub, f);
  for (CLI::App* sub : {infer, graph, nulldist}) {
    sub->add_option("--data", f.data, "input CSV");
  }
  for (CLI::App* sub : {infer, simulate, graph, nulldist})
    sub->add_option("--lambda1", f.lambda1, "fixed tv-lasso penalty (default: 2 lambda0)");
  nulldist->add_option("--t", f.t, "time point");
  graph->add_option("--rule", f.rule, "edge symmetrization: or, and");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    set_verbosity(f.quiet ? Verbosity::quiet : f.verbose ? Verbosity::verbose : Verbosity::normal);
    std::string command;
    for (CLI::App* sub : {infer, simulate, graph, nulldist})
      if (sub->parsed()) command = sub->get_name();
    const RunConfig rc = build_config(command, f);
    if (rc.threads > 0) omp_set_num_threads(rc.threads);
    if (command == "infer") return cmd_infer(rc);
    if (command == "simulate") return cmd_simulate(rc);
    if (command == "graph") return cmd_graph(rc);
    return cmd_nulldist(rc);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::numerical);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args);
}

}  // namespace tvinfer::cli
