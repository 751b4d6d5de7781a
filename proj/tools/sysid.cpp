// Command-line front end: simulate, identify, tune, benchmark, report.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sysid/experiment.hpp"
#include "sysid/io.hpp"

namespace fs = std::filesystem;
using namespace sysid;
using io::json;

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

Orders parse_orders(const std::string& text) {
  const auto v = parse_list(text, "--orders");
  if (v.size() != 3) throw std::invalid_argument("--orders expects nb,nf,nk");
  for (double x : v) {
    if (x < 0 || x != static_cast<int>(x)) throw std::invalid_argument("--orders entries must be nonnegative integers");
  }
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

// Returns the parsed hyperparameters and whether lambda was given.
std::pair<DcHyperParams, bool> parse_kernel_init(const std::string& text) {
  const auto v = parse_list(text, "--kernel-init");
  if (v.size() != 3 && v.size() != 4) throw std::invalid_argument("--kernel-init expects c,alpha,rho[,lambda]");
  DcHyperParams eta{v[0], v[1], v[2], v.size() == 4 ? v[3] : 1.0};
  eta.validate();
  return {eta, v.size() == 4};
}

RationalModel load_system(const std::string& spec) {
  if (spec == "builtin:benchmark") return benchmark_system();
  if (spec == "builtin:example") return example_system();
  return io::model_from_json(io::parse_json(io::read_file(spec), spec));
}

double noise_guess(const Dataset& data) {
  const double g = 0.5 * data.y.squaredNorm() / data.size();
  return g > 0.0 ? g : 1.0;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string system = "builtin:benchmark";
  int N = 60;
  double input_variance = 1.0;
  double noise_variance = 2.0;
  std::string input = "white";
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.N < 1) throw std::invalid_argument("--N must be >= 1");
  const RationalModel system = load_system(a.system);
  Rng rng = make_rng({a.seed, 0x73696dULL});
  Vector u;
  if (a.input == "impulse") {
    u = Vector::Zero(a.N);
    u[0] = 1.0;
  } else if (a.input == "white") {
    u = gaussian_vector(rng, a.N, a.input_variance);
  } else {
    throw std::invalid_argument("--input must be white or impulse");
  }
  const Vector e = gaussian_vector(rng, a.N, a.noise_variance);
  const Dataset data(u, simulate(impulse_response(system, a.N), u, e));

  json config{{"command", "simulate"},         {"system", io::model_to_json(system)},
              {"N", a.N},                      {"input", a.input},
              {"input_variance", a.input_variance}, {"noise_variance", a.noise_variance},
              {"seed", a.seed}};
  io::write_file_atomic(a.out, io::dataset_to_csv(data));
  io::write_file_atomic(a.out + ".config.json", dump(config));
  return 0;
}

// ---------------------------------------------------------------------------

struct IdentifyArgs {
  std::string data;
  std::string orders = "0,4,0";
  std::string method = "brm";
  std::string kernel_init = "100,0.8,0.7";
  bool pin_lambda = false;
  int restarts = 10;
  int tuner_restarts = 4;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_identify(const IdentifyArgs& a) {
  const Dataset data = io::dataset_from_csv(io::read_file(a.data), a.data);
  const Orders orders = parse_orders(a.orders);
  const Method method = parse_method(a.method);
  auto [init, has_lambda] = parse_kernel_init(a.kernel_init);
  if (!has_lambda) init.lambda = noise_guess(data);
  if (method == Method::Pem && data.u[0] == 0.0) {
    std::cerr << "warning: u(1) = 0, H is singular; using the pseudoinverse summary\n";
  }

  TunerOptions tuner;
  tuner.restarts = a.tuner_restarts;
  tuner.pin_lambda = a.pin_lambda;
  const IdentificationResult id = identify(data, method, orders, init, tuner, a.restarts, a.seed, {}, Exec::Parallel);

  json config{{"command", "identify"},
              {"data", a.data},
              {"method", std::string(to_string(method))},
              {"orders", {orders.nb, orders.nf, orders.nk}},
              {"kernel_init", io::hyperparams_to_json(init)},
              {"pin_lambda", a.pin_lambda},
              {"restarts", a.restarts},
              {"tuner_restarts", a.tuner_restarts},
              {"seed", a.seed}};
  json out{{"config", config},
           {"decision", io::decision_to_json(id.decision)},
           {"posterior", io::posterior_to_json(id.posterior)}};
  if (id.tuning) out["tuning"] = io::tune_result_to_json(*id.tuning);
  if (id.decision.rank_deficient) std::cerr << "warning: weight matrix is rank deficient\n";
  io::write_file_atomic(a.out, dump(out));
  return 0;
}

// ---------------------------------------------------------------------------

struct TuneArgs {
  std::string data;
  std::string kernel_init = "100,0.8,0.7";
  bool pin_lambda = false;
  int restarts = 4;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_tune(const TuneArgs& a) {
  const Dataset data = io::dataset_from_csv(io::read_file(a.data), a.data);
  auto [init, has_lambda] = parse_kernel_init(a.kernel_init);
  if (!has_lambda) init.lambda = noise_guess(data);
  TunerOptions opts;
  opts.restarts = a.restarts;
  opts.pin_lambda = a.pin_lambda;
  opts.seed = a.seed;
  const TuneResult res = tune_hyperparameters(build_toeplitz(data.u), data.y, init, opts, Exec::Parallel);

  json out = io::hyperparams_to_json(res.params);
  out["log_likelihood"] = res.log_likelihood;
  out["init_log_likelihood"] = res.init_log_likelihood;
  out["config"] = {{"command", "tune"},   {"data", a.data},         {"kernel_init", io::hyperparams_to_json(init)},
                   {"restarts", a.restarts}, {"pin_lambda", a.pin_lambda}, {"seed", a.seed}};
  out["starts"] = io::tune_result_to_json(res)["starts"];
  io::write_file_atomic(a.out, dump(out));
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  std::string config;
  std::string out;
  std::optional<std::string> kind;
  std::optional<std::string> method;
  std::optional<std::string> orders;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<int> horizon;
  bool serial = false;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  ExperimentConfig cfg;
  std::string kind = "vary_N";
  if (!a.config.empty()) {
    const std::string text = io::read_file(a.config);
    const json j = io::parse_json(text, a.config);
    cfg = io::config_from_json(j, text, a.config);
    if (j.contains("kind")) {
      if (!j.at("kind").is_string()) throw io::FormatError(a.config + ": 'kind' must be a string");
      kind = j.at("kind").get<std::string>();
    }
  }
  if (a.kind) kind = *a.kind;
  if (a.method) cfg.method = parse_method(*a.method);
  if (a.orders) cfg.orders = parse_orders(*a.orders);
  if (a.seed) cfg.seed = *a.seed;
  if (a.replications) cfg.replications = *a.replications;
  if (a.horizon) cfg.horizon = *a.horizon;
  cfg.validate();

  const Exec exec = a.serial ? Exec::Serial : Exec::Parallel;
  std::vector<BenchmarkCell> cells;
  if (kind == "single") {
    cells.push_back({cfg.method, cfg.N, cfg.orders.nf, run_monte_carlo(cfg, exec)});
  } else {
    cells = benchmark_suite(parse_suite_kind(kind), cfg, exec);
  }

  json resolved = io::config_to_json(cfg);
  resolved["kind"] = kind;
  const fs::path dir(a.out);
  io::write_file_atomic(dir / "config.json", dump(resolved));
  io::write_file_atomic(dir / "replications.csv", io::replications_to_csv(cells));
  io::write_file_atomic(dir / "summary.json", dump(io::summary_to_json(cells)));
  io::write_file_atomic(dir / "plot_data.csv", io::plot_data_to_csv(cells));

  int failures = 0;
  for (const BenchmarkCell& c : cells) {
    const BoxSummary& s = c.distribution.summary;
    std::cout << to_string(c.method) << " N=" << c.N << " nf=" << c.nf << "  median=" << s.median
              << " iqr=" << s.iqr() << " frac>0=" << c.distribution.fraction_above(0.0)
              << " failures=" << c.distribution.failures << "\n";
    failures += c.distribution.failures;
  }
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string input;
  std::string out;
  std::string summary;
};

int cmd_report(const ReportArgs& a) {
  const auto rows = io::replications_from_csv(io::read_file(a.input), a.input);
  const auto cells = io::cells_from_rows(rows);
  io::write_file_atomic(a.out, io::plot_data_to_csv(cells));
  if (!a.summary.empty()) io::write_file_atomic(a.summary, dump(io::summary_to_json(cells)));
  io::write_file_atomic(a.out + ".config.json", dump(json{{"command", "report"}, {"input", a.input}, {"summary", a.summary}}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-theoretic identification of output-error models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a dataset from a rational model");
  s->add_option("--system", sim.system, "Model JSON file, or builtin:benchmark / builtin:example")->capture_default_str();
  s->add_option("--N", sim.N, "Number of samples")->capture_default_str();
  s->add_option("--input-variance", sim.input_variance)->capture_default_str();
  s->add_option("--noise-variance", sim.noise_variance)->capture_default_str();
  s->add_option("--input", sim.input, "white | impulse")->capture_default_str();
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out", sim.out, "Output CSV path")->required();

  IdentifyArgs id;
  auto* i = app.add_subcommand("identify", "Estimate an output-error model from a dataset");
  i->add_option("--data", id.data, "Dataset CSV (t,u,y)")->required();
  i->add_option("--orders", id.orders, "nb,nf,nk")->capture_default_str();
  i->add_option("--method", id.method, "pem | brm")->capture_default_str();
  i->add_option("--kernel-init", id.kernel_init, "c,alpha,rho[,lambda]")->capture_default_str();
  i->add_flag("--pin-lambda", id.pin_lambda, "Keep lambda fixed while tuning");
  i->add_option("--restarts", id.restarts, "Random starts of the risk minimizer")->capture_default_str();
  i->add_option("--tuner-restarts", id.tuner_restarts)->capture_default_str();
  i->add_option("--seed", id.seed)->capture_default_str();
  i->add_option("--out", id.out, "Decision JSON path")->required();

  TuneArgs tu;
  auto* t = app.add_subcommand("tune", "Tune DC kernel hyperparameters by marginal likelihood");
  t->add_option("--data", tu.data, "Dataset CSV (t,u,y)")->required();
  t->add_option("--kernel-init", tu.kernel_init, "c,alpha,rho[,lambda]")->capture_default_str();
  t->add_flag("--pin-lambda", tu.pin_lambda);
  t->add_option("--restarts", tu.restarts)->capture_default_str();
  t->add_option("--seed", tu.seed)->capture_default_str();
  t->add_option("--out", tu.out, "Hyperparameter JSON path")->required();

  BenchmarkArgs bm;
  auto* b = app.add_subcommand("benchmark", "Monte Carlo comparison of PEM and BRM");
  b->add_option("--config", bm.config, "Experiment config JSON");
  b->add_option("--out", bm.out, "Output directory")->required();
  b->add_option("--kind", bm.kind, "vary_N | vary_nf | single");
  b->add_option("--method", bm.method, "pem | brm (kind = single)");
  b->add_option("--orders", bm.orders, "nb,nf,nk");
  b->add_option("--seed", bm.seed);
  b->add_option("--replications", bm.replications);
  b->add_option("--horizon", bm.horizon, "Metric horizon T");
  b->add_flag("--serial", bm.serial, "Use the serial reference path");

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Box-plot summary from a per-replication CSV");
  r->add_option("--input", rp.input, "replications.csv")->required();
  r->add_option("--out", rp.out, "Plot-data CSV path")->required();
  r->add_option("--summary", rp.summary, "Optional summary JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_simulate(sim);
    if (*i) return cmd_identify(id);
    if (*t) return cmd_tune(tu);
    if (*b) return cmd_benchmark(bm);
    if (*r) return cmd_report(rp);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
