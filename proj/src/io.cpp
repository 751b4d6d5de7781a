#include "sysid/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sysid::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(where + ": expected a number, got '" + s + "'");
  }
  return v;
}

long parse_integer(const std::string& s, const std::string& where) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(where + ": expected an integer, got '" + s + "'");
  }
  return v;
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<int, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    std::string t = trim(line);
    if (!t.empty()) out.emplace_back(number, std::move(t));
  }
  return out;
}

Vector vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw FormatError(std::string("'") + name + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string("'") + name + "' must contain only numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string sanitize_status(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "t,u,y\n";
  for (int t = 0; t < data.size(); ++t) {
    out += std::to_string(t + 1) + "," + format_double(data.u[t]) + "," + format_double(data.y[t]) + "\n";
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text, const std::string& origin) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw FormatError(origin + ": empty dataset");
  const auto header = split_fields(lines[0].second);
  if (header != std::vector<std::string>{"t", "u", "y"}) {
    throw FormatError(origin + ":" + std::to_string(lines[0].first) + ": expected header 't,u,y'");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  if (n < 1) throw FormatError(origin + ": dataset has no rows");
  Vector u(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [number, line] = lines[static_cast<std::size_t>(i) + 1];
    const std::string where = origin + ":" + std::to_string(number);
    const auto fields = split_fields(line);
    if (fields.size() != 3) throw FormatError(where + ": expected 3 fields");
    if (parse_integer(fields[0], where) != i + 1) throw FormatError(where + ": t must run 1, 2, ..., N");
    u[i] = parse_number(fields[1], where);
    y[i] = parse_number(fields[2], where);
  }
  return Dataset(std::move(u), std::move(y));
}

json model_to_json(const RationalModel& m) {
  json j;
  j["b"] = vector_to_json(m.b);
  j["f"] = vector_to_json(m.f);
  j["nk"] = m.nk;
  return j;
}

RationalModel model_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("model must be a JSON object");
  if (!j.contains("b")) throw FormatError("model is missing 'b'");
  const Vector b = vector_from_json(j.at("b"), "b");
  const Vector f = j.contains("f") ? vector_from_json(j.at("f"), "f") : Vector(0);
  int nk = 0;
  if (j.contains("nk")) {
    if (!j.at("nk").is_number_integer()) throw FormatError("'nk' must be an integer");
    nk = j.at("nk").get<int>();
  }
  try {
    return RationalModel(b, f, nk);
  } catch (const std::invalid_argument& ex) {
    throw FormatError(ex.what());
  }
}

json hyperparams_to_json(const DcHyperParams& eta) {
  return json{{"c", eta.c}, {"alpha", eta.alpha}, {"rho", eta.rho}, {"lambda", eta.lambda}};
}

DcHyperParams hyperparams_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("hyperparameters must be a JSON object");
  DcHyperParams eta;
  auto get = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw FormatError(std::string("'") + key + "' must be a number");
    dst = j.at(key).get<double>();
  };
  get("c", eta.c);
  get("alpha", eta.alpha);
  get("rho", eta.rho);
  get("lambda", eta.lambda);
  return eta;
}

json posterior_to_json(const PosteriorSummary& p) {
  json j;
  j["mean"] = vector_to_json(p.mean);
  if (auto band = p.band()) j["band"] = vector_to_json(*band);
  j["rank_deficient"] = p.rank_deficient;
  return j;
}

json decision_to_json(const Decision& d) {
  json j;
  j["model"] = model_to_json(d.model);
  j["objective"] = d.objective;
  if (d.constant) j["risk_constant"] = *d.constant;
  j["rank_deficient"] = d.rank_deficient;
  j["best_start"] = d.best_start;
  json starts = json::array();
  for (const StartReport& s : d.starts) {
    starts.push_back({{"index", s.index},
                      {"user_init", s.user_init},
                      {"objective", s.objective},
                      {"iterations", s.iterations},
                      {"status", s.diverged() ? std::string("diverged") : std::string(to_string(s.reason))}});
  }
  j["starts"] = std::move(starts);
  return j;
}

json tune_result_to_json(const TuneResult& t) {
  json j;
  j["hyperparameters"] = hyperparams_to_json(t.params);
  j["log_likelihood"] = t.log_likelihood;
  j["init_log_likelihood"] = t.init_log_likelihood;
  json starts = json::array();
  for (const TuneStart& s : t.starts) {
    starts.push_back({{"index", s.index},
                      {"init", hyperparams_to_json(s.init)},
                      {"result", hyperparams_to_json(s.result)},
                      {"log_likelihood", s.log_likelihood},
                      {"iterations", s.iterations},
                      {"status", std::string(to_string(s.reason))}});
  }
  j["starts"] = std::move(starts);
  return j;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["system"] = model_to_json(c.system);
  j["N"] = c.N;
  j["input_variance"] = c.input_variance;
  j["noise_variance"] = c.noise_variance;
  j["orders"] = {c.orders.nb, c.orders.nf, c.orders.nk};
  j["method"] = std::string(to_string(c.method));
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["horizon"] = c.horizon;
  j["restarts"] = c.restarts;
  j["kernel_init"] = hyperparams_to_json(c.kernel_init);
  j["kernel_init_lambda_from_data"] = c.kernel_init_lambda_from_data;
  j["tuner"] = {{"max_iterations", c.tuner.max_iterations},
                {"tolerance", c.tuner.tolerance},
                {"restarts", c.tuner.restarts},
                {"perturbation", c.tuner.perturbation},
                {"pin_lambda", c.tuner.pin_lambda}};
  j["risk"] = {{"max_iterations", c.risk.max_iterations}, {"gradient_tolerance", c.risk.gradient_tolerance}};
  return j;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    // Byte offset -> line number.
    const std::size_t upto = std::min<std::size_t>(ex.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw FormatError(origin + ":" + std::to_string(line) + ": " + ex.what());
  }
}

namespace {

std::string locate(const std::string& source, const std::string& origin, const std::string& key) {
  const auto pos = source.find("\"" + key + "\"");
  if (pos == std::string::npos) return origin;
  const auto line = 1 + std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
  return origin + ":" + std::to_string(line);
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::string& source, const std::string& origin) {
  if (!j.is_object()) throw FormatError(origin + ": config must be a JSON object");
  static const std::set<std::string> known{"kind", "system", "N", "input_variance", "noise_variance", "orders",
                                           "method", "replications", "seed", "horizon", "restarts", "kernel_init",
                                           "kernel_init_lambda_from_data", "tuner", "risk"};
  ExperimentConfig c;
  std::string current;
  auto where = [&] { return locate(source, origin, current); };
  try {
    for (const auto& [key, value] : j.items()) {
      current = key;
      if (!known.count(key)) throw FormatError("unknown key '" + key + "'");
    }
    auto number = [&](const char* key, auto& dst) {
      current = key;
      if (!j.contains(key)) return;
      using T = std::decay_t<decltype(dst)>;
      if constexpr (std::is_integral_v<T>) {
        if (!j.at(key).is_number_integer()) throw FormatError(std::string("'") + key + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (j.at(key).is_number_unsigned()) dst = j.at(key).get<T>();
          else if (j.at(key).get<long long>() < 0) throw FormatError(std::string("'") + key + "' must be nonnegative");
          else dst = static_cast<T>(j.at(key).get<long long>());
        } else {
          dst = j.at(key).get<T>();
        }
      } else {
        if (!j.at(key).is_number()) throw FormatError(std::string("'") + key + "' must be a number");
        dst = j.at(key).get<T>();
      }
    };
    if (j.contains("system")) {
      current = "system";
      c.system = model_from_json(j.at("system"));
    }
    number("N", c.N);
    number("input_variance", c.input_variance);
    number("noise_variance", c.noise_variance);
    if (j.contains("orders")) {
      current = "orders";
      const json& o = j.at("orders");
      if (!o.is_array() || o.size() != 3 || !o[0].is_number_integer() || !o[1].is_number_integer() ||
          !o[2].is_number_integer()) {
        throw FormatError("'orders' must be [nb, nf, nk]");
      }
      c.orders = {o[0].get<int>(), o[1].get<int>(), o[2].get<int>()};
    }
    if (j.contains("method")) {
      current = "method";
      if (!j.at("method").is_string()) throw FormatError("'method' must be \"pem\" or \"brm\"");
      c.method = parse_method(j.at("method").get<std::string>());
    }
    number("replications", c.replications);
    number("seed", c.seed);
    number("horizon", c.horizon);
    number("restarts", c.restarts);
    if (j.contains("kernel_init")) {
      current = "kernel_init";
      c.kernel_init = hyperparams_from_json(j.at("kernel_init"));
      if (j.at("kernel_init").contains("lambda") && !j.contains("kernel_init_lambda_from_data")) {
        c.kernel_init_lambda_from_data = false;
      }
    }
    if (j.contains("kernel_init_lambda_from_data")) {
      current = "kernel_init_lambda_from_data";
      if (!j.at(current).is_boolean()) throw FormatError("'kernel_init_lambda_from_data' must be a boolean");
      c.kernel_init_lambda_from_data = j.at(current).get<bool>();
    }
    if (j.contains("tuner")) {
      current = "tuner";
      const json& t = j.at("tuner");
      if (!t.is_object()) throw FormatError("'tuner' must be an object");
      for (const auto& [key, value] : t.items()) {
        if (key == "max_iterations" && value.is_number_integer()) c.tuner.max_iterations = value.get<int>();
        else if (key == "tolerance" && value.is_number()) c.tuner.tolerance = value.get<double>();
        else if (key == "restarts" && value.is_number_integer()) c.tuner.restarts = value.get<int>();
        else if (key == "perturbation" && value.is_number()) c.tuner.perturbation = value.get<double>();
        else if (key == "pin_lambda" && value.is_boolean()) c.tuner.pin_lambda = value.get<bool>();
        else {
          current = key;
          throw FormatError("invalid tuner entry '" + key + "'");
        }
      }
    }
    if (j.contains("risk")) {
      current = "risk";
      const json& r = j.at("risk");
      if (!r.is_object()) throw FormatError("'risk' must be an object");
      for (const auto& [key, value] : r.items()) {
        if (key == "max_iterations" && value.is_number_integer()) c.risk.max_iterations = value.get<int>();
        else if (key == "gradient_tolerance" && value.is_number()) c.risk.gradient_tolerance = value.get<double>();
        else {
          current = key;
          throw FormatError("invalid risk entry '" + key + "'");
        }
      }
    }
    current.clear();
    c.validate();
  } catch (const std::invalid_argument& ex) {
    // Field-level validation messages start with the field name.
    std::string msg = ex.what();
    std::string field = current;
    if (field.empty()) {
      for (const char* k : {"replications", "horizon", "restarts", "input_variance", "noise_variance", "N",
                            "orders", "kernel_init", "tuner", "max_iterations"}) {
        if (msg.find(k) != std::string::npos) {
          field = k;
          break;
        }
      }
    }
    throw FormatError(locate(source, origin, field) + ": " + msg);
  } catch (const FormatError& ex) {
    throw FormatError(where() + ": " + ex.what());
  } catch (const json::exception& ex) {
    throw FormatError(where() + ": " + ex.what());
  }
  return c;
}

std::string replications_to_csv(const std::vector<BenchmarkCell>& cells) {
  std::string out = "replication,method,N,nf,error,status\n";
  for (const BenchmarkCell& cell : cells) {
    for (const ReplicationResult& r : cell.distribution.records) {
      out += std::to_string(r.index) + "," + std::string(to_string(cell.method)) + "," + std::to_string(cell.N) +
             "," + std::to_string(cell.nf) + "," + format_double(r.error) + "," + sanitize_status(r.status) + "\n";
    }
  }
  return out;
}

std::vector<ReplicationRow> replications_from_csv(const std::string& text, const std::string& origin) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw FormatError(origin + ": empty file");
  if (split_fields(lines[0].second) != std::vector<std::string>{"replication", "method", "N", "nf", "error", "status"}) {
    throw FormatError(origin + ":" + std::to_string(lines[0].first) +
                      ": expected header 'replication,method,N,nf,error,status'");
  }
  std::vector<ReplicationRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = origin + ":" + std::to_string(lines[i].first);
    const auto f = split_fields(lines[i].second);
    if (f.size() != 6) throw FormatError(where + ": expected 6 fields");
    ReplicationRow r;
    r.replication = static_cast<int>(parse_integer(f[0], where));
    try {
      r.method = parse_method(f[1]);
    } catch (const std::invalid_argument& ex) {
      throw FormatError(where + ": " + ex.what());
    }
    r.N = static_cast<int>(parse_integer(f[2], where));
    r.nf = static_cast<int>(parse_integer(f[3], where));
    r.error = parse_number(f[4], where);
    r.status = f[5];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<BenchmarkCell> cells_from_rows(const std::vector<ReplicationRow>& rows) {
  std::vector<BenchmarkCell> cells;
  std::vector<std::vector<ReplicationResult>> records;
  for (const ReplicationRow& row : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const BenchmarkCell& c) {
      return c.method == row.method && c.N == row.N && c.nf == row.nf;
    });
    std::size_t idx = static_cast<std::size_t>(it - cells.begin());
    if (it == cells.end()) {
      cells.push_back({row.method, row.N, row.nf, {}});
      records.emplace_back();
    }
    records[idx].push_back({row.replication, row.error, row.status == "ok", row.status});
  }
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].distribution = aggregate(std::move(records[i]));
  return cells;
}

std::string plot_data_to_csv(const std::vector<BenchmarkCell>& cells) {
  std::string out = "method,N,nf,min,q1,median,q3,max\n";
  for (const BenchmarkCell& c : cells) {
    const BoxSummary& s = c.distribution.summary;
    out += std::string(to_string(c.method)) + "," + std::to_string(c.N) + "," + std::to_string(c.nf) + "," +
           format_double(s.min) + "," + format_double(s.q1) + "," + format_double(s.median) + "," +
           format_double(s.q3) + "," + format_double(s.max) + "\n";
  }
  return out;
}

json summary_to_json(const std::vector<BenchmarkCell>& cells) {
  json arr = json::array();
  for (const BenchmarkCell& c : cells) {
    const BoxSummary& s = c.distribution.summary;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    arr.push_back({{"method", std::string(to_string(c.method))},
                   {"N", c.N},
                   {"nf", c.nf},
                   {"replications", c.distribution.records.size()},
                   {"failures", c.distribution.failures},
                   {"min", num(s.min)},
                   {"q1", num(s.q1)},
                   {"median", num(s.median)},
                   {"q3", num(s.q3)},
                   {"max", num(s.max)},
                   {"mean", num(s.mean)},
                   {"iqr", num(s.iqr())},
                   {"fraction_above_zero", c.distribution.fraction_above(0.0)}});
  }
  return json{{"cells", std::move(arr)}};
}

}  // namespace sysid::io
