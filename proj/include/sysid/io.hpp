#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysid/experiment.hpp"
#include "sysid/kernel.hpp"
#include "sysid/lti.hpp"
#include "sysid/posterior.hpp"
#include "sysid/risk.hpp"

namespace sysid::io {

using json = nlohmann::ordered_json;

/// Malformed input; the message carries file/line context where available.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// Dataset CSV: header `t,u,y`, t = 1..N.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text, const std::string& origin = "<csv>");

// {"b": [...], "f": [...], "nk": int}
json model_to_json(const RationalModel& m);
RationalModel model_from_json(const json& j);

// {"c": .., "alpha": .., "rho": .., "lambda": ..}
json hyperparams_to_json(const DcHyperParams& eta);
DcHyperParams hyperparams_from_json(const json& j);

/// Mean vector plus `band` = 2 sqrt(diag(W^-1)) when W is invertible.
json posterior_to_json(const PosteriorSummary& p);

/// Model, objective, optional risk constant, and the per-start log.
json decision_to_json(const Decision& d);

json tune_result_to_json(const TuneResult& t);

json config_to_json(const ExperimentConfig& c);
/// Missing keys take ExperimentConfig defaults; `source` is the raw text,
/// used to attach line numbers to validation errors.
ExperimentConfig config_from_json(const json& j, const std::string& source = "", const std::string& origin = "<config>");
json parse_json(const std::string& text, const std::string& origin);

// Per-replication CSV: replication,method,N,nf,error,status
std::string replications_to_csv(const std::vector<BenchmarkCell>& cells);

struct ReplicationRow {
  int replication = 0;
  Method method = Method::Pem;
  int N = 0;
  int nf = 0;
  double error = 0.0;
  std::string status;
};
std::vector<ReplicationRow> replications_from_csv(const std::string& text, const std::string& origin = "<csv>");

/// Regroups rows into cells (ordered by first appearance).
std::vector<BenchmarkCell> cells_from_rows(const std::vector<ReplicationRow>& rows);

// Box-plot data: method,N,nf,min,q1,median,q3,max
std::string plot_data_to_csv(const std::vector<BenchmarkCell>& cells);

json summary_to_json(const std::vector<BenchmarkCell>& cells);

}  // namespace sysid::io
