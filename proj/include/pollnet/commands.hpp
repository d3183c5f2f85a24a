#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "pollnet/training.hpp"

namespace pollnet {

struct SynthSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string rule = "clamp4";
  double noise = 0.0;
};

// Fully resolved run description: one data source (file XOR synth), every
// seed explicit. The report echoes this verbatim, so a rerun needs nothing
// else.
struct RunConfig {
  std::optional<std::filesystem::path> data;
  std::optional<SynthSpec> synth;
  std::optional<std::filesystem::path> schema_path;
  std::array<double, 3> split_fractions{0.70, 0.15, 0.15};
  std::uint64_t split_seed = 0;
  Eigen::Index hidden = 10;
  std::uint64_t init_seed = 0;
  TrainConfig train;
  int histogram_bins = 20;
  std::filesystem::path out_dir;
};

// load -> dedupe -> encode -> split -> init -> train -> evaluate. Writes
// model.json, history.csv, error_histogram.csv, confusion.csv, one
// roc_class_<id>.csv per target class and report.json into out_dir; returns
// the report.
nlohmann::json cmd_train(const RunConfig& config);

// Confusion matrix, accuracy and ROC curves of a saved model over a whole
// data file (no split). Artifacts are written when out_dir is given.
nlohmann::json cmd_eval(const std::filesystem::path& model_path,
                        const std::filesystem::path& data_path,
                        const std::optional<std::filesystem::path>& schema_path,
                        const std::optional<std::filesystem::path>& out_dir);

// Writes a schema-conformant synthetic CSV.
void cmd_synth(const SynthSpec& spec, const std::optional<std::filesystem::path>& schema_path,
               const std::filesystem::path& out_path);

std::string cmd_schema_dump(const std::optional<std::filesystem::path>& schema_path);

// Throws DataError with diagnostics when the document is malformed.
void cmd_schema_validate(const std::filesystem::path& schema_path);

// `spec` is "n,seed,rule,noise", e.g. "100,7,clamp4,0.05".
SynthSpec parse_synth_spec(const std::string& spec);

std::array<double, 3> parse_split_fractions(const std::string& spec);

}  // namespace pollnet
