#include "pollnet/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pollnet/dataset.hpp"
#include "pollnet/metrics.hpp"
#include "pollnet/model_io.hpp"
#include "pollnet/network.hpp"

namespace pollnet {

namespace {

using nlohmann::json;

// Exact round-trip formatting keeps rerun artifacts byte-identical.
std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const auto prefix = [&](const char* what) { return std::string(name) + ": " + what; };
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(prefix(e.what()));
  } catch (const DataError& e) {
    throw DataError(prefix(e.what()));
  } catch (const NumericError& e) {
    throw NumericError(prefix(e.what()));
  }
}

FeatureSchema resolve_schema(const std::optional<std::filesystem::path>& schema_path) {
  if (!schema_path) return default_schema();
  std::ifstream in(*schema_path);
  if (!in) throw DataError("cannot read schema '" + schema_path->string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_schema(text.str());
}

std::ofstream open_artifact(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& history) {
  auto out = open_artifact(path);
  out << "epoch,train_mse,validation_mse,test_mse\n";
  for (const auto& record : history) {
    out << record.epoch << ',' << fmt(record.train_mse) << ',' << fmt(record.validation_mse) << ','
        << fmt(record.test_mse) << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path, const ErrorHistogram& histogram,
                         const std::vector<std::string>& subset_names) {
  auto out = open_artifact(path);
  out << "bin_lo,bin_hi";
  for (const auto& name : subset_names) out << ',' << name;
  out << '\n';
  const std::size_t bins = histogram.bin_edges.size() - 1;
  for (std::size_t b = 0; b < bins; ++b) {
    out << fmt(histogram.bin_edges[b]) << ',' << fmt(histogram.bin_edges[b + 1]);
    for (const auto& counts : histogram.counts) out << ',' << counts[b];
    out << '\n';
  }
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         const FeatureDef& target) {
  auto out = open_artifact(path);
  out << "true_class";
  for (const auto& category : target.categories) out << ',' << category.label;
  out << '\n';
  for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
    out << target.categories[static_cast<std::size_t>(r)].label;
    for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) out << ',' << cm.counts(r, c);
    out << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  auto out = open_artifact(path);
  out << "fpr,tpr\n";
  for (const auto& point : curve.points) {
    out << fmt(point.fpr) << ',' << fmt(point.tpr) << '\n';
  }
}

json confusion_to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) row.push_back(cm.counts(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Predictions {
  std::vector<int> truths;
  std::vector<int> preds;
  Eigen::MatrixXd out_act;
};

Predictions predictions_for(const Mlp& model, const EncodedDataset& data,
                            const std::vector<Eigen::Index>& indices) {
  Predictions p;
  p.truths.reserve(indices.size());
  p.preds.reserve(indices.size());
  const Eigen::MatrixXd inputs = detail::take_rows(data.inputs, indices);
  p.out_act = forward_batch<double>(model, inputs).out_act;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    p.truths.push_back(static_cast<int>(argmax(data.targets.row(indices[i]))));
    p.preds.push_back(static_cast<int>(argmax(p.out_act.row(static_cast<Eigen::Index>(i)))));
  }
  return p;
}

// Signed per-unit errors (target - output), pooled over output units.
std::vector<double> signed_errors(const Mlp& model, const EncodedDataset& data,
                                  const std::vector<Eigen::Index>& indices) {
  std::vector<double> errors;
  if (indices.empty()) return errors;
  const Eigen::MatrixXd inputs = detail::take_rows(data.inputs, indices);
  const Eigen::MatrixXd targets = detail::take_rows(data.targets, indices);
  const Eigen::MatrixXd diff = targets - forward_batch<double>(model, inputs).out_act;
  errors.reserve(static_cast<std::size_t>(diff.size()));
  for (Eigen::Index r = 0; r < diff.rows(); ++r) {
    for (Eigen::Index c = 0; c < diff.cols(); ++c) errors.push_back(diff(r, c));
  }
  return errors;
}

json roc_report(const RocSet& rocs, const FeatureDef& target,
                const std::optional<std::filesystem::path>& out_dir,
                std::vector<std::string>* artifact_names, json* curves_out) {
  json aucs = json::object();
  json curves = json::array();
  for (const auto& category : target.categories) aucs[category.label] = nullptr;
  for (const auto& curve : rocs.curves) {
    const auto& label = target.categories[static_cast<std::size_t>(curve.class_index)].label;
    aucs[label] = curve.auc;
    json points = json::array();
    for (const auto& point : curve.points) points.push_back({point.fpr, point.tpr});
    curves.push_back({{"class", label}, {"auc", curve.auc}, {"points", std::move(points)}});
    if (out_dir) {
      const std::string name = "roc_class_" + std::to_string(curve.class_index + 1) + ".csv";
      write_roc_csv(*out_dir / name, curve);
      if (artifact_names) artifact_names->push_back(name);
    }
  }
  if (curves_out) *curves_out = std::move(curves);
  return aucs;
}

json histogram_to_json(const ErrorHistogram& histogram,
                       const std::vector<std::string>& subset_names) {
  json j{{"bin_edges", histogram.bin_edges}};
  for (std::size_t s = 0; s < subset_names.size(); ++s) {
    j[subset_names[s]] = histogram.counts[s];
  }
  return j;
}

json config_echo(const RunConfig& config) {
  json echo{
      {"data", config.data ? json(config.data->string()) : json(nullptr)},
      {"schema", config.schema_path ? json(config.schema_path->string()) : json("embedded")},
      {"split_fractions", config.split_fractions},
      {"split_seed", config.split_seed},
      {"hidden", config.hidden},
      {"init_seed", config.init_seed},
      {"learning_rate", config.train.learning_rate},
      {"max_epochs", config.train.max_epochs},
      {"max_fail", config.train.max_fail},
      {"train_seed", config.train.seed},
      {"target_mse", config.train.target_mse},
      {"histogram_bins", config.histogram_bins},
      {"out", config.out_dir.string()},
  };
  if (config.synth) {
    echo["synth"] = {{"n", config.synth->n},
                     {"seed", config.synth->seed},
                     {"rule", config.synth->rule},
                     {"noise", config.synth->noise}};
  } else {
    echo["synth"] = nullptr;
  }
  return echo;
}

std::vector<std::string> field_list(const std::string& spec, std::size_t expected,
                                    const std::string& what) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = spec.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(spec.substr(start));
      break;
    }
    fields.push_back(spec.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() != expected) {
    throw UsageError(what + ": expected " + std::to_string(expected) + " comma-separated fields");
  }
  return fields;
}

double parse_double_field(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
}

std::uint64_t parse_uint_field(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not a non-negative integer");
  }
}

}  // namespace

SynthSpec parse_synth_spec(const std::string& spec) {
  const auto fields = field_list(spec, 4, "--synth");
  SynthSpec out;
  out.n = static_cast<std::size_t>(parse_uint_field(fields[0], "--synth n"));
  out.seed = parse_uint_field(fields[1], "--synth seed");
  out.rule = fields[2];
  out.noise = parse_double_field(fields[3], "--synth noise");
  return out;
}

std::array<double, 3> parse_split_fractions(const std::string& spec) {
  const auto fields = field_list(spec, 3, "--split");
  std::array<double, 3> fractions;
  for (std::size_t i = 0; i < 3; ++i) {
    fractions[i] = parse_double_field(fields[i], "--split");
  }
  return fractions;
}

nlohmann::json cmd_train(const RunConfig& config) {
  if (config.data.has_value() == config.synth.has_value()) {
    throw UsageError("config: exactly one of --data and --synth is required");
  }
  if (config.out_dir.empty()) throw UsageError("config: --out directory is required");
  config.train.check();
  const FeatureSchema schema = stage("schema", [&] { return resolve_schema(config.schema_path); });

  Dataset raw = stage("load", [&] {
    if (config.data) {
      std::ifstream in(*config.data);
      if (!in) throw DataError("cannot read '" + config.data->string() + "'");
      return load_csv(in, schema);
    }
    return synthesize(schema, config.synth->n, config.synth->seed,
                      planted_rule(schema, config.synth->rule), config.synth->noise);
  });

  const Dataset dataset = stage("dedupe", [&] { return dedupe(raw); });
  const EncodedDataset encoded = stage("encode", [&] { return encode(dataset); });
  const SplitIndices indices = stage("split", [&] {
    return split(encoded.rows(), config.split_fractions, config.split_seed);
  });
  const Mlp initial = stage("init", [&] {
    return init(schema.feature_count(), config.hidden, schema.class_count(), config.init_seed);
  });
  const TrainResult result =
      stage("train", [&] { return train(initial, encoded, indices, config.train); });

  const EvalStats test_stats =
      stage("evaluate", [&] { return evaluate(result.model, encoded, indices.test); });
  const Predictions test_pred = predictions_for(result.model, encoded, indices.test);
  const ConfusionMatrix cm =
      confusion(test_pred.truths, test_pred.preds, schema.class_count());
  const RocSet rocs = multi_roc(test_pred.out_act, test_pred.truths, schema.class_count());
  const ErrorHistogram histogram =
      error_histogram({signed_errors(result.model, encoded, indices.train),
                       signed_errors(result.model, encoded, indices.validation),
                       signed_errors(result.model, encoded, indices.test)},
                      config.histogram_bins);

  return stage("report", [&] {
    std::filesystem::create_directories(config.out_dir);
    save_model(config.out_dir / "model.json", result.model,
               ModelProvenance{config.init_seed});
    write_history_csv(config.out_dir / "history.csv", result.history);
    write_histogram_csv(config.out_dir / "error_histogram.csv", histogram,
                        {"train", "validation", "test"});
    write_confusion_csv(config.out_dir / "confusion.csv", cm, schema.target);

    std::vector<std::string> roc_files;
    json roc_curves;
    json aucs = roc_report(rocs, schema.target, config.out_dir, &roc_files, &roc_curves);

    std::vector<std::int64_t> class_counts(static_cast<std::size_t>(schema.class_count()), 0);
    for (const auto& record : dataset.records) {
      class_counts[static_cast<std::size_t>(record.target_id - 1)] += 1;
    }

    const EpochRecord& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
    json report{
        {"config", config_echo(config)},
        {"dataset",
         {{"records_loaded", raw.records.size()},
          {"duplicates_removed", raw.records.size() - dataset.records.size()},
          {"records", dataset.records.size()},
          {"split_sizes",
           {indices.train.size(), indices.validation.size(), indices.test.size()}},
          {"class_counts", class_counts}}},
        {"training",
         {{"best_epoch", result.best_epoch},
          {"stop_epoch", result.stop_epoch},
          {"stop_reason", to_string(result.stop_reason)},
          {"best_validation_mse", best.validation_mse},
          {"final_train_mse", result.history.back().train_mse}}},
        {"test",
         {{"count", indices.test.size()},
          {"mse", test_stats.mse},
          {"accuracy", test_stats.accuracy},
          {"confusion", confusion_to_json(cm)},
          {"auc", aucs},
          {"roc", roc_curves},
          {"missing_roc_classes", rocs.missing_classes}}},
        {"error_histogram", histogram_to_json(histogram, {"train", "validation", "test"})},
        {"artifacts",
         {{"model", "model.json"},
          {"history", "history.csv"},
          {"error_histogram", "error_histogram.csv"},
          {"confusion", "confusion.csv"},
          {"roc", roc_files}}},
    };
    auto out = open_artifact(config.out_dir / "report.json");
    out << report.dump(2) << '\n';
    return report;
  });
}

nlohmann::json cmd_eval(const std::filesystem::path& model_path,
                        const std::filesystem::path& data_path,
                        const std::optional<std::filesystem::path>& schema_path,
                        const std::optional<std::filesystem::path>& out_dir) {
  const FeatureSchema schema = stage("schema", [&] { return resolve_schema(schema_path); });
  const Mlp model = stage("model", [&] { return load_model(model_path); });
  if (model.inputs() != schema.feature_count()) {
    throw UsageError("eval: model has " + std::to_string(model.inputs()) +
                     " inputs but the schema defines " + std::to_string(schema.feature_count()) +
                     " features");
  }
  if (model.classes() != schema.class_count()) {
    throw UsageError("eval: model has " + std::to_string(model.classes()) +
                     " outputs but the schema defines " + std::to_string(schema.class_count()) +
                     " classes");
  }
  const Dataset dataset = stage("load", [&] {
    std::ifstream in(data_path);
    if (!in) throw DataError("cannot read '" + data_path.string() + "'");
    return load_csv(in, schema);
  });
  const EncodedDataset encoded = stage("encode", [&] { return encode(dataset); });

  std::vector<Eigen::Index> all(static_cast<std::size_t>(encoded.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  const EvalStats stats = stage("evaluate", [&] { return evaluate(model, encoded, all); });
  const Predictions pred = predictions_for(model, encoded, all);
  const ConfusionMatrix cm = confusion(pred.truths, pred.preds, schema.class_count());
  const RocSet rocs = multi_roc(pred.out_act, pred.truths, schema.class_count());

  return stage("report", [&] {
    std::vector<std::string> roc_files;
    json roc_curves;
    if (out_dir) std::filesystem::create_directories(*out_dir);
    json aucs = roc_report(rocs, schema.target, out_dir, &roc_files, &roc_curves);
    json report{
        {"model", model_path.string()},
        {"data", data_path.string()},
        {"records", dataset.records.size()},
        {"mse", stats.mse},
        {"accuracy", stats.accuracy},
        {"confusion", confusion_to_json(cm)},
        {"auc", aucs},
        {"roc", roc_curves},
        {"missing_roc_classes", rocs.missing_classes},
    };
    if (out_dir) {
      write_confusion_csv(*out_dir / "confusion.csv", cm, schema.target);
      report["artifacts"] = {{"confusion", "confusion.csv"}, {"roc", roc_files}};
      auto out = open_artifact(*out_dir / "report.json");
      out << report.dump(2) << '\n';
    }
    return report;
  });
}

void cmd_synth(const SynthSpec& spec, const std::optional<std::filesystem::path>& schema_path,
               const std::filesystem::path& out_path) {
  const FeatureSchema schema = stage("schema", [&] { return resolve_schema(schema_path); });
  const Dataset dataset = stage("synth", [&] {
    return synthesize(schema, spec.n, spec.seed, planted_rule(schema, spec.rule), spec.noise);
  });
  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  auto out = open_artifact(out_path);
  write_csv(out, dataset);
}

std::string cmd_schema_dump(const std::optional<std::filesystem::path>& schema_path) {
  return dump_schema(resolve_schema(schema_path));
}

void cmd_schema_validate(const std::filesystem::path& schema_path) {
  resolve_schema(schema_path);
}

}  // namespace pollnet
