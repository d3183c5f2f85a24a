#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pollnet/commands.hpp"
#include "pollnet/errors.hpp"

namespace {

std::optional<std::filesystem::path> optional_path(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return std::filesystem::path(value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pollnet - train and evaluate a small tan-sigmoid network over categorical survey records"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a network and emit report artifacts");
  std::string data_path, synth_spec, schema_path, split_spec = "0.70,0.15,0.15", out_dir;
  pollnet::RunConfig run;
  train_cmd->add_option("--data", data_path, "CSV data file (exclusive with --synth)");
  train_cmd->add_option("--synth", synth_spec,
                        "Synthetic source as n,seed,rule,noise (e.g. 100,7,clamp4,0.05)");
  train_cmd->add_option("--schema", schema_path, "Schema JSON file (default: embedded schema)");
  train_cmd->add_option("--split", split_spec, "Train,validation,test fractions")
      ->capture_default_str();
  train_cmd->add_option("--split-seed", run.split_seed, "Seed of the split permutation")
      ->capture_default_str();
  train_cmd->add_option("--hidden", run.hidden, "Hidden layer width")->capture_default_str();
  train_cmd->add_option("--init-seed", run.init_seed, "Seed of the weight initialization")
      ->capture_default_str();
  train_cmd->add_option("--lr", run.train.learning_rate, "Learning rate")->capture_default_str();
  train_cmd->add_option("--max-epochs", run.train.max_epochs, "Epoch cap")->capture_default_str();
  train_cmd
      ->add_option("--max-fail", run.train.max_fail,
                   "Consecutive non-improving validation epochs before stopping")
      ->capture_default_str();
  train_cmd->add_option("--train-seed", run.train.seed, "Seed echoed into the run config")
      ->capture_default_str();
  train_cmd
      ->add_option("--target-mse", run.train.target_mse,
                   "Stop once training MSE reaches this value (0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--bins", run.histogram_bins, "Error histogram bin count")
      ->capture_default_str();
  train_cmd->add_option("--out", out_dir, "Artifact directory")->required();
  train_cmd->callback([&] {
    run.data = optional_path(data_path);
    if (!synth_spec.empty()) run.synth = pollnet::parse_synth_spec(synth_spec);
    run.schema_path = optional_path(schema_path);
    run.split_fractions = pollnet::parse_split_fractions(split_spec);
    run.out_dir = out_dir;
    std::cout << pollnet::cmd_train(run).dump(2) << '\n';
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model over a whole data file");
  std::string eval_model, eval_data, eval_schema, eval_out;
  eval_cmd->add_option("--model", eval_model, "Model JSON file")->required();
  eval_cmd->add_option("--data", eval_data, "CSV data file")->required();
  eval_cmd->add_option("--schema", eval_schema, "Schema JSON file (default: embedded schema)");
  eval_cmd->add_option("--out", eval_out, "Optional artifact directory");
  eval_cmd->callback([&] {
    std::cout << pollnet::cmd_eval(eval_model, eval_data, optional_path(eval_schema),
                                   optional_path(eval_out))
                     .dump(2)
              << '\n';
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic CSV dataset");
  pollnet::SynthSpec spec;
  std::string synth_schema, synth_out;
  synth_cmd->add_option("-n,--n", spec.n, "Record count")->required();
  synth_cmd->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--rule", spec.rule, "Planted rule id (clampN or sumthresh)")
      ->capture_default_str();
  synth_cmd->add_option("--noise", spec.noise, "Label flip probability in [0,1)")
      ->capture_default_str();
  synth_cmd->add_option("--schema", synth_schema, "Schema JSON file (default: embedded schema)");
  synth_cmd->add_option("--out", synth_out, "Output CSV path")->required();
  synth_cmd->callback(
      [&] { pollnet::cmd_synth(spec, optional_path(synth_schema), synth_out); });

  // schema
  auto* schema_cmd = app.add_subcommand("schema", "Dump or validate schema documents");
  schema_cmd->require_subcommand(1);
  auto* dump_cmd = schema_cmd->add_subcommand("dump", "Print a schema document");
  std::string dump_schema_path;
  dump_cmd->add_option("--schema", dump_schema_path,
                       "Schema JSON file (default: embedded schema)");
  dump_cmd->callback(
      [&] { std::cout << pollnet::cmd_schema_dump(optional_path(dump_schema_path)); });
  auto* validate_cmd = schema_cmd->add_subcommand("validate", "Check a schema document");
  std::string validate_path;
  validate_cmd->add_option("path", validate_path, "Schema JSON file")->required();
  validate_cmd->callback([&] {
    pollnet::cmd_schema_validate(validate_path);
    std::cout << "ok\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pollnet::NumericError& e) {
    std::cerr << "pollnet: " << e.what() << '\n';
    return 3;
  } catch (const pollnet::DataError& e) {
    std::cerr << "pollnet: " << e.what() << '\n';
    return 2;
  } catch (const pollnet::UsageError& e) {
    std::cerr << "pollnet: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pollnet: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
