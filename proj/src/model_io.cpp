#include "pollnet/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "pollnet/errors.hpp"

namespace pollnet {

namespace {

constexpr const char* kFormat = "pollnet-model";
constexpr int kVersion = 1;

std::string hex_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  return buffer;
}

double parse_hex_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + text.size() || text.empty()) {
    throw DataError("model: '" + text + "' is not a float literal");
  }
  return value;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(hex_double(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError("model: '" + name + "' must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("model: '" + name + "' row " + std::to_string(r) + " must have " +
                      std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = parse_hex_double(row.at(static_cast<std::size_t>(c)).get<std::string>());
      if (!std::isfinite(m(r, c))) {
        throw DataError("model: non-finite entry in '" + name + "'");
      }
    }
  }
  return m;
}

}  // namespace

void save_model(std::ostream& out, const Mlp& mlp, const ModelProvenance& provenance) {
  nlohmann::json j{
      {"format", kFormat},
      {"version", kVersion},
      {"inputs", mlp.inputs()},
      {"hidden", mlp.hidden()},
      {"classes", mlp.classes()},
      {"w_hidden", matrix_to_json(mlp.w_hidden)},
      {"b_hidden", matrix_to_json(mlp.b_hidden)},
      {"w_out", matrix_to_json(mlp.w_out)},
      {"b_out", matrix_to_json(mlp.b_out)},
  };
  if (provenance.init_seed) j["init_seed"] = *provenance.init_seed;
  out << j.dump(2) << '\n';
}

void save_model(const std::filesystem::path& path, const Mlp& mlp,
                const ModelProvenance& provenance) {
  std::ofstream out(path);
  if (!out) throw DataError("model: cannot write '" + path.string() + "'");
  save_model(out, mlp, provenance);
}

Mlp load_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  try {
    if (j.value("format", "") != kFormat) {
      throw DataError("model: unrecognized document format");
    }
    const auto inputs = j.at("inputs").get<Eigen::Index>();
    const auto hidden = j.at("hidden").get<Eigen::Index>();
    const auto classes = j.at("classes").get<Eigen::Index>();
    if (inputs < 1 || hidden < 1 || classes < 1) {
      throw DataError("model: layer sizes must be positive");
    }
    Mlp mlp;
    mlp.w_hidden = matrix_from_json(j.at("w_hidden"), hidden, inputs, "w_hidden");
    mlp.b_hidden = matrix_from_json(j.at("b_hidden"), hidden, 1, "b_hidden");
    mlp.w_out = matrix_from_json(j.at("w_out"), classes, hidden, "w_out");
    mlp.b_out = matrix_from_json(j.at("b_out"), classes, 1, "b_out");
    return mlp;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

Mlp load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model: cannot read '" + path.string() + "'");
  return load_model(in);
}

}  // namespace pollnet
