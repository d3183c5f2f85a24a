#include "pollnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

#include "pollnet/rng.hpp"

namespace pollnet {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

int parse_id(const std::string& cell, std::size_t row, const std::string& column) {
  int value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || cell.empty()) {
    throw DataError("row " + std::to_string(row) + ", column '" + column + "': cell '" + cell +
                    "' is not an integer");
  }
  return value;
}

void check_range(int value, const FeatureDef& def, std::size_t row) {
  if (value < 1 || value > def.category_count()) {
    throw DataError("row " + std::to_string(row) + ", column '" + def.name + "': id " +
                    std::to_string(value) + " outside valid ids 1.." +
                    std::to_string(def.category_count()));
  }
}

}  // namespace

Dataset load_csv(std::istream& in, const FeatureSchema& schema) {
  validate(schema);
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_line(line);
  // Column position of each schema feature (target last), matched by exact name.
  const std::size_t width = static_cast<std::size_t>(schema.feature_count()) + 1;
  std::vector<std::size_t> column_of(width, std::size_t(-1));
  auto locate = [&](const std::string& name, std::size_t slot) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("csv: header is missing column '" + name + "'");
    column_of[slot] = static_cast<std::size_t>(it - header.begin());
  };
  for (std::size_t f = 0; f < schema.features.size(); ++f) locate(schema.features[f].name, f);
  locate(schema.target.name, width - 1);
  if (header.size() != width) {
    std::set<std::size_t> used(column_of.begin(), column_of.end());
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (used.count(c) == 0) {
        throw DataError("csv: unexpected column '" + header[c] + "'");
      }
    }
  }

  Dataset dataset;
  dataset.schema = schema;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != width) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                      " cells, found " + std::to_string(cells.size()));
    }
    Record record;
    record.feature_ids.reserve(schema.features.size());
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
      const auto& def = schema.features[f];
      const int id = parse_id(cells[column_of[f]], row, def.name);
      check_range(id, def, row);
      record.feature_ids.push_back(id);
    }
    record.target_id = parse_id(cells[column_of[width - 1]], row, schema.target.name);
    check_range(record.target_id, schema.target, row);
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  for (const auto& def : dataset.schema.features) out << def.name << ',';
  out << dataset.schema.target.name << '\n';
  for (const auto& record : dataset.records) {
    for (const int id : record.feature_ids) out << id << ',';
    out << record.target_id << '\n';
  }
}

Dataset dedupe(const Dataset& dataset) {
  Dataset out;
  out.schema = dataset.schema;
  std::set<std::pair<std::vector<int>, int>> seen;
  for (const auto& record : dataset.records) {
    if (seen.emplace(record.feature_ids, record.target_id).second) {
      out.records.push_back(record);
    }
  }
  return out;
}

SplitIndices split(Eigen::Index n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  if (n < 3) throw UsageError("split: need at least 3 records for 3 groups");
  double sum = 0;
  for (const double f : fractions) {
    if (!(f > 0)) throw UsageError("split: fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("split: fractions must sum to 1");

  // Largest-remainder sizes; ties keep (train, validation, test) order.
  std::array<Eigen::Index, 3> sizes;
  std::array<double, 3> remainders;
  Eigen::Index assigned = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    const double exact = static_cast<double>(n) * fractions[g];
    sizes[g] = static_cast<Eigen::Index>(std::floor(exact));
    remainders[g] = exact - std::floor(exact);
    assigned += sizes[g];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) sizes[order[i % 3]] += 1;

  std::vector<Eigen::Index> permutation(static_cast<std::size_t>(n));
  std::iota(permutation.begin(), permutation.end(), Eigen::Index(0));
  Rng rng(seed);
  for (std::size_t i = permutation.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_uint(rng, i + 1));
    std::swap(permutation[i], permutation[j]);
  }

  SplitIndices indices;
  indices.seed = seed;
  auto cursor = permutation.begin();
  auto take = [&](Eigen::Index count) {
    std::vector<Eigen::Index> group(cursor, cursor + count);
    cursor += count;
    std::sort(group.begin(), group.end());
    return group;
  };
  indices.train = take(sizes[0]);
  indices.validation = take(sizes[1]);
  indices.test = take(sizes[2]);
  return indices;
}

PlantedRule planted_rule(const FeatureSchema& schema, const std::string& rule_id) {
  validate(schema);
  const int classes = schema.class_count();
  if (rule_id.rfind("clamp", 0) == 0) {
    const std::string number = rule_id.substr(5);
    int feature = 0;
    const auto result = std::from_chars(number.data(), number.data() + number.size(), feature);
    if (result.ec != std::errc{} || result.ptr != number.data() + number.size() || feature < 1 ||
        feature > schema.feature_count()) {
      throw UsageError("rule '" + rule_id + "': expected clampN with N in 1.." +
                       std::to_string(schema.feature_count()));
    }
    PlantedRule rule;
    rule.id = rule_id;
    rule.assign = [feature, classes](const std::vector<int>& ids) {
      return std::min(ids[static_cast<std::size_t>(feature - 1)], classes);
    };
    return rule;
  }
  if (rule_id == "vote") {
    if (schema.feature_count() < classes) {
      throw UsageError("rule 'vote': needs at least " + std::to_string(classes) + " features");
    }
    std::vector<int> spans;
    for (int c = 0; c < classes; ++c) spans.push_back(schema.features[c].category_count() - 1);
    PlantedRule rule;
    rule.id = rule_id;
    // Class c wins on the largest score v_c + c/10, where v_c is feature c's
    // id rescaled onto [-1, 1]. Rescaled ids sit on multiples of 1/3 for
    // small category counts, so the c/10 offsets leave every pair of scores
    // separated and no row sits on a decision boundary.
    rule.assign = [spans, classes](const std::vector<int>& ids) {
      int best = 0;
      double best_score = -2;
      for (int c = 0; c < classes; ++c) {
        const double value = -1.0 + 2.0 * (ids[static_cast<std::size_t>(c)] - 1) / spans[c];
        const double score = value + c / 10.0;
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
      return 1 + best;
    };
    return rule;
  }
  if (rule_id == "branch") {
    if (schema.feature_count() < 2 || classes != 3) {
      throw UsageError("rule 'branch': needs 2 features and a 3-class target");
    }
    const int half_b = schema.features[1].category_count() / 2;
    PlantedRule rule;
    rule.id = rule_id;
    // Two-feature decision list: lowest category of feature 1 -> class 1,
    // otherwise the lower half of feature 2 picks class 2, the rest class 3.
    rule.assign = [half_b](const std::vector<int>& ids) {
      if (ids[0] == 1) return 1;
      return ids[1] <= half_b ? 2 : 3;
    };
    return rule;
  }
  if (rule_id == "sumthresh") {
    std::vector<int> spans;
    spans.reserve(schema.features.size());
    for (const auto& def : schema.features) spans.push_back(def.category_count() - 1);
    PlantedRule rule;
    rule.id = rule_id;
    rule.assign = [spans, classes](const std::vector<int>& ids) {
      double sum = 0;
      for (std::size_t f = 0; f < ids.size(); ++f) {
        sum += static_cast<double>(ids[f] - 1) / spans[f];
      }
      const auto band = static_cast<int>(sum * classes / static_cast<double>(ids.size()));
      return 1 + std::min(band, classes - 1);
    };
    return rule;
  }
  throw UsageError("unknown rule '" + rule_id + "' (known: clampN, sumthresh)");
}

Dataset synthesize(const FeatureSchema& schema, std::size_t n, std::uint64_t seed,
                   const PlantedRule& rule, double noise) {
  validate(schema);
  if (n < 1) throw UsageError("synthesize: need at least 1 record");
  if (!(noise >= 0.0 && noise < 1.0)) throw UsageError("synthesize: noise must be in [0, 1)");
  if (!rule.assign) throw UsageError("synthesize: rule has no assignment");

  const int classes = schema.class_count();
  Rng rng(seed);
  Dataset dataset;
  dataset.schema = schema;
  dataset.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Record record;
    record.feature_ids.reserve(schema.features.size());
    for (const auto& def : schema.features) {
      record.feature_ids.push_back(
          1 + static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(def.category_count()))));
    }
    record.target_id = rule.assign(record.feature_ids);
    if (record.target_id < 1 || record.target_id > classes) {
      throw UsageError("synthesize: rule '" + rule.id + "' produced class " +
                       std::to_string(record.target_id) + " outside 1.." +
                       std::to_string(classes));
    }
    if (noise > 0.0 && unit_real(rng) < noise) {
      const int offset =
          1 + static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(classes - 1)));
      record.target_id = 1 + (record.target_id - 1 + offset) % classes;
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

}  // namespace pollnet
