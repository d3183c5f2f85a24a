#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pollnet/errors.hpp"
#include "pollnet/schema.hpp"

namespace pollnet {

// One survey response: a category id per schema feature plus the target id.
struct Record {
  std::vector<int> feature_ids;
  int target_id = 0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
};

// Numeric view of a Dataset: inputs row per record, each feature rescaled
// from ids 1..k onto [-1, 1]; targets are one-hot rows.
template <typename Scalar>
struct EncodedDatasetT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inputs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> targets;
  Eigen::Index class_count = 0;

  Eigen::Index rows() const { return inputs.rows(); }
};

using EncodedDataset = EncodedDatasetT<double>;

// Disjoint row-index sets covering 0..n-1, stored sorted.
struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> test;
  std::uint64_t seed = 0;
};

// Deterministic target assignment over feature ids, used by synthesize().
struct PlantedRule {
  std::string id;
  std::function<int(const std::vector<int>&)> assign;
};

// Reads a comma-separated UTF-8 file whose header names every schema feature
// plus the target, in any column order. Cell problems raise DataError naming
// the row, column and offending value.
Dataset load_csv(std::istream& in, const FeatureSchema& schema);

// Writes the schema-ordered CSV form load_csv accepts.
void write_csv(std::ostream& out, const Dataset& dataset);

// Removes exact duplicates (all feature ids and the target id equal),
// keeping first occurrences; order otherwise preserved.
Dataset dedupe(const Dataset& dataset);

// Per-feature linear rescale of id 1..k onto [-1, 1] plus one-hot targets.
// A feature observed with a single category has no scale and is rejected.
template <typename Scalar = double>
EncodedDatasetT<Scalar> encode(const Dataset& dataset);

// Seeded uniform permutation of 0..n-1 partitioned by largest-remainder
// rounding of n * fraction; ties broken in (train, validation, test) order.
SplitIndices split(Eigen::Index n, const std::array<double, 3>& fractions, std::uint64_t seed);

// Rule registry: "clampN" (N = 1-based feature number) assigns
// min(feature N's id, class count); "sumthresh" buckets the normalized id sum
// into equal-width class bands.
PlantedRule planted_rule(const FeatureSchema& schema, const std::string& rule_id);

// n records with ids drawn uniformly per feature; the rule's target is then
// flipped to a uniformly random different class with probability `noise`.
// Byte-identical output per (schema, n, seed, rule, noise).
Dataset synthesize(const FeatureSchema& schema, std::size_t n, std::uint64_t seed,
                   const PlantedRule& rule, double noise);

// --- implementation ---

template <typename Scalar>
EncodedDatasetT<Scalar> encode(const Dataset& dataset) {
  if (dataset.records.empty()) {
    throw UsageError("encode: dataset is empty");
  }
  const auto& schema = dataset.schema;
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.records.size());
  const Eigen::Index d = schema.feature_count();
  const Eigen::Index k = schema.class_count();
  for (const auto& feature : schema.features) {
    if (feature.category_count() < 2) {
      throw DataError("encode: feature '" + feature.name +
                      "' has a single category and cannot be rescaled");
    }
  }

  EncodedDatasetT<Scalar> out;
  out.inputs.resize(n, d);
  out.targets = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, k);
  out.class_count = k;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& record = dataset.records[static_cast<std::size_t>(i)];
    for (Eigen::Index f = 0; f < d; ++f) {
      const Scalar id = static_cast<Scalar>(record.feature_ids[static_cast<std::size_t>(f)]);
      const Scalar span =
          static_cast<Scalar>(schema.features[static_cast<std::size_t>(f)].category_count() - 1);
      out.inputs(i, f) = Scalar(-1) + Scalar(2) * (id - Scalar(1)) / span;
    }
    out.targets(i, record.target_id - 1) = Scalar(1);
  }
  return out;
}

}  // namespace pollnet
