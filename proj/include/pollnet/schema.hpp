#pragma once

#include <string>
#include <vector>

namespace pollnet {

struct Category {
  int id = 0;
  std::string label;
};

// One categorical feature: category ids must be the consecutive integers
// 1..k (k >= 2) with labels unique within the feature.
struct FeatureDef {
  std::string name;
  std::vector<Category> categories;

  int category_count() const { return static_cast<int>(categories.size()); }
};

// Ordered input features plus the target feature. Validation enforces the
// id/label invariants and unique feature names; the input width of a network
// built for this schema equals features.size().
struct FeatureSchema {
  std::vector<FeatureDef> features;
  FeatureDef target;

  int feature_count() const { return static_cast<int>(features.size()); }
  int class_count() const { return target.category_count(); }
};

// Throws DataError describing the first violated invariant.
void validate(const FeatureSchema& schema);

// The built-in 9-feature survey schema with a 3-class participation target.
FeatureSchema default_schema();

// JSON text form: {"features":[{"name":...,"categories":[{"id":1,"label":...},...]},...],
//                  "target":{...}}. Both directions validate.
FeatureSchema parse_schema(const std::string& text);
std::string dump_schema(const FeatureSchema& schema);

}  // namespace pollnet
