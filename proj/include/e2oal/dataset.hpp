#pragma once

#include <stdexcept>
#include <vector>

#include "e2oal/types.hpp"

namespace e2oal {

// A fully materialized benchmark: every sample row with its true class,
// the held-out test rows, and the label space. True classes of pool rows
// are consulted only through oracle_label, mirroring an annotator who
// names known classes but lumps everything else together.
struct DataSet {
  FeatureSet features;
  std::vector<int> true_class;  // per row; [0,k) known, [k,k+u) unknown
  std::vector<std::size_t> test_rows;
  std::vector<int> test_labels;  // parallel to test_rows, known-class ids
  LabelSpace labels;

  void validate() const {
    features.validate();
    labels.validate();
    if (true_class.size() != features.size())
      throw std::invalid_argument("true_class length must match sample count");
    int max_class = labels.k + (labels.u_true ? *labels.u_true : 0);
    for (int c : true_class)
      if (c < 0 || c >= max_class) throw std::invalid_argument("class out of range");
    if (test_rows.size() != test_labels.size())
      throw std::invalid_argument("test rows/labels size mismatch");
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      if (test_rows[i] >= features.size())
        throw std::invalid_argument("test row out of range");
      if (test_labels[i] < 0 || test_labels[i] >= labels.k)
        throw std::invalid_argument("test label must be a known class");
    }
  }
};

inline OracleLabel oracle_label(const DataSet& data, std::size_t row) {
  if (row >= data.true_class.size()) throw std::invalid_argument("row out of range");
  int t = data.true_class[row];
  if (t < data.labels.k) return {true, t};
  return {false, -1};
}

}  // namespace e2oal
