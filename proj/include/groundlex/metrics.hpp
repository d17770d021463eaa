#pragma once

// Micro-averaged precision/recall/F1 pooled over per-object decisions.

namespace groundlex {

struct Confusion {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  void add(bool predicted, bool gold);
  void merge(const Confusion& other);
  long long total() const { return tp + fp + fn + tn; }
};

struct Prf {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Degenerate conventions: with no positive predictions, precision is 1 when
// nothing was missed and 0 otherwise; with no positive golds, recall is 1;
// f1 is 0 when precision + recall is 0.
Prf prf(const Confusion& c);

}  // namespace groundlex
