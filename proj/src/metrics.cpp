#include "groundlex/metrics.hpp"

namespace groundlex {

void Confusion::add(bool predicted, bool gold) {
  if (predicted && gold)
    ++tp;
  else if (predicted && !gold)
    ++fp;
  else if (!predicted && gold)
    ++fn;
  else
    ++tn;
}

void Confusion::merge(const Confusion& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
}

Prf prf(const Confusion& c) {
  Prf out;
  if (c.tp + c.fp > 0)
    out.precision = (double)c.tp / (double)(c.tp + c.fp);
  else
    out.precision = c.fn == 0 ? 1.0 : 0.0;
  out.recall = c.tp + c.fn > 0 ? (double)c.tp / (double)(c.tp + c.fn) : 1.0;
  double pr = out.precision + out.recall;
  out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

}  // namespace groundlex
