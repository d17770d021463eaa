#include "groundlex/perception.hpp"

#include <cmath>
#include <cstddef>
#include <random>

namespace groundlex {

namespace {

// Sigmoid computed branch-wise so exp never overflows; the result is pinned
// strictly inside (0, 1) so downstream log/ratio terms stay finite.
double sigmoid(double t) {
  double p;
  if (t >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-t));
  } else {
    double e = std::exp(t);
    p = e / (1.0 + e);
  }
  if (p >= 1.0) p = 1.0 - 1e-16;
  if (p <= 0.0) p = 1e-300;
  return p;
}

size_t expected_dims(const ObjectFeatures& o) { return o.color.size() + o.shape.size() + 1; }

}  // namespace

std::vector<double> ObjectFeatures::phi() const {
  std::vector<double> v;
  v.reserve(color.size() + shape.size() + 1);
  v.insert(v.end(), color.begin(), color.end());
  v.insert(v.end(), shape.begin(), shape.end());
  v.push_back(1.0);
  return v;
}

double classifier_score(const AttributeClassifier& c, const ObjectFeatures& o) {
  if (c.weights.size() != expected_dims(o))
    throw FormError("classifier '" + c.constant + "' expects " +
                    std::to_string(c.weights.size()) + " feature components, object '" + o.id +
                    "' has " + std::to_string(expected_dims(o)));
  double t = 0.0;
  size_t i = 0;
  for (double v : o.color) t += c.weights[i++] * v;
  for (double v : o.shape) t += c.weights[i++] * v;
  t += c.weights[i];  // bias
  return t;
}

double classifier_prob(const AttributeClassifier& c, const ObjectFeatures& o) {
  return sigmoid(classifier_score(c, o));
}

void ClassifierBank::set_dims(int d_c, int d_s) {
  if (!classifiers_.empty() && (d_c != d_c_ || d_s != d_s_))
    throw FormError("cannot change classifier dimensions on a non-empty bank");
  d_c_ = d_c;
  d_s_ = d_s;
}

void ClassifierBank::add(AttributeClassifier c) {
  if (index_.count(c.constant))
    throw FormError("duplicate classifier for constant '" + c.constant + "'");
  if ((int)c.weights.size() != d_c_ + d_s_ + 1)
    throw FormError("classifier '" + c.constant + "' has " + std::to_string(c.weights.size()) +
                    " weights, bank expects " + std::to_string(d_c_ + d_s_ + 1));
  index_[c.constant] = classifiers_.size();
  classifiers_.push_back(std::move(c));
}

const AttributeClassifier* ClassifierBank::find(const std::string& constant) const {
  auto it = index_.find(constant);
  return it == index_.end() ? nullptr : &classifiers_[it->second];
}

AttributeClassifier& ClassifierBank::get(const std::string& constant) {
  auto it = index_.find(constant);
  if (it == index_.end()) throw FormError("no classifier bound to constant '" + constant + "'");
  return classifiers_[it->second];
}

double logistic_objective(const AttributeClassifier& c,
                          const std::vector<const ObjectFeatures*>& positives,
                          const std::vector<const ObjectFeatures*>& negatives, double l2) {
  double ll = 0.0;
  for (const ObjectFeatures* o : positives) ll += std::log(classifier_prob(c, *o));
  for (const ObjectFeatures* o : negatives) ll += std::log(1.0 - classifier_prob(c, *o));
  double n = (double)(positives.size() + negatives.size());
  double reg = 0.0;
  for (double w : c.weights) reg += w * w;
  return ll / n - 0.5 * l2 * reg;
}

std::vector<double> logistic_gradient(const AttributeClassifier& c,
                                      const std::vector<const ObjectFeatures*>& positives,
                                      const std::vector<const ObjectFeatures*>& negatives,
                                      double l2, int d_c, int d_s) {
  std::vector<double> g(c.weights.size(), 0.0);
  auto accumulate = [&](const ObjectFeatures& o, double label) {
    double coeff = label - classifier_prob(c, o);
    size_t i = 0;
    for (double v : o.color) g[i++] += coeff * v;
    for (double v : o.shape) g[i++] += coeff * v;
    g[i] += coeff;
  };
  for (const ObjectFeatures* o : positives) accumulate(*o, 1.0);
  for (const ObjectFeatures* o : negatives) accumulate(*o, 0.0);
  double n = (double)(positives.size() + negatives.size());
  for (size_t i = 0; i < g.size(); ++i) g[i] = g[i] / n - l2 * c.weights[i];
  // Mask to the classifier's channel block; the bias (last entry) stays live.
  size_t lo = c.channel == Channel::Color ? 0 : (size_t)d_c;
  size_t hi = c.channel == Channel::Color ? (size_t)d_c : (size_t)(d_c + d_s);
  for (size_t i = 0; i + 1 < g.size(); ++i)
    if (i < lo || i >= hi) g[i] = 0.0;
  return g;
}

AttributeClassifier train_classifier(const std::string& constant, Channel channel,
                                     const std::vector<const ObjectFeatures*>& positives,
                                     const std::vector<const ObjectFeatures*>& negatives,
                                     int d_c, int d_s, const ClassifierTrainConfig& config) {
  if (positives.empty())
    throw FormError("no positive examples for classifier '" + constant + "'");
  if (negatives.empty())
    throw FormError("no negative examples for classifier '" + constant + "'");
  AttributeClassifier c;
  c.constant = constant;
  c.channel = channel;
  c.weights.assign((size_t)(d_c + d_s + 1), 0.0);
  for (int it = 0; it < config.iterations; ++it) {
    std::vector<double> g = logistic_gradient(c, positives, negatives, config.l2, d_c, d_s);
    for (size_t i = 0; i < c.weights.size(); ++i) c.weights[i] += config.rate * g[i];
  }
  return c;
}

std::vector<AttributeClassifier> new_classifier_bank(int k, int d_c, int d_s, uint64_t seed) {
  if (k < 0 || k % 2 != 0)
    throw FormError("classifier bank size must be even and non-negative, got " + std::to_string(k));
  std::mt19937_64 rng(seed);
  // Each classifier is born with its own random preference direction, strong
  // enough to stay competitive against an early leader; otherwise whichever
  // slot happens to fit the first few examples absorbs every novel word and
  // the leftovers never attract enough posterior mass to specialize. The bias
  // stays near zero so acceptance is driven by direction, not base rate.
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> ub(-0.1, 0.1);
  std::vector<AttributeClassifier> bank;
  bank.reserve((size_t)k);
  for (int i = 0; i < k; ++i) {
    AttributeClassifier c;
    c.constant = "NEW" + std::to_string(i);
    c.channel = i < k / 2 ? Channel::Color : Channel::Shape;
    c.weights.assign((size_t)(d_c + d_s + 1), 0.0);
    int lo = c.channel == Channel::Color ? 0 : d_c;
    int hi = c.channel == Channel::Color ? d_c : d_c + d_s;
    for (int d = lo; d < hi; ++d) c.weights[(size_t)d] = u(rng);
    c.weights.back() = ub(rng);
    bank.push_back(std::move(c));
  }
  return bank;
}

}  // namespace groundlex
