#pragma once

// Per-attribute logistic-regression classifiers over two-channel object
// features.  An object's feature vector is its color block, then its shape
// block, then a trailing bias component fixed at 1.0.  A classifier reads
// only its own channel block plus the bias; weights outside that block are
// identically zero, enforced by masking the training gradient.

#include <map>
#include <string>
#include <vector>

#include "groundlex/logic.hpp"

namespace groundlex {

struct ObjectFeatures {
  std::string id;
  std::vector<double> color;
  std::vector<double> shape;

  // color ++ shape ++ [1.0]
  std::vector<double> phi() const;
};

struct AttributeClassifier {
  std::string constant;              // bound logical constant name
  Channel channel = Channel::Color;
  std::vector<double> weights;       // d_c + d_s + 1 entries, bias last
};

// Raw score (weights . phi(o)); throws FormError on dimension mismatch.
double classifier_score(const AttributeClassifier& c, const ObjectFeatures& o);

// Overflow-safe sigmoid of the score, strictly inside (0, 1).
double classifier_prob(const AttributeClassifier& c, const ObjectFeatures& o);

class ClassifierBank {
 public:
  ClassifierBank() = default;
  ClassifierBank(int d_c, int d_s) : d_c_(d_c), d_s_(d_s) {}

  int d_c() const { return d_c_; }
  int d_s() const { return d_s_; }
  void set_dims(int d_c, int d_s);

  void add(AttributeClassifier c);  // throws on duplicate constant or bad dims
  const AttributeClassifier* find(const std::string& constant) const;
  AttributeClassifier& get(const std::string& constant);  // throws if absent
  const std::vector<AttributeClassifier>& all() const { return classifiers_; }
  size_t size() const { return classifiers_.size(); }

 private:
  int d_c_ = 0;
  int d_s_ = 0;
  std::vector<AttributeClassifier> classifiers_;
  std::map<std::string, size_t> index_;
};

struct ClassifierTrainConfig {
  int iterations = 500;
  double rate = 0.5;
  double l2 = 1e-4;
};

// Mean logistic log-likelihood minus (l2/2)*|w|^2 over labeled objects.
double logistic_objective(const AttributeClassifier& c,
                          const std::vector<const ObjectFeatures*>& positives,
                          const std::vector<const ObjectFeatures*>& negatives, double l2);

// Gradient of logistic_objective in the classifier's weights, masked to the
// classifier's channel block plus the bias component.
std::vector<double> logistic_gradient(const AttributeClassifier& c,
                                      const std::vector<const ObjectFeatures*>& positives,
                                      const std::vector<const ObjectFeatures*>& negatives,
                                      double l2, int d_c, int d_s);

// Batch gradient ascent from zero weights; throws FormError when either
// class is empty.
AttributeClassifier train_classifier(const std::string& constant, Channel channel,
                                     const std::vector<const ObjectFeatures*>& positives,
                                     const std::vector<const ObjectFeatures*>& negatives,
                                     int d_c, int d_s, const ClassifierTrainConfig& config);

// k/2 color then k/2 shape classifiers bound to fresh constants NEW0..NEW(k-1);
// throws FormError on odd k.  In-channel weights and bias start at small
// seeded random values (near-uniform outputs): exactly equal classifiers
// would receive identical updates forever, so words could never bind to
// distinct classifiers.
std::vector<AttributeClassifier> new_classifier_bank(int k, int d_c, int d_s, uint64_t seed);

}  // namespace groundlex
