#pragma once

// The joint grounded model: a parse distribution over logical forms paired
// with per-attribute classifiers.  Scene execution, collapsed set
// likelihoods, the posterior over latent forms, both expected gradients,
// online training, model extension, and set prediction.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "groundlex/metrics.hpp"
#include "groundlex/parser.hpp"
#include "groundlex/perception.hpp"
#include "groundlex/scenes.hpp"

namespace groundlex {

struct JointModel {
  GrammarCore core;
  ClassifierBank bank;
  // Free-form provenance echoed into the model file (seeds, rates, inputs).
  std::map<std::string, std::string> config;

  JointModel() = default;
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;
};

struct TrainConfig {
  int epochs = 10;
  double rate = 0.1;
  double decay = 0.00001;  // per performed update: eta_t = max(rate - t*decay, 0)
  int beam = 50;
  int new_classifiers = 6;
  double threshold = 0.5;  // strict: q(o) > threshold selects o
  uint64_t seed = 0;
};

// Objects selected by z under a total boolean attribute assignment
// (object id -> constant name -> value); the universal form selects all of O.
// Throws when an assignment is missing.
std::vector<std::string> execute(FormArena& arena, FormRef z,
                                 const std::map<std::string, std::map<std::string, bool>>& world,
                                 const std::vector<ObjectFeatures>& objects);

// P(o in denotation of z): product of the classifier probabilities of z's
// attributes; 1 for the universal form.  Throws on an unbound constant.
double membership_prob(JointModel& m, FormRef z, const ObjectFeatures& o);

// P(G | z, scene) = prod_{o in G} q_z(o) * prod_{o not in G} (1 - q_z(o)),
// which equals the marginal over all boolean worlds whose execution is G.
double set_likelihood(JointModel& m, FormRef z, const std::vector<ObjectFeatures>& objects,
                      const std::set<std::string>& gold);

// Shared per-example inference state: the beam parse, per-entry set
// likelihoods and membership probabilities, and the posterior over entries.
struct Inference {
  ParseResult parse;
  std::vector<double> lik;                  // per entry
  std::vector<std::vector<double>> member;  // per entry, per object
  std::vector<double> post;                 // per entry, sums to 1; empty if undefined
  bool parse_failed = false;
  bool unexplainable = false;  // every beam form gives the gold set zero likelihood
};

Inference infer(JointModel& m, Parser& parser, const std::vector<std::string>& tokens,
                const std::vector<ObjectFeatures>& objects, const std::set<std::string>& gold,
                int beam);

// Posterior-weighted hidden-derivation gradient of the parse weights:
// sum_z' post(z') * (E[phi | z'] - E[phi]).
std::map<int, double> language_gradient(Parser& parser, const Inference& inf);

// Posterior-weighted classifier gradients, one dense vector per constant
// mentioned by a supported beam form, channel-masked.
std::map<std::string, std::vector<double>> perception_gradient(
    JointModel& m, const Inference& inf, const std::vector<ObjectFeatures>& objects,
    const std::set<std::string>& gold);

// Adds the bank of k new classifiers bound to fresh induced constants (once,
// near-uniform outputs from the seed) and lexemes plus null entries for
// words of the records unknown to the lexicon.  Idempotent for fixed
// records apart from fresh seeding.  Returns the number of lexemes added.
size_t extend_model(JointModel& m, const std::vector<SceneRecord>& records, int new_classifiers,
                    uint64_t seed);

struct EpochStats {
  int epoch = 0;       // 1-based
  size_t examples = 0;
  size_t skipped = 0;  // parse failures plus unexplainable examples
  Prf train;           // micro scores of the pre-update predictions this epoch
};

// One online-training run over the records: per epoch, a seeded shuffle and
// one stochastic update per explainable example.  Deterministic given the
// config.  The epoch counter t of the decay schedule counts performed
// updates across epochs.
std::vector<EpochStats> train_online(JointModel& m, Parser& parser,
                                     const std::vector<SceneRecord>& records,
                                     const TrainConfig& cfg);

// Marginal prediction: q(o) = sum_z P^(z|x) * membership_prob(z, o) over the
// beam; returns objects with q(o) strictly above the threshold, in object
// order.  Parse failure yields the empty set.
std::vector<std::string> predict(JointModel& m, Parser& parser,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<ObjectFeatures>& objects, int beam,
                                 double threshold);

// Prediction from already-computed inference state (same math as predict).
std::vector<std::string> predict_from(const Inference& inf,
                                      const std::vector<ObjectFeatures>& objects,
                                      double threshold);

// Micro-averaged scores of predict over the records; optionally exposes the
// pooled confusion counts.
Prf evaluate(JointModel& m, Parser& parser, const std::vector<SceneRecord>& records, int beam,
             double threshold, Confusion* confusion = nullptr);

// Beam-restricted marginal data log-likelihood: sum over records of
// ln sum_z P^(z|x) * set_likelihood; failed or unexplainable records are
// counted into *skipped and contribute nothing.
double data_log_likelihood(JointModel& m, Parser& parser,
                           const std::vector<SceneRecord>& records, int beam,
                           size_t* skipped = nullptr);

}  // namespace groundlex
