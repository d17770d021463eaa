#pragma once

// Command implementations behind the CLI.  Each command reads/writes files,
// returns its comma-separated report as a string, and is deterministic given
// its options.  The pipeline helpers are exposed so tests can drive the same
// code paths in process.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "groundlex/joint.hpp"
#include "groundlex/model_io.hpp"
#include "groundlex/scenes.hpp"
#include "groundlex/supervised.hpp"

namespace groundlex {

struct BootstrapParams {
  int epochs = 10;
  double rate = 0.1;
  double decay = 0.00001;
  int beam = 100;
  int classifier_iterations = 500;
  uint64_t seed = 0;
};

struct ClassifierStat {
  std::string constant;
  double accuracy = 0.0;  // against the supervised labels, deduped by object
  bool skipped = false;   // one class empty: zero-weight classifier installed
};

struct BootstrapSummary {
  SupervisedReport parser;
  std::vector<ClassifierStat> classifiers;
};

// Builds a joint model from supervised records (annotated logical forms plus
// labeled worlds): supervised parser training, then one classifier per
// labeled attribute.  Throws when a record lacks its annotation.
BootstrapSummary bootstrap_model(JointModel& m, const std::vector<SceneRecord>& dsup,
                                 const AttributeInventory& inv, const BootstrapParams& params);

// Lexeme words plus null-class words.
std::set<std::string> model_vocabulary(const JointModel& m);

struct GenOptions {
  std::string out_dir = ".";
  int scenes = 142;
  int sentences_per_scene = 7;
  double noise = 0.1;
  double separation = 0.6;
  double theme = 0.5;
  double blur = 0.0;
  double focus = 0.9;
  double synonym_rate = 0.35;
  double bootstrap_fraction = 0.45;
  double train_fraction = 0.8;
  int min_objects = 4;
  int max_objects = 10;
  int d_c = 16;
  int d_s = 16;
  bool synonym_mode = false;
  uint64_t seed = 0;
};
// Writes dsup.json, train.json, test.json, thesaurus.txt into out_dir.
std::string cmd_gen(const GenOptions& opt);

struct BootstrapOptions {
  std::string data;  // supervised dataset
  std::string out;   // model file
  BootstrapParams params;
};
std::string cmd_bootstrap(const BootstrapOptions& opt);

struct TrainOptions {
  std::string model;  // input model file
  std::string data;   // weakly supervised dataset
  std::string out;    // output model; with runs > 1, "-run<r>" is inserted
  TrainConfig config;
  int runs = 1;
};
std::string cmd_train(const TrainOptions& opt);

struct EvalOptions {
  std::string model;
  std::string data;
  int beam = 50;
  double threshold = 0.5;
};
std::string cmd_eval(const EvalOptions& opt);

struct AblateVisionOptions {
  std::string dsup;       // initialization corpus, defines the known vocabulary
  std::string train;      // weakly supervised corpus (sentences + gold sets)
  std::string test;
  std::string thesaurus;  // "attribute: word1, word2, ..." lines
  int classifier_iterations = 500;
};
std::string cmd_ablate_vision(const AblateVisionOptions& opt);

struct AblateLanguageOptions {
  std::string model;  // bootstrap model, run unchanged
  std::string data;
  int beam = 50;
  double threshold = 0.5;
};
std::string cmd_ablate_language(const AblateLanguageOptions& opt);

struct InspectOptions {
  std::string model;
  std::vector<std::string> words;
};
// Rows = words, columns = induced constants plus null, cells = lexeme
// indicator weights; flags the argmax per row, "?" for unknown words.
std::string cmd_inspect(const InspectOptions& opt);

struct CurveOptions {
  GenOptions gen;
  BootstrapParams bootstrap;
  TrainConfig train;
  std::vector<double> sizes = {0.1, 0.25, 0.5, 0.75, 1.0};  // fractions of the supervised corpus
};
// Bootstrap + joint training + evaluation at increasing supervised-corpus
// sizes over one fixed split.
std::string cmd_curve(const CurveOptions& opt);

struct SynonymOptions {
  GenOptions gen;  // synonym mode is forced on
  BootstrapParams bootstrap;
  TrainConfig train;
  int runs = 1;
  double binding_threshold = 0.8;  // fraction of novel words that must bind
};
// Known attributes under held-out surface words: trains jointly and reports
// whether each novel word's best lexeme pairs it with its existing constant.
std::string cmd_synonym(const SynonymOptions& opt);

}  // namespace groundlex
