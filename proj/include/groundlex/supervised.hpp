#pragma once

// Supervised parser bootstrapping from (sentence, logical form) pairs:
// lexeme candidate generation with retention filtering, and stochastic
// gradient ascent on the hidden-derivation log-likelihood.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "groundlex/parser.hpp"

namespace groundlex {

struct SupervisedExample {
  std::vector<std::string> tokens;
  std::string lf;  // annotated logical form, textual syntax
};

struct SupervisedConfig {
  int epochs = 10;
  double rate = 0.1;
  double decay = 0.00001;  // per performed update
  int beam = 100;
  uint64_t seed = 0;
};

struct SupervisedReport {
  size_t examples = 0;
  size_t unparsed = 0;       // annotation absent from the candidate chart
  size_t lexemes_added = 0;
  double exact_match = 0.0;  // fraction whose top root form equals the annotation
};

// Registers the constants and null-class words the data mentions, proposes
// lexemes pairing sentence spans (length <= 3) with [] or one constant of the
// example's annotation, keeps candidates that participate in a beam
// derivation yielding the annotation, then trains the parse weights so
// annotated forms win.  Unparseable examples are counted and skipped.
SupervisedReport train_supervised(GrammarCore& core, const std::vector<SupervisedExample>& data,
                                  const SupervisedConfig& cfg);

// Gradient of the hidden-derivation log-likelihood of one parsed example,
// E[phi | root form = z] - E[phi], accumulated into a feature id -> value
// map.  Returns false (empty gradient) when z is not among the root entries.
bool annotated_form_gradient(Parser& parser, const ParseResult& result, FormRef z,
                             std::map<int, double>& grad);

// For every token of the sentences that is neither a lexeme word nor a
// null-class word: one single-word lexeme per new constant, one per distinct
// existing constant list, plus null-class registration.  New feature weights
// stay at zero.  Returns the number of lexemes added.
size_t induce_new_lexemes(GrammarCore& core,
                          const std::vector<std::vector<std::string>>& sentences,
                          const std::vector<std::string>& new_constants);

}  // namespace groundlex
