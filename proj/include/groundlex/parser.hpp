#pragma once

// CKY chart parser over the factored lexicon with per-cell beams and
// word skipping, producing a packed derivation forest.
//
// Skip semantics: a token may be skipped only when it is a registered
// null-class word.  Skips attach in one canonical place so each choice of
// lexical items plus skipped tokens yields exactly one tree: a skip wraps a
// lexical item directly (never an application; following skips outermost,
// preceding skips inside them), a skipped token between two items belongs
// to the item on its left, and only skips before the first item of the
// sentence may precede an item.  The last two are enforced by requiring the
// right operand of an application to start with an unskipped token.  A
// sentence consisting solely of null-class words yields the single
// pure-null derivation with the universal form.
//
// Forest: a chart entry packs every derivation sharing (category, canonical
// form) over a span, refined by the derivation shape the skip rules need
// (top operation class, leading-skip flag).  Entries hold edges referencing
// child entries rather than whole derivations, so a cell represents an
// exponential derivation set in polynomial space.  Inside sums, Viterbi
// scores and feature expectations come from dynamic programming over the
// forest; derivations are materialized only on demand (enumerate), which is
// meant for small charts and tests.
//
// Scores: a derivation's score is the dot product of the model weights with
// its features (lexeme, template and null indicators, a shared skip count,
// and per-constant conjunct-count indicators of its canonical root form).
// Cells keep the N highest-scoring (category, canonical form) groups by
// best derivation score; ties break lexicographically on canonical form
// text, then category, which keeps parsing deterministic.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "groundlex/grammar.hpp"

namespace groundlex {

// Shared mutable state bundling everything the parser reads.
struct GrammarCore {
  FormArena arena;
  CategoryTable cats;
  ConstantTable constants;
  Lexicon lexicon;
  ParseModel model;

  GrammarCore() { lexicon.set_templates(builtin_templates(arena, cats)); }
};

// One derivation step; children are indices into ParseResult::forest.
struct Edge {
  enum class Op { Lex, Fwd, Bwd, SkipL, SkipR, NullRoot };
  Op op = Op::Lex;
  int lexeme_id = -1;    // Lex
  int template_id = -1;  // Lex
  int left = -1;         // Fwd/Bwd left child; SkipL/SkipR wrapped entry
  int right = -1;        // Fwd/Bwd right child
  int token = -1;        // SkipL/SkipR skipped token index
  double local = 0.0;    // lexical or skip score contributed by this step
};

// Shape class of the topmost operation, part of the entry key because the
// canonical skip placement constrains which shapes a rule may wrap.
enum class TopClass : uint8_t { Lex, SkipL, SkipR, App, Null };

// Packed derivations sharing (category, canonical form, top class,
// leading-skip flag) over one span.
struct ForestEntry {
  CategoryRef cat = nullptr;
  FormRef canon = nullptr;
  int span_i = 0;
  int span_j = 0;
  TopClass top = TopClass::Lex;
  bool leading_skip = false;  // leftmost covered token is skipped
  std::vector<Edge> edges;
  double inside = 0.0;   // log-sum-exp of leaf scores over all derivations
  double viterbi = 0.0;  // best leaf score
};

// One canonical logical form at the root, merged across categories and
// derivation shapes.
struct RootEntry {
  FormRef canon = nullptr;
  double log_mass = 0.0;   // log-sum-exp of full derivation scores
  std::vector<int> parts;  // forest entries backing this root
};

// Explicit derivation, materialized by Parser::enumerate.
struct Derivation {
  double score = 0.0;     // full feature score
  std::string signature;  // deterministic structural signature
  FeatureVec features;    // complete feature vector; dot(model) == score
};

struct ParseResult {
  std::vector<std::string> tokens;
  std::vector<ForestEntry> forest;  // topologically ordered, children first
  std::vector<RootEntry> entries;   // sorted by log_mass desc, then form text
  double log_z = 0.0;               // log-sum-exp over every root derivation
  bool failed() const { return entries.empty(); }

  // P^(z|x): probability mass of one root entry.
  double entry_prob(size_t entry) const;
};

class Parser {
 public:
  explicit Parser(GrammarCore& core) : core_(core) {}

  // Sentences longer than 25 tokens fail (empty result).
  ParseResult parse(const std::vector<std::string>& tokens, int beam);

  // Expected feature counts sum_e weights[e] * E[phi | root entry e], via
  // inside-outside over the forest.  weights is parallel to result.entries;
  // pass the entry_prob values to get the unconditional model expectation.
  // Registers feature ids.
  std::map<int, double> expected_features(const ParseResult& result,
                                          const std::vector<double>& weights);

  // Lexemes appearing as a leaf of any derivation of one root entry.
  std::set<int> reachable_lexemes(const ParseResult& result, size_t entry) const;

  // Every derivation of one root entry, sorted by (score desc, signature
  // asc).  Enumeration is exponential in general; throws once more than
  // `limit` partial derivations are materialized.
  std::vector<Derivation> enumerate(const ParseResult& result, size_t entry,
                                    size_t limit = 100000);

 private:
  double form_score(FormRef form);
  double lexeme_template_score(int lexeme_id, int template_id);
  double skip_score(const std::string& word);
  const std::vector<LexicalItem>& items_for(int lexeme_id);
  void count_form_constants(FormRef form, std::vector<std::pair<std::string, int>>& out) const;

  GrammarCore& core_;

  // Lexical items per lexeme (weight-independent, persistent).
  std::unordered_map<int, std::vector<LexicalItem>> item_cache_;
  size_t item_cache_templates_ = 0;

  // Canonical form text, used for tie-breaking (forms are immutable).
  std::unordered_map<const Form*, std::string> text_cache_;

  // Per-parse scratch, weight-dependent.
  std::unordered_map<const Form*, double> form_score_cache_;
};

std::vector<std::string> tokenize(const std::string& sentence);

}  // namespace groundlex
