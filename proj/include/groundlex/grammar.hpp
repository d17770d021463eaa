#pragma once

// Factored CCG lexicon: lexemes pair word spans with ordered constant lists,
// templates pair a syntactic category with a logical-form skeleton, and a
// lexical item is the result of instantiating a lexeme with a template.
// Parse scores come from a sparse log-linear model over indicator features.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groundlex/logic.hpp"

namespace groundlex {

// Syntactic categories: atomic N, NP, S plus forward (A/B) and backward (A\B)
// function categories.  Interned per CategoryTable; compare by pointer.
struct CategoryNode {
  enum class Kind { N, NP, S, Fwd, Bwd };
  Kind kind = Kind::N;
  const CategoryNode* result = nullptr;
  const CategoryNode* arg = nullptr;
  std::string text;

  bool is_atomic() const { return kind == Kind::N || kind == Kind::NP || kind == Kind::S; }
};
using CategoryRef = const CategoryNode*;

class CategoryTable {
 public:
  CategoryTable();
  CategoryRef n() const { return n_; }
  CategoryRef np() const { return np_; }
  CategoryRef s() const { return s_; }
  CategoryRef fwd(CategoryRef result, CategoryRef arg);  // result/arg
  CategoryRef bwd(CategoryRef result, CategoryRef arg);  // result\arg
  CategoryRef parse(const std::string& text);

  // N and S map to <e,t>, NP to e, function categories to functions.
  TypeRef semantic_type(CategoryRef cat, FormArena& arena) const;

 private:
  CategoryRef make(CategoryNode::Kind kind, CategoryRef result, CategoryRef arg);
  std::deque<CategoryNode> nodes_;
  std::map<std::string, CategoryRef> index_;
  CategoryRef n_ = nullptr;
  CategoryRef np_ = nullptr;
  CategoryRef s_ = nullptr;
};

// A lexeme: 1..3 lowercase word tokens plus an ordered constant list.
struct Lexeme {
  std::vector<std::string> words;
  std::vector<std::string> constants;  // constant names, resolved via ConstantTable

  friend bool operator==(const Lexeme& a, const Lexeme& b) {
    return a.words == b.words && a.constants == b.constants;
  }
  friend bool operator<(const Lexeme& a, const Lexeme& b) {
    if (a.words != b.words) return a.words < b.words;
    return a.constants < b.constants;
  }
  std::string words_text() const;  // tokens joined by spaces
};

// A template: category plus skeleton with constant holes v1..vm.
struct Template {
  std::string id;
  CategoryRef category = nullptr;
  FormRef skeleton = nullptr;
  int arity = 0;
};

// Model-wide registry of attribute constants.
class ConstantTable {
 public:
  void add(const AttributeConstant& c);
  bool contains(const std::string& name) const;
  const AttributeConstant& get(const std::string& name) const;  // throws if absent
  const std::vector<AttributeConstant>& all() const { return list_; }

 private:
  std::vector<AttributeConstant> list_;
  std::map<std::string, size_t> index_;
};

struct LexicalItem {
  int lexeme_id = -1;    // index into Lexicon::lexemes
  int template_id = -1;  // index into Lexicon::templates
  CategoryRef category = nullptr;
  FormRef form = nullptr;  // beta-normal
};

// The fixed template inventory (eight templates; the relational-noun
// template is registered once per channel since its predicate symbol cannot
// be recovered from any constant argument).
std::vector<Template> builtin_templates(FormArena& arena, CategoryTable& cats);

class Lexicon {
 public:
  // Adds the lexeme if new; returns its id either way.
  int add_lexeme(const Lexeme& lexeme);
  bool contains_lexeme(const Lexeme& lexeme) const;
  void add_null_word(const std::string& word);
  bool is_null_word(const std::string& word) const { return null_words_.count(word) > 0; }
  bool known_word(const std::string& word) const;  // appears in some lexeme's tokens

  const std::vector<Lexeme>& lexemes() const { return lexemes_; }
  const std::set<std::string>& null_words() const { return null_words_; }
  const std::vector<Template>& templates() const { return templates_; }
  void set_templates(std::vector<Template> templates) { templates_ = std::move(templates); }

  // Lexeme ids whose word sequence equals the given span.
  const std::vector<int>* lexemes_for(const std::vector<std::string>& span) const;

  // One line per lexeme: "words\t[c1,c2]\tCS" (channel signature letters).
  std::string lexeme_line(int lexeme_id, const ConstantTable& constants) const;
  static Lexeme parse_lexeme_line(const std::string& line);

 private:
  std::vector<Lexeme> lexemes_;
  std::map<Lexeme, int> lexeme_index_;
  std::map<std::vector<std::string>, std::vector<int>> span_index_;
  std::set<std::string> words_;  // every token appearing in some lexeme
  std::set<std::string> null_words_;
  std::vector<Template> templates_;
};

// Instantiates lexeme x template; nullopt when the arity does not match or a
// hole constraint fails.  Channel-adaptive predicates take the channel of the
// constant that fills their hole, so instantiation cannot produce a
// channel-mismatched predicate.
std::optional<LexicalItem> instantiate(const Lexicon& lexicon, int lexeme_id, int template_id,
                                       const ConstantTable& constants, FormArena& arena);

// Sparse log-linear parse model.  Features are registered by name; absent
// features have weight 0.
class ParseModel {
 public:
  int feature_id(const std::string& name);            // registers if absent
  int find_feature(const std::string& name) const;    // -1 if absent
  const std::string& feature_name(int id) const { return names_[id]; }
  size_t feature_count() const { return names_.size(); }

  double weight(int id) const { return weights_[id]; }
  void set_weight(int id, double w) { weights_[id] = w; }
  void add_weight(int id, double delta) { weights_[id] += delta; }
  double weight_by_name(const std::string& name) const;

  // Deterministic (name-sorted) view for serialization and inspection.
  std::map<std::string, double> sorted_weights(bool include_zero = false) const;

  // Feature-name constructors.
  static std::string lexeme_feature(const Lexeme& lexeme);
  static std::string template_feature(const std::string& template_id);
  static std::string null_feature(const std::string& word);
  static std::string skip_count_feature();
  static std::string conjunct_count_feature(const std::string& constant, int count);

 private:
  std::vector<std::string> names_;
  std::vector<double> weights_;
  std::unordered_map<std::string, int> index_;
};

// Sparse feature vector: sorted (feature id, value) pairs.
struct FeatureVec {
  std::vector<std::pair<int, double>> items;

  void add(int id, double value);
  void normalize();  // sort by id, merge duplicates
  double dot(const ParseModel& model) const;
  void axpy(double scale, std::map<int, double>& acc) const;
};

}  // namespace groundlex
