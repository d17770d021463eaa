#pragma once

// Typed lambda-calculus fragment for grounded attribute descriptions.
//
// The language is deliberately tiny: abstraction, application, conjunction,
// unary attribute predicates over two perceptual channels, and bare
// constants.  Sentence-level meanings are always of the shape
//   (lam x (and (color x red) (shape x arch)))
// with the empty conjunction printed as `true` (the universal set).
//
// Forms are immutable and hash-consed inside a FormArena; equal structures
// share one node, which makes chart-parser deduplication and memoized
// reduction cheap.  An arena is single-threaded; forms it owns may be read
// concurrently once construction stops.

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace groundlex {

enum class Channel { Color, Shape };
enum class ConstantOrigin { Bootstrap, Induced };

const std::string& channel_name(Channel c);            // "color" / "shape"
Channel channel_from_name(const std::string& name);    // throws on other input
char channel_letter(Channel c);                        // 'C' / 'S'

struct AttributeConstant {
  std::string name;
  Channel channel = Channel::Color;
  ConstantOrigin origin = ConstantOrigin::Bootstrap;

  friend bool operator==(const AttributeConstant& a, const AttributeConstant& b) {
    return a.name == b.name && a.channel == b.channel;
  }
  friend bool operator<(const AttributeConstant& a, const AttributeConstant& b) {
    return a.name < b.name;
  }
};

// Semantic types: E, T, and functions built from them.  Interned per arena;
// compare TypeRef by pointer.
struct TypeNode {
  enum class Kind { Entity, Truth, Function, Invalid };
  Kind kind = Kind::Invalid;
  const TypeNode* from = nullptr;
  const TypeNode* to = nullptr;
  std::string text;  // "e", "t", "<e,t>", "?"
};
using TypeRef = const TypeNode*;

struct TypingError : std::runtime_error {
  explicit TypingError(const std::string& what) : std::runtime_error(what) {}
};
struct FormError : std::runtime_error {
  explicit FormError(const std::string& what) : std::runtime_error(what) {}
};

struct Form;
using FormRef = const Form*;

struct Form {
  enum class Kind { Var, Const, Lam, App, And, Pred, Hole };

  Kind kind = Kind::Var;
  TypeRef type = nullptr;     // Invalid kind when the subterm is ill-typed
  std::string name;           // Var name, Const name, Lam binder name
  Channel channel = Channel::Color;  // Const channel; Pred channel
  TypeRef var_type = nullptr; // Lam binder type
  FormRef a = nullptr;        // Lam body; App fn; Pred entity term
  FormRef b = nullptr;        // App arg; Pred constant term
  std::vector<FormRef> kids;  // And conjuncts (possibly empty: truth)
  int hole = 0;               // Hole index, 1-based
  uint32_t id = 0;            // arena-local, creation order
  bool channel_ok = true;     // no predicate applied to a wrong-channel constant
  bool has_hole = false;

  bool is_truth() const { return kind == Kind::And && kids.empty(); }
};

// One (name, channel) pair per constant mentioned by a sentence-level form.
struct AttrUse {
  std::string name;
  Channel channel = Channel::Color;
  friend bool operator==(const AttrUse& a, const AttrUse& b) {
    return a.name == b.name && a.channel == b.channel;
  }
  friend bool operator<(const AttrUse& a, const AttrUse& b) { return a.name < b.name; }
};

class FormArena {
 public:
  FormArena();
  FormArena(const FormArena&) = delete;
  FormArena& operator=(const FormArena&) = delete;

  TypeRef t_entity() const { return entity_; }
  TypeRef t_truth() const { return truth_type_; }
  TypeRef t_invalid() const { return invalid_; }
  TypeRef t_fn(TypeRef from, TypeRef to);

  FormRef var(const std::string& name, TypeRef type);
  FormRef constant(const std::string& name, Channel channel);
  FormRef lam(const std::string& binder, TypeRef binder_type, FormRef body);
  FormRef app(FormRef fn, FormRef arg);            // may yield an ill-typed node
  FormRef conj(std::vector<FormRef> kids);         // flattens nested conjunctions
  FormRef pred(Channel channel, FormRef entity, FormRef constant);
  FormRef truth() { return truth_form_; }
  FormRef hole(int index);

  // Normal-order reduction to beta-normal form.  Idempotent, type-preserving,
  // flattens conjunctions.  Throws TypingError naming the offending subterm.
  FormRef beta_reduce(FormRef e);

  // app + beta_reduce with a memo keyed on the operand pair (parser hot path).
  FormRef apply_reduced(FormRef fn, FormRef arg);

  // Alpha-renames binders to a fixed sequence, sorts conjuncts by
  // (predicate name, constant name), deduplicates them and collapses
  // singleton conjunctions.  Input must be beta-normal.
  FormRef canonicalize(FormRef e);

  // Constants mentioned by a canonical sentence-level form, sorted by name.
  // Throws FormError when the form is not sentence-level.
  const std::vector<AttrUse>& attribute_set(FormRef canonical);

  // Fills holes v1..vm with constants; predicates over a hole adopt the
  // channel of the constant that fills it.
  FormRef substitute_holes(FormRef skeleton, const std::vector<FormRef>& constants);

  // Internal printable syntax covering every node kind.  Deterministic.
  std::string text(FormRef e) const;

  // External sentence-level syntax:
  //   form := "(lam " var " " body ")"
  //   body := "(and" {" " pred}+ ")" | pred | "true"
  //   pred := "(" ("color"|"shape") " " var " " constant ")"
  // print_sentence requires a canonical sentence-level form; parse_sentence
  // accepts the grammar above and returns the canonicalized form.
  std::string print_sentence(FormRef canonical);
  FormRef parse_sentence(const std::string& text);

  // Number of live nodes (diagnostics).
  size_t size() const { return nodes_.size(); }

 private:
  FormRef intern(Form&& node);
  TypeRef compute_type(const Form& node) const;
  FormRef reduce_inner(FormRef e);
  FormRef substitute(FormRef e, const std::string& name, FormRef value);
  void free_vars(FormRef e, std::vector<std::string>& out) const;
  bool is_free(FormRef e, const std::string& name) const;
  FormRef alpha_canonical(FormRef e);
  FormRef sort_conjuncts(FormRef e);
  FormRef find_invalid(FormRef e) const;

  std::deque<TypeNode> types_;
  std::unordered_map<std::string, TypeRef> type_index_;
  TypeRef entity_ = nullptr;
  TypeRef truth_type_ = nullptr;
  TypeRef invalid_ = nullptr;

  std::deque<Form> nodes_;
  std::unordered_map<uint64_t, std::vector<FormRef>> index_;
  FormRef truth_form_ = nullptr;

  std::unordered_map<const Form*, FormRef> reduce_memo_;
  std::unordered_map<uint64_t, FormRef> apply_memo_;
  std::unordered_map<const Form*, FormRef> canon_memo_;
  std::unordered_map<const Form*, std::vector<AttrUse>> attrs_memo_;
  uint64_t fresh_counter_ = 0;
};

}  // namespace groundlex
