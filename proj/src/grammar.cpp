#include "groundlex/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace groundlex {

CategoryTable::CategoryTable() {
  n_ = make(CategoryNode::Kind::N, nullptr, nullptr);
  np_ = make(CategoryNode::Kind::NP, nullptr, nullptr);
  s_ = make(CategoryNode::Kind::S, nullptr, nullptr);
}

CategoryRef CategoryTable::make(CategoryNode::Kind kind, CategoryRef result, CategoryRef arg) {
  CategoryNode node;
  node.kind = kind;
  node.result = result;
  node.arg = arg;
  switch (kind) {
    case CategoryNode::Kind::N:
      node.text = "N";
      break;
    case CategoryNode::Kind::NP:
      node.text = "NP";
      break;
    case CategoryNode::Kind::S:
      node.text = "S";
      break;
    case CategoryNode::Kind::Fwd:
    case CategoryNode::Kind::Bwd: {
      std::string restext = result->is_atomic() ? result->text : "(" + result->text + ")";
      std::string argtext = arg->is_atomic() ? arg->text : "(" + arg->text + ")";
      node.text = restext + (kind == CategoryNode::Kind::Fwd ? "/" : "\\") + argtext;
      break;
    }
  }
  auto it = index_.find(node.text);
  if (it != index_.end()) return it->second;
  nodes_.push_back(std::move(node));
  CategoryRef ref = &nodes_.back();
  index_.emplace(ref->text, ref);
  return ref;
}

CategoryRef CategoryTable::fwd(CategoryRef result, CategoryRef arg) {
  return make(CategoryNode::Kind::Fwd, result, arg);
}

CategoryRef CategoryTable::bwd(CategoryRef result, CategoryRef arg) {
  return make(CategoryNode::Kind::Bwd, result, arg);
}

CategoryRef CategoryTable::parse(const std::string& text) {
  size_t pos = 0;
  auto fail = [&]() -> void {
    throw FormError("bad category text '" + text + "' at offset " + std::to_string(pos));
  };
  // cat := unit (("/"|"\") unit)*   with left associativity
  std::function<CategoryRef()> parse_cat;
  auto parse_unit = [&]() -> CategoryRef {
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      CategoryRef inner = parse_cat();
      if (pos >= text.size() || text[pos] != ')') fail();
      ++pos;
      return inner;
    }
    if (text.compare(pos, 2, "NP") == 0) {
      pos += 2;
      return np_;
    }
    if (pos < text.size() && text[pos] == 'N') {
      ++pos;
      return n_;
    }
    if (pos < text.size() && text[pos] == 'S') {
      ++pos;
      return s_;
    }
    fail();
    return nullptr;
  };
  parse_cat = [&]() -> CategoryRef {
    CategoryRef left = parse_unit();
    while (pos < text.size() && (text[pos] == '/' || text[pos] == '\\')) {
      char op = text[pos++];
      CategoryRef right = parse_unit();
      left = op == '/' ? fwd(left, right) : bwd(left, right);
    }
    return left;
  };
  CategoryRef cat = parse_cat();
  if (pos != text.size()) fail();
  return cat;
}

TypeRef CategoryTable::semantic_type(CategoryRef cat, FormArena& arena) const {
  switch (cat->kind) {
    case CategoryNode::Kind::N:
    case CategoryNode::Kind::S:
      return arena.t_fn(arena.t_entity(), arena.t_truth());
    case CategoryNode::Kind::NP:
      return arena.t_entity();
    case CategoryNode::Kind::Fwd:
    case CategoryNode::Kind::Bwd:
      return arena.t_fn(semantic_type(cat->arg, arena), semantic_type(cat->result, arena));
  }
  return arena.t_invalid();
}

std::string Lexeme::words_text() const {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

void ConstantTable::add(const AttributeConstant& c) {
  auto it = index_.find(c.name);
  if (it != index_.end()) {
    if (!(list_[it->second] == c)) {
      throw FormError("conflicting registration for constant '" + c.name + "'");
    }
    return;
  }
  index_.emplace(c.name, list_.size());
  list_.push_back(c);
}

bool ConstantTable::contains(const std::string& name) const { return index_.count(name) > 0; }

const AttributeConstant& ConstantTable::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw FormError("unknown attribute constant '" + name + "'");
  return list_[it->second];
}

std::vector<Template> builtin_templates(FormArena& arena, CategoryTable& cats) {
  TypeRef e = arena.t_entity();
  TypeRef et = arena.t_fn(e, arena.t_truth());
  FormRef f = arena.var("f", et);
  FormRef g = arena.var("g", et);
  FormRef x = arena.var("x", e);
  FormRef y = arena.var("y", e);
  FormRef v1 = arena.hole(1);

  CategoryRef N = cats.n();
  CategoryRef NP = cats.np();
  CategoryRef S = cats.s();

  std::vector<Template> out;
  // [w |- N/N : lam f.f]
  out.push_back({"mod_fwd", cats.fwd(N, N), arena.lam("f", et, f), 0});
  // [w |- N : lam x.P(x, v1)]  (P adopts v1's channel)
  out.push_back(
      {"attr_noun", N, arena.lam("x", e, arena.pred(Channel::Color, x, v1)), 1});
  // [w |- N\N : lam f.f]
  out.push_back({"mod_bwd", cats.bwd(N, N), arena.lam("f", et, f), 0});
  // [w |- (S\N)/N : lam f.lam g.lam x.f(x) and g(x)]
  out.push_back({"copula",
                 cats.fwd(cats.bwd(S, N), N),
                 arena.lam("f", et,
                           arena.lam("g", et,
                                     arena.lam("x", e,
                                               arena.conj({arena.app(f, x), arena.app(g, x)})))),
                 0});
  // [w |- N/NP : lam y.lam x.P(x, y)], one registration per channel.
  out.push_back({"rel_color", cats.fwd(N, NP),
                 arena.lam("y", e, arena.lam("x", e, arena.pred(Channel::Color, x, y))), 0});
  out.push_back({"rel_shape", cats.fwd(N, NP),
                 arena.lam("y", e, arena.lam("x", e, arena.pred(Channel::Shape, x, y))), 0});
  // [w |- NP/NP : lam x.x]
  out.push_back({"np_ident", cats.fwd(NP, NP), arena.lam("x", e, x), 0});
  // [w |- NP : v1]
  out.push_back({"entity", NP, v1, 1});
  // [w |- N/N : lam f.lam x.f(x) and P(x, v1)]
  out.push_back({"attr_mod", cats.fwd(N, N),
                 arena.lam("f", et,
                           arena.lam("x", e,
                                     arena.conj({arena.app(f, x),
                                                 arena.pred(Channel::Color, x, v1)}))),
                 1});
  return out;
}

int Lexicon::add_lexeme(const Lexeme& lexeme) {
  if (lexeme.words.empty() || lexeme.words.size() > 3) {
    throw FormError("lexeme word span must be 1..3 tokens: '" + lexeme.words_text() + "'");
  }
  auto it = lexeme_index_.find(lexeme);
  if (it != lexeme_index_.end()) return it->second;
  int id = static_cast<int>(lexemes_.size());
  lexemes_.push_back(lexeme);
  lexeme_index_.emplace(lexeme, id);
  span_index_[lexeme.words].push_back(id);
  for (const auto& w : lexeme.words) words_.insert(w);
  return id;
}

bool Lexicon::contains_lexeme(const Lexeme& lexeme) const {
  return lexeme_index_.count(lexeme) > 0;
}

void Lexicon::add_null_word(const std::string& word) { null_words_.insert(word); }

bool Lexicon::known_word(const std::string& word) const { return words_.count(word) > 0; }

const std::vector<int>* Lexicon::lexemes_for(const std::vector<std::string>& span) const {
  auto it = span_index_.find(span);
  return it == span_index_.end() ? nullptr : &it->second;
}

std::string Lexicon::lexeme_line(int lexeme_id, const ConstantTable& constants) const {
  const Lexeme& lex = lexemes_[lexeme_id];
  std::string line = lex.words_text() + "\t[";
  std::string sig;
  for (size_t i = 0; i < lex.constants.size(); ++i) {
    if (i) line += ',';
    line += lex.constants[i];
    sig += channel_letter(constants.get(lex.constants[i]).channel);
  }
  line += "]\t" + sig;
  return line;
}

Lexeme Lexicon::parse_lexeme_line(const std::string& line) {
  size_t tab1 = line.find('\t');
  size_t tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
  if (tab1 == std::string::npos || tab2 == std::string::npos) {
    throw FormError("bad lexeme line (expected two tabs): '" + line + "'");
  }
  Lexeme lex;
  std::istringstream words(line.substr(0, tab1));
  std::string w;
  while (words >> w) lex.words.push_back(w);
  std::string consts = line.substr(tab1 + 1, tab2 - tab1 - 1);
  if (consts.size() < 2 || consts.front() != '[' || consts.back() != ']') {
    throw FormError("bad constant list in lexeme line: '" + line + "'");
  }
  std::string inner = consts.substr(1, consts.size() - 2);
  size_t start = 0;
  while (start < inner.size()) {
    size_t comma = inner.find(',', start);
    if (comma == std::string::npos) comma = inner.size();
    lex.constants.push_back(inner.substr(start, comma - start));
    start = comma + 1;
  }
  return lex;
}

std::optional<LexicalItem> instantiate(const Lexicon& lexicon, int lexeme_id, int template_id,
                                       const ConstantTable& constants, FormArena& arena) {
  const Lexeme& lex = lexicon.lexemes()[lexeme_id];
  const Template& tmpl = lexicon.templates()[template_id];
  if (static_cast<int>(lex.constants.size()) != tmpl.arity) return std::nullopt;
  std::vector<FormRef> fillers;
  fillers.reserve(lex.constants.size());
  for (const auto& name : lex.constants) {
    const AttributeConstant& c = constants.get(name);
    fillers.push_back(arena.constant(c.name, c.channel));
  }
  FormRef form = arena.beta_reduce(arena.substitute_holes(tmpl.skeleton, fillers));
  if (!form->channel_ok) return std::nullopt;
  LexicalItem item;
  item.lexeme_id = lexeme_id;
  item.template_id = template_id;
  item.category = tmpl.category;
  item.form = form;
  return item;
}

int ParseModel::feature_id(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  weights_.push_back(0.0);
  index_.emplace(name, id);
  return id;
}

int ParseModel::find_feature(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

double ParseModel::weight_by_name(const std::string& name) const {
  int id = find_feature(name);
  return id < 0 ? 0.0 : weights_[id];
}

std::map<std::string, double> ParseModel::sorted_weights(bool include_zero) const {
  std::map<std::string, double> out;
  for (size_t i = 0; i < names_.size(); ++i) {
    if (include_zero || weights_[i] != 0.0) out.emplace(names_[i], weights_[i]);
  }
  return out;
}

std::string ParseModel::lexeme_feature(const Lexeme& lexeme) {
  std::string name = "lex:" + lexeme.words_text() + ":[";
  for (size_t i = 0; i < lexeme.constants.size(); ++i) {
    if (i) name += ',';
    name += lexeme.constants[i];
  }
  return name + "]";
}

std::string ParseModel::template_feature(const std::string& template_id) {
  return "tpl:" + template_id;
}

std::string ParseModel::null_feature(const std::string& word) { return "null:" + word; }

std::string ParseModel::skip_count_feature() { return "skip"; }

std::string ParseModel::conjunct_count_feature(const std::string& constant, int count) {
  return "lf:" + constant + ":" + std::to_string(count);
}

void FeatureVec::add(int id, double value) { items.emplace_back(id, value); }

void FeatureVec::normalize() {
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  size_t out = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    if (out > 0 && items[out - 1].first == items[i].first) {
      items[out - 1].second += items[i].second;
    } else {
      items[out++] = items[i];
    }
  }
  items.resize(out);
}

double FeatureVec::dot(const ParseModel& model) const {
  double sum = 0.0;
  for (const auto& [id, value] : items) sum += model.weight(id) * value;
  return sum;
}

void FeatureVec::axpy(double scale, std::map<int, double>& acc) const {
  for (const auto& [id, value] : items) acc[id] += scale * value;
}

}  // namespace groundlex
