#include "groundlex/logic.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace groundlex {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t hash_string(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t node_hash(const Form& n) {
  uint64_t h = static_cast<uint64_t>(n.kind) + 1;
  h = mix(h, hash_string(n.name));
  h = mix(h, static_cast<uint64_t>(n.channel) + 1);
  h = mix(h, reinterpret_cast<uintptr_t>(n.var_type));
  h = mix(h, reinterpret_cast<uintptr_t>(n.a));
  h = mix(h, reinterpret_cast<uintptr_t>(n.b));
  for (FormRef k : n.kids) h = mix(h, reinterpret_cast<uintptr_t>(k));
  h = mix(h, static_cast<uint64_t>(n.hole));
  return h;
}

bool node_equal(const Form& x, const Form& y) {
  return x.kind == y.kind && x.name == y.name && x.channel == y.channel &&
         x.var_type == y.var_type && x.a == y.a && x.b == y.b && x.kids == y.kids &&
         x.hole == y.hole;
}

}  // namespace

const std::string& channel_name(Channel c) {
  static const std::string kColor = "color";
  static const std::string kShape = "shape";
  return c == Channel::Color ? kColor : kShape;
}

Channel channel_from_name(const std::string& name) {
  if (name == "color") return Channel::Color;
  if (name == "shape") return Channel::Shape;
  throw FormError("unknown channel predicate '" + name + "'");
}

char channel_letter(Channel c) { return c == Channel::Color ? 'C' : 'S'; }

FormArena::FormArena() {
  types_.push_back({TypeNode::Kind::Entity, nullptr, nullptr, "e"});
  entity_ = &types_.back();
  types_.push_back({TypeNode::Kind::Truth, nullptr, nullptr, "t"});
  truth_type_ = &types_.back();
  types_.push_back({TypeNode::Kind::Invalid, nullptr, nullptr, "?"});
  invalid_ = &types_.back();
  truth_form_ = conj({});
}

TypeRef FormArena::t_fn(TypeRef from, TypeRef to) {
  std::string text = "<" + from->text + "," + to->text + ">";
  auto it = type_index_.find(text);
  if (it != type_index_.end()) return it->second;
  types_.push_back({TypeNode::Kind::Function, from, to, text});
  TypeRef t = &types_.back();
  type_index_.emplace(std::move(text), t);
  return t;
}

TypeRef FormArena::compute_type(const Form& n) const {
  switch (n.kind) {
    case Form::Kind::Var:
      return n.var_type;
    case Form::Kind::Const:
    case Form::Kind::Hole:
      return entity_;
    case Form::Kind::Lam: {
      if (n.a->type->kind == TypeNode::Kind::Invalid) return invalid_;
      return const_cast<FormArena*>(this)->t_fn(n.var_type, n.a->type);
    }
    case Form::Kind::App: {
      TypeRef f = n.a->type;
      if (f->kind != TypeNode::Kind::Function) return invalid_;
      if (n.b->type != f->from) return invalid_;
      return f->to;
    }
    case Form::Kind::And: {
      for (FormRef k : n.kids)
        if (k->type != truth_type_) return invalid_;
      return truth_type_;
    }
    case Form::Kind::Pred: {
      if (n.a->type != entity_ || n.b->type != entity_) return invalid_;
      return truth_type_;
    }
  }
  return invalid_;
}

FormRef FormArena::intern(Form&& node) {
  node.type = compute_type(node);
  node.channel_ok = true;
  node.has_hole = node.kind == Form::Kind::Hole;
  for (FormRef k : {node.a, node.b}) {
    if (k != nullptr) {
      node.channel_ok = node.channel_ok && k->channel_ok;
      node.has_hole = node.has_hole || k->has_hole;
    }
  }
  for (FormRef k : node.kids) {
    node.channel_ok = node.channel_ok && k->channel_ok;
    node.has_hole = node.has_hole || k->has_hole;
  }
  if (node.kind == Form::Kind::Pred && node.b->kind == Form::Kind::Const &&
      node.b->channel != node.channel) {
    node.channel_ok = false;
  }

  uint64_t h = node_hash(node);
  auto& bucket = index_[h];
  for (FormRef cand : bucket) {
    if (node_equal(*cand, node)) return cand;
  }
  node.id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  FormRef ref = &nodes_.back();
  bucket.push_back(ref);
  return ref;
}

FormRef FormArena::var(const std::string& name, TypeRef type) {
  Form n;
  n.kind = Form::Kind::Var;
  n.name = name;
  n.var_type = type;
  return intern(std::move(n));
}

FormRef FormArena::constant(const std::string& name, Channel channel) {
  Form n;
  n.kind = Form::Kind::Const;
  n.name = name;
  n.channel = channel;
  return intern(std::move(n));
}

FormRef FormArena::lam(const std::string& binder, TypeRef binder_type, FormRef body) {
  Form n;
  n.kind = Form::Kind::Lam;
  n.name = binder;
  n.var_type = binder_type;
  n.a = body;
  return intern(std::move(n));
}

FormRef FormArena::app(FormRef fn, FormRef arg) {
  Form n;
  n.kind = Form::Kind::App;
  n.a = fn;
  n.b = arg;
  return intern(std::move(n));
}

FormRef FormArena::conj(std::vector<FormRef> kids) {
  std::vector<FormRef> flat;
  flat.reserve(kids.size());
  for (FormRef k : kids) {
    if (k->kind == Form::Kind::And) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(k);
    }
  }
  if (flat.size() == 1) return flat[0];
  Form n;
  n.kind = Form::Kind::And;
  n.kids = std::move(flat);
  return intern(std::move(n));
}

FormRef FormArena::pred(Channel channel, FormRef entity, FormRef constant) {
  Form n;
  n.kind = Form::Kind::Pred;
  n.channel = channel;
  n.a = entity;
  n.b = constant;
  return intern(std::move(n));
}

FormRef FormArena::hole(int index) {
  Form n;
  n.kind = Form::Kind::Hole;
  n.hole = index;
  return intern(std::move(n));
}

void FormArena::free_vars(FormRef e, std::vector<std::string>& out) const {
  switch (e->kind) {
    case Form::Kind::Var:
      out.push_back(e->name);
      return;
    case Form::Kind::Const:
    case Form::Kind::Hole:
      return;
    case Form::Kind::Lam: {
      std::vector<std::string> inner;
      free_vars(e->a, inner);
      for (auto& v : inner)
        if (v != e->name) out.push_back(std::move(v));
      return;
    }
    case Form::Kind::App:
    case Form::Kind::Pred:
      free_vars(e->a, out);
      free_vars(e->b, out);
      return;
    case Form::Kind::And:
      for (FormRef k : e->kids) free_vars(k, out);
      return;
  }
}

bool FormArena::is_free(FormRef e, const std::string& name) const {
  switch (e->kind) {
    case Form::Kind::Var:
      return e->name == name;
    case Form::Kind::Const:
    case Form::Kind::Hole:
      return false;
    case Form::Kind::Lam:
      return e->name != name && is_free(e->a, name);
    case Form::Kind::App:
    case Form::Kind::Pred:
      return is_free(e->a, name) || is_free(e->b, name);
    case Form::Kind::And:
      for (FormRef k : e->kids)
        if (is_free(k, name)) return true;
      return false;
  }
  return false;
}

FormRef FormArena::substitute(FormRef e, const std::string& name, FormRef value) {
  switch (e->kind) {
    case Form::Kind::Var:
      return e->name == name ? value : e;
    case Form::Kind::Const:
    case Form::Kind::Hole:
      return e;
    case Form::Kind::Lam: {
      if (e->name == name) return e;  // shadowed
      if (is_free(value, e->name) && is_free(e->a, name)) {
        // Rename the binder away from the capture.
        std::string fresh;
        do {
          fresh = e->name + "_" + std::to_string(++fresh_counter_);
        } while (is_free(e->a, fresh) || is_free(value, fresh));
        FormRef renamed = substitute(e->a, e->name, var(fresh, e->var_type));
        return lam(fresh, e->var_type, substitute(renamed, name, value));
      }
      return lam(e->name, e->var_type, substitute(e->a, name, value));
    }
    case Form::Kind::App:
      return app(substitute(e->a, name, value), substitute(e->b, name, value));
    case Form::Kind::Pred:
      return pred(e->channel, substitute(e->a, name, value), substitute(e->b, name, value));
    case Form::Kind::And: {
      std::vector<FormRef> kids;
      kids.reserve(e->kids.size());
      for (FormRef k : e->kids) kids.push_back(substitute(k, name, value));
      return conj(std::move(kids));
    }
  }
  return e;
}

FormRef FormArena::find_invalid(FormRef e) const {
  for (FormRef k : {e->a, e->b}) {
    if (k != nullptr && k->type->kind == TypeNode::Kind::Invalid) return find_invalid(k);
  }
  for (FormRef k : e->kids) {
    if (k->type->kind == TypeNode::Kind::Invalid) return find_invalid(k);
  }
  return e;
}

FormRef FormArena::reduce_inner(FormRef e) {
  auto it = reduce_memo_.find(e);
  if (it != reduce_memo_.end()) return it->second;
  FormRef out = e;
  switch (e->kind) {
    case Form::Kind::Var:
    case Form::Kind::Const:
    case Form::Kind::Hole:
      break;
    case Form::Kind::Lam: {
      FormRef body = reduce_inner(e->a);
      out = body == e->a ? e : lam(e->name, e->var_type, body);
      break;
    }
    case Form::Kind::App: {
      FormRef fn = reduce_inner(e->a);
      if (fn->kind == Form::Kind::Lam) {
        FormRef arg = reduce_inner(e->b);
        out = reduce_inner(substitute(fn->a, fn->name, arg));
      } else {
        FormRef arg = reduce_inner(e->b);
        out = (fn == e->a && arg == e->b) ? e : app(fn, arg);
      }
      break;
    }
    case Form::Kind::Pred: {
      FormRef a = reduce_inner(e->a);
      FormRef b = reduce_inner(e->b);
      out = (a == e->a && b == e->b) ? e : pred(e->channel, a, b);
      break;
    }
    case Form::Kind::And: {
      std::vector<FormRef> kids;
      kids.reserve(e->kids.size());
      bool changed = false;
      for (FormRef k : e->kids) {
        FormRef r = reduce_inner(k);
        changed = changed || r != k || r->kind == Form::Kind::And;
        kids.push_back(r);
      }
      out = changed ? conj(std::move(kids)) : e;
      break;
    }
  }
  reduce_memo_.emplace(e, out);
  return out;
}

FormRef FormArena::beta_reduce(FormRef e) {
  if (e->type->kind == TypeNode::Kind::Invalid) {
    throw TypingError("ill-typed subterm: " + text(find_invalid(e)));
  }
  return reduce_inner(e);
}

FormRef FormArena::apply_reduced(FormRef fn, FormRef arg) {
  uint64_t key = (static_cast<uint64_t>(fn->id) << 32) | arg->id;
  auto it = apply_memo_.find(key);
  if (it != apply_memo_.end()) return it->second;
  FormRef out = beta_reduce(app(fn, arg));
  apply_memo_.emplace(key, out);
  return out;
}

namespace {

// Canonical binder names: entity-typed binders draw from x, y, z, x1, ...;
// function-typed binders from f, g, h, f1, ...
std::string canonical_name(bool entity_like, int index) {
  static const char* ent[] = {"x", "y", "z"};
  static const char* fun[] = {"f", "g", "h"};
  const char** base = entity_like ? ent : fun;
  if (index < 3) return base[index];
  return std::string(base[index % 3]) + std::to_string(index / 3);
}

}  // namespace

FormRef FormArena::alpha_canonical(FormRef e) {
  int next_entity = 0;
  int next_fun = 0;
  std::vector<std::pair<std::string, FormRef>> env;  // old name -> replacement var

  std::function<FormRef(FormRef)> walk = [&](FormRef n) -> FormRef {
    switch (n->kind) {
      case Form::Kind::Var: {
        for (auto it = env.rbegin(); it != env.rend(); ++it) {
          if (it->first == n->name) return it->second;
        }
        return n;
      }
      case Form::Kind::Const:
      case Form::Kind::Hole:
        return n;
      case Form::Kind::Lam: {
        bool entity_like = n->var_type == entity_;
        std::string fresh = canonical_name(entity_like, entity_like ? next_entity++ : next_fun++);
        env.emplace_back(n->name, var(fresh, n->var_type));
        FormRef body = walk(n->a);
        env.pop_back();
        return lam(fresh, n->var_type, body);
      }
      case Form::Kind::App:
        return app(walk(n->a), walk(n->b));
      case Form::Kind::Pred:
        return pred(n->channel, walk(n->a), walk(n->b));
      case Form::Kind::And: {
        std::vector<FormRef> kids;
        kids.reserve(n->kids.size());
        for (FormRef k : n->kids) kids.push_back(walk(k));
        return conj(std::move(kids));
      }
    }
    return n;
  };
  return walk(e);
}

FormRef FormArena::sort_conjuncts(FormRef e) {
  switch (e->kind) {
    case Form::Kind::Var:
    case Form::Kind::Const:
    case Form::Kind::Hole:
      return e;
    case Form::Kind::Lam:
      return lam(e->name, e->var_type, sort_conjuncts(e->a));
    case Form::Kind::App:
      return app(sort_conjuncts(e->a), sort_conjuncts(e->b));
    case Form::Kind::Pred:
      return pred(e->channel, sort_conjuncts(e->a), sort_conjuncts(e->b));
    case Form::Kind::And: {
      std::vector<FormRef> kids;
      kids.reserve(e->kids.size());
      for (FormRef k : e->kids) kids.push_back(sort_conjuncts(k));
      std::vector<std::pair<std::string, FormRef>> keyed;
      keyed.reserve(kids.size());
      for (FormRef k : kids) {
        std::string key;
        if (k->kind == Form::Kind::Pred) {
          key = "0:" + channel_name(k->channel) + ":" +
                (k->b->kind == Form::Kind::Const || k->b->kind == Form::Kind::Var ? k->b->name
                                                                                  : text(k->b));
        } else {
          key = "1:" + text(k);
        }
        keyed.emplace_back(std::move(key), k);
      }
      std::stable_sort(keyed.begin(), keyed.end(),
                       [](const auto& l, const auto& r) { return l.first < r.first; });
      std::vector<FormRef> sorted;
      sorted.reserve(keyed.size());
      for (auto& [key, k] : keyed) {
        if (sorted.empty() || sorted.back() != k) sorted.push_back(k);
      }
      if (sorted.size() == 1) return sorted[0];
      // Bypass conj() flattening: kids are already flat and deduplicated.
      Form n;
      n.kind = Form::Kind::And;
      n.kids = std::move(sorted);
      return intern(std::move(n));
    }
  }
  return e;
}

FormRef FormArena::canonicalize(FormRef e) {
  auto it = canon_memo_.find(e);
  if (it != canon_memo_.end()) return it->second;
  FormRef out = alpha_canonical(sort_conjuncts(alpha_canonical(beta_reduce(e))));
  canon_memo_.emplace(e, out);
  return out;
}

const std::vector<AttrUse>& FormArena::attribute_set(FormRef z) {
  auto it = attrs_memo_.find(z);
  if (it != attrs_memo_.end()) return it->second;

  auto fail = [&]() -> void {
    throw FormError("not a sentence-level form: " + text(z));
  };
  if (z->kind != Form::Kind::Lam || z->var_type != entity_) fail();
  std::vector<FormRef> preds;
  FormRef body = z->a;
  if (body->kind == Form::Kind::Pred) {
    preds.push_back(body);
  } else if (body->kind == Form::Kind::And) {
    for (FormRef k : body->kids) preds.push_back(k);
  } else {
    fail();
  }
  std::vector<AttrUse> attrs;
  for (FormRef p : preds) {
    if (p->kind != Form::Kind::Pred || p->a->kind != Form::Kind::Var || p->a->name != z->name ||
        p->b->kind != Form::Kind::Const) {
      fail();
    }
    if (p->b->channel != p->channel) {
      throw FormError("predicate/constant channel mismatch in: " + text(z));
    }
    attrs.push_back({p->b->name, p->b->channel});
  }
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
  return attrs_memo_.emplace(z, std::move(attrs)).first->second;
}

FormRef FormArena::substitute_holes(FormRef skeleton, const std::vector<FormRef>& constants) {
  std::function<FormRef(FormRef)> walk = [&](FormRef n) -> FormRef {
    if (!n->has_hole) return n;
    switch (n->kind) {
      case Form::Kind::Hole: {
        if (n->hole < 1 || n->hole > static_cast<int>(constants.size())) {
          throw FormError("hole index " + std::to_string(n->hole) + " out of range");
        }
        return constants[n->hole - 1];
      }
      case Form::Kind::Lam:
        return lam(n->name, n->var_type, walk(n->a));
      case Form::Kind::App:
        return app(walk(n->a), walk(n->b));
      case Form::Kind::Pred: {
        FormRef b = walk(n->b);
        Channel ch = n->channel;
        // A predicate written over a hole adopts the channel of the filler.
        if (n->b->kind == Form::Kind::Hole && b->kind == Form::Kind::Const) ch = b->channel;
        return pred(ch, walk(n->a), b);
      }
      case Form::Kind::And: {
        std::vector<FormRef> kids;
        kids.reserve(n->kids.size());
        for (FormRef k : n->kids) kids.push_back(walk(k));
        return conj(std::move(kids));
      }
      default:
        return n;
    }
  };
  return walk(skeleton);
}

std::string FormArena::text(FormRef e) const {
  switch (e->kind) {
    case Form::Kind::Var:
      return e->name;
    case Form::Kind::Const:
      return e->name;
    case Form::Kind::Hole:
      return "v" + std::to_string(e->hole);
    case Form::Kind::Lam:
      return "(lam " + e->name + ":" + e->var_type->text + " " + text(e->a) + ")";
    case Form::Kind::App:
      return "(app " + text(e->a) + " " + text(e->b) + ")";
    case Form::Kind::Pred:
      return "(" + channel_name(e->channel) + " " + text(e->a) + " " + text(e->b) + ")";
    case Form::Kind::And: {
      if (e->kids.empty()) return "true";
      std::string out = "(and";
      for (FormRef k : e->kids) out += " " + text(k);
      return out + ")";
    }
  }
  return "?";
}

std::string FormArena::print_sentence(FormRef z) {
  attribute_set(z);  // validates the sentence-level shape
  std::string out = "(lam " + z->name + " ";
  FormRef body = z->a;
  auto pred_text = [&](FormRef p) {
    return "(" + channel_name(p->channel) + " " + p->a->name + " " + p->b->name + ")";
  };
  if (body->kind == Form::Kind::Pred) {
    out += pred_text(body);
  } else if (body->kids.empty()) {
    out += "true";
  } else {
    out += "(and";
    for (FormRef k : body->kids) out += " " + pred_text(k);
    out += ")";
  }
  return out + ")";
}

namespace {

struct SexpParser {
  const std::string& s;
  size_t pos = 0;

  explicit SexpParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) {
      throw FormError("expected '" + std::string(1, c) + "' at offset " + std::to_string(pos) +
                      " in logical form text");
    }
  }
  std::string atom() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '(' && s[pos] != ')' && s[pos] != '\t' &&
           s[pos] != '\n') {
      ++pos;
    }
    if (start == pos) throw FormError("expected atom at offset " + std::to_string(pos));
    return s.substr(start, pos - start);
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
};

}  // namespace

FormRef FormArena::parse_sentence(const std::string& input) {
  SexpParser p(input);
  p.expect('(');
  if (p.atom() != "lam") throw FormError("logical form must start with '(lam'");
  std::string binder = p.atom();
  FormRef x = var(binder, t_entity());

  auto parse_pred = [&]() -> FormRef {
    p.expect('(');
    Channel ch = channel_from_name(p.atom());
    std::string v = p.atom();
    if (v != binder) {
      throw FormError("predicate variable '" + v + "' does not match binder '" + binder + "'");
    }
    std::string cname = p.atom();
    p.expect(')');
    return pred(ch, x, constant(cname, ch));
  };

  FormRef body = nullptr;
  if (p.peek() == '(') {
    size_t mark = p.pos;
    p.expect('(');
    std::string head = p.atom();
    if (head == "and") {
      std::vector<FormRef> preds;
      while (p.peek() == '(') preds.push_back(parse_pred());
      p.expect(')');
      if (preds.empty()) throw FormError("empty conjunction is written 'true'");
      body = conj(std::move(preds));
    } else {
      p.pos = mark;
      body = parse_pred();
    }
  } else {
    if (p.atom() != "true") throw FormError("expected predicate, conjunction, or 'true'");
    body = truth();
  }
  p.expect(')');
  p.skip_ws();
  if (p.pos != input.size()) {
    throw FormError("trailing characters at offset " + std::to_string(p.pos));
  }
  return canonicalize(lam(binder, t_entity(), body));
}

}  // namespace groundlex
