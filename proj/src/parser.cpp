#include "groundlex/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>

namespace groundlex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : sentence) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double ParseResult::entry_prob(size_t entry) const {
  return std::exp(entries[entry].log_mass - log_z);
}

double Parser::form_score(FormRef form) {
  auto it = form_score_cache_.find(form);
  if (it != form_score_cache_.end()) return it->second;
  std::vector<std::pair<std::string, int>> counts;
  count_form_constants(form, counts);
  double score = 0.0;
  for (const auto& [name, count] : counts) {
    score += core_.model.weight_by_name(ParseModel::conjunct_count_feature(name, count));
  }
  form_score_cache_.emplace(form, score);
  return score;
}

void Parser::count_form_constants(FormRef form,
                                  std::vector<std::pair<std::string, int>>& out) const {
  std::map<std::string, int> counts;
  std::function<void(FormRef)> walk = [&](FormRef e) {
    switch (e->kind) {
      case Form::Kind::Pred:
        if (e->b->kind == Form::Kind::Const) counts[e->b->name] += 1;
        return;
      case Form::Kind::Lam:
        walk(e->a);
        return;
      case Form::Kind::App:
        walk(e->a);
        walk(e->b);
        return;
      case Form::Kind::And:
        for (FormRef k : e->kids) walk(k);
        return;
      default:
        return;
    }
  };
  walk(form);
  out.assign(counts.begin(), counts.end());
}

const std::vector<LexicalItem>& Parser::items_for(int lexeme_id) {
  if (item_cache_templates_ != core_.lexicon.templates().size()) {
    item_cache_.clear();
    item_cache_templates_ = core_.lexicon.templates().size();
  }
  auto it = item_cache_.find(lexeme_id);
  if (it != item_cache_.end()) return it->second;
  std::vector<LexicalItem> items;
  for (size_t t = 0; t < core_.lexicon.templates().size(); ++t) {
    auto item = instantiate(core_.lexicon, lexeme_id, static_cast<int>(t), core_.constants,
                            core_.arena);
    if (item) items.push_back(*item);
  }
  return item_cache_.emplace(lexeme_id, std::move(items)).first->second;
}

double Parser::lexeme_template_score(int lexeme_id, int template_id) {
  const Lexeme& lex = core_.lexicon.lexemes()[lexeme_id];
  const Template& tmpl = core_.lexicon.templates()[template_id];
  return core_.model.weight_by_name(ParseModel::lexeme_feature(lex)) +
         core_.model.weight_by_name(ParseModel::template_feature(tmpl.id));
}

double Parser::skip_score(const std::string& word) {
  return core_.model.weight_by_name(ParseModel::null_feature(word)) +
         core_.model.weight_by_name(ParseModel::skip_count_feature());
}

ParseResult Parser::parse(const std::vector<std::string>& tokens, int beam) {
  ParseResult result;
  result.tokens = tokens;
  result.log_z = kNegInf;
  const int n = static_cast<int>(tokens.size());
  if (n == 0 || n > 25 || beam <= 0) return result;
  form_score_cache_.clear();

  auto& forest = result.forest;

  auto canon_text = [&](FormRef canon) -> const std::string& {
    auto it = text_cache_.find(canon);
    if (it != text_cache_.end()) return it->second;
    return text_cache_.emplace(canon, core_.arena.text(canon)).first->second;
  };

  // cell (i, j) covers tokens [i, j); cells hold forest entry indices.
  auto cell_at = [n](int i, int j) { return i * (n + 1) + j; };
  std::vector<std::vector<int>> chart(static_cast<size_t>((n + 1) * (n + 1)));

  struct Key {
    CategoryRef cat;
    FormRef canon;
    TopClass top;
    bool leading;
    bool operator==(const Key& o) const {
      return cat == o.cat && canon == o.canon && top == o.top && leading == o.leading;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      uint64_t h = reinterpret_cast<uintptr_t>(k.cat) * 0x9E3779B97F4A7C15ull;
      h ^= reinterpret_cast<uintptr_t>(k.canon) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      h ^= (uint64_t(k.top) * 2 + (k.leading ? 1 : 0)) * 0xBF58476D1CE4E5B9ull;
      return static_cast<size_t>(h);
    }
  };

  std::vector<double> null_weight(n, 0.0);
  std::vector<bool> skippable(n, false);
  bool all_null = true;
  for (int t = 0; t < n; ++t) {
    skippable[t] = core_.lexicon.is_null_word(tokens[t]);
    if (skippable[t]) null_weight[t] = skip_score(tokens[t]);
    all_null = all_null && skippable[t];
  }

  std::vector<ForestEntry> local;  // per-cell scratch, insertion-ordered
  std::unordered_map<Key, size_t, KeyHash> index;

  for (int width = 1; width <= n; ++width) {
    for (int i = 0; i + width <= n; ++i) {
      const int j = i + width;
      local.clear();
      index.clear();

      auto add_edge = [&](CategoryRef cat, FormRef canon, TopClass top, bool leading,
                          Edge ed) {
        double in_l = ed.left >= 0 ? forest[ed.left].inside : 0.0;
        double in_r = ed.right >= 0 ? forest[ed.right].inside : 0.0;
        double vit_l = ed.left >= 0 ? forest[ed.left].viterbi : 0.0;
        double vit_r = ed.right >= 0 ? forest[ed.right].viterbi : 0.0;
        double mass = ed.local + in_l + in_r;
        double best = ed.local + vit_l + vit_r;
        auto [it, fresh] = index.emplace(Key{cat, canon, top, leading}, local.size());
        if (fresh) {
          ForestEntry fe;
          fe.cat = cat;
          fe.canon = canon;
          fe.span_i = i;
          fe.span_j = j;
          fe.top = top;
          fe.leading_skip = leading;
          fe.inside = mass;
          fe.viterbi = best;
          fe.edges.push_back(ed);
          local.push_back(std::move(fe));
          return;
        }
        ForestEntry& fe = local[it->second];
        fe.edges.push_back(ed);
        fe.inside = logaddexp(fe.inside, mass);
        fe.viterbi = std::max(fe.viterbi, best);
      };

      // Lexical items covering the whole span.
      if (width <= 3) {
        std::vector<std::string> span(tokens.begin() + i, tokens.begin() + j);
        if (const std::vector<int>* lexeme_ids = core_.lexicon.lexemes_for(span)) {
          for (int lid : *lexeme_ids) {
            for (const LexicalItem& item : items_for(lid)) {
              Edge ed;
              ed.op = Edge::Op::Lex;
              ed.lexeme_id = item.lexeme_id;
              ed.template_id = item.template_id;
              ed.local = lexeme_template_score(item.lexeme_id, item.template_id);
              add_edge(item.category, core_.arena.canonicalize(item.form), TopClass::Lex,
                       false, ed);
            }
          }
        }
      }

      // Binary combination: forward and backward application on canonical
      // forms (canonicalization is a congruence for application).
      std::unordered_map<CategoryRef, std::vector<int>> left_by_cat;
      std::unordered_map<CategoryRef, std::vector<int>> right_by_cat;  // non-leading only
      for (int k = i + 1; k < j; ++k) {
        const auto& left = chart[cell_at(i, k)];
        const auto& right = chart[cell_at(k, j)];
        if (left.empty() || right.empty()) continue;
        left_by_cat.clear();
        right_by_cat.clear();
        for (int lid : left) left_by_cat[forest[lid].cat].push_back(lid);
        for (int rid : right)
          if (!forest[rid].leading_skip) right_by_cat[forest[rid].cat].push_back(rid);

        auto combine = [&](int lid, int rid, bool fwd) {
          const ForestEntry& a = forest[lid];
          const ForestEntry& b = forest[rid];
          FormRef fn = fwd ? a.canon : b.canon;
          FormRef arg = fwd ? b.canon : a.canon;
          if (fn->type->kind != TypeNode::Kind::Function || fn->type->from != arg->type) return;
          FormRef out_form = core_.arena.apply_reduced(fn, arg);
          if (!out_form->channel_ok) return;
          Edge ed;
          ed.op = fwd ? Edge::Op::Fwd : Edge::Op::Bwd;
          ed.left = lid;
          ed.right = rid;
          add_edge(fwd ? a.cat->result : b.cat->result, core_.arena.canonicalize(out_form),
                   TopClass::App, a.leading_skip, ed);
        };

        // A skipped token between two items belongs to the left one, so the
        // right operand must start with an unskipped token.
        for (int lid : left) {
          const ForestEntry& a = forest[lid];
          if (a.cat->kind != CategoryNode::Kind::Fwd) continue;
          auto it = right_by_cat.find(a.cat->arg);
          if (it == right_by_cat.end()) continue;
          for (int rid : it->second) combine(lid, rid, true);
        }
        for (int rid : right) {
          const ForestEntry& b = forest[rid];
          if (b.leading_skip || b.cat->kind != CategoryNode::Kind::Bwd) continue;
          auto it = left_by_cat.find(b.cat->arg);
          if (it == left_by_cat.end()) continue;
          for (int lid : it->second) combine(lid, rid, false);
        }
      }

      // Skips wrap lexical items only, never applications: following skips
      // outermost, preceding skips inside them.
      if (width >= 2 && skippable[j - 1]) {
        for (int cid : chart[cell_at(i, j - 1)]) {
          const ForestEntry& c = forest[cid];
          if (c.top == TopClass::App || c.top == TopClass::Null) continue;
          Edge ed;
          ed.op = Edge::Op::SkipR;
          ed.left = cid;
          ed.token = j - 1;
          ed.local = null_weight[j - 1];
          add_edge(c.cat, c.canon, TopClass::SkipR, c.leading_skip, ed);
        }
      }
      if (width >= 2 && skippable[i]) {
        for (int cid : chart[cell_at(i + 1, j)]) {
          const ForestEntry& c = forest[cid];
          if (c.top != TopClass::Lex && c.top != TopClass::SkipL) continue;
          Edge ed;
          ed.op = Edge::Op::SkipL;
          ed.left = cid;
          ed.token = i;
          ed.local = null_weight[i];
          add_edge(c.cat, c.canon, TopClass::SkipL, true, ed);
        }
      }

      // The pure-null derivation exists only when every token is null-class.
      if (i == 0 && j == n && all_null) {
        Edge ed;
        ed.op = Edge::Op::NullRoot;
        for (int t = 0; t < n; ++t) ed.local += null_weight[t];
        FormRef top = core_.arena.lam("x", core_.arena.t_entity(), core_.arena.truth());
        add_edge(core_.cats.n(), core_.arena.canonicalize(top), TopClass::Null, false, ed);
      }

      // Per-cell beam: keep the N best (category, canonical form) groups by
      // best derivation score; a group carries all its shape refinements.
      struct Group {
        CategoryRef cat;
        FormRef canon;
        double best = kNegInf;
        std::vector<size_t> members;  // indices into local
      };
      std::unordered_map<Key, size_t, KeyHash> group_index;
      std::vector<Group> groups;
      for (size_t li = 0; li < local.size(); ++li) {
        Key gk{local[li].cat, local[li].canon, TopClass::Lex, false};
        auto [it, fresh] = group_index.emplace(gk, groups.size());
        if (fresh) groups.push_back({local[li].cat, local[li].canon, kNegInf, {}});
        Group& g = groups[it->second];
        g.best = std::max(g.best, local[li].viterbi + form_score(local[li].canon));
        g.members.push_back(li);
      }
      std::vector<size_t> order(groups.size());
      for (size_t g = 0; g < order.size(); ++g) order[g] = g;
      std::sort(order.begin(), order.end(), [&](size_t l, size_t r) {
        if (groups[l].best != groups[r].best) return groups[l].best > groups[r].best;
        const std::string& lt = canon_text(groups[l].canon);
        const std::string& rt = canon_text(groups[r].canon);
        if (lt != rt) return lt < rt;
        return groups[l].cat->text < groups[r].cat->text;
      });
      if (order.size() > static_cast<size_t>(beam)) order.resize(beam);

      std::vector<int>& cell = chart[cell_at(i, j)];
      for (size_t g : order) {
        for (size_t li : groups[g].members) {
          forest.push_back(std::move(local[li]));
          cell.push_back(static_cast<int>(forest.size()) - 1);
        }
      }
    }
  }

  // Root: S- or N-rooted entries, merged across categories and derivation
  // shapes by canonical form.
  std::unordered_map<const Form*, size_t> root_index;
  for (int id : chart[cell_at(0, n)]) {
    const ForestEntry& fe = forest[id];
    if (fe.cat != core_.cats.s() && fe.cat != core_.cats.n()) continue;
    auto [it, fresh] = root_index.emplace(fe.canon, result.entries.size());
    if (fresh) result.entries.push_back({fe.canon, 0.0, {}});
    result.entries[it->second].parts.push_back(id);
  }
  for (RootEntry& root : result.entries) {
    double mass = kNegInf;
    for (int id : root.parts) mass = logaddexp(mass, forest[id].inside);
    root.log_mass = mass + form_score(root.canon);
    result.log_z = logaddexp(result.log_z, root.log_mass);
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [&](const RootEntry& l, const RootEntry& r) {
              if (l.log_mass != r.log_mass) return l.log_mass > r.log_mass;
              return canon_text(l.canon) < canon_text(r.canon);
            });
  return result;
}

std::map<int, double> Parser::expected_features(const ParseResult& result,
                                                const std::vector<double>& weights) {
  if (weights.size() != result.entries.size())
    throw FormError("root weight vector does not match the root entries");
  std::map<int, double> out;
  ParseModel& model = core_.model;
  int skip_fid = model.feature_id(ParseModel::skip_count_feature());
  std::vector<double> outside(result.forest.size(), kNegInf);

  for (size_t e = 0; e < result.entries.size(); ++e) {
    if (weights[e] <= 0.0) continue;
    const RootEntry& root = result.entries[e];
    // Conjunct-count indicators of the canonical root form fire exactly
    // once per derivation.
    std::vector<std::pair<std::string, int>> counts;
    count_form_constants(root.canon, counts);
    for (const auto& [name, count] : counts)
      out[model.feature_id(ParseModel::conjunct_count_feature(name, count))] += weights[e];
    double inside = kNegInf;
    for (int id : root.parts) inside = logaddexp(inside, result.forest[id].inside);
    for (int id : root.parts)
      outside[id] = logaddexp(outside[id], std::log(weights[e]) - inside);
  }

  // Forest ids are topological (children first), so one reverse sweep
  // pushes outside mass down while collecting edge posteriors.
  for (size_t v = result.forest.size(); v-- > 0;) {
    if (outside[v] == kNegInf) continue;
    for (const Edge& ed : result.forest[v].edges) {
      double in_l = ed.left >= 0 ? result.forest[ed.left].inside : 0.0;
      double in_r = ed.right >= 0 ? result.forest[ed.right].inside : 0.0;
      double post = std::exp(outside[v] + ed.local + in_l + in_r);
      switch (ed.op) {
        case Edge::Op::Lex: {
          const Lexeme& lex = core_.lexicon.lexemes()[ed.lexeme_id];
          out[model.feature_id(ParseModel::lexeme_feature(lex))] += post;
          out[model.feature_id(ParseModel::template_feature(
              core_.lexicon.templates()[ed.template_id].id))] += post;
          break;
        }
        case Edge::Op::Fwd:
        case Edge::Op::Bwd:
          break;
        case Edge::Op::SkipL:
        case Edge::Op::SkipR:
          out[model.feature_id(ParseModel::null_feature(result.tokens[ed.token]))] += post;
          out[skip_fid] += post;
          break;
        case Edge::Op::NullRoot:
          for (const std::string& token : result.tokens) {
            out[model.feature_id(ParseModel::null_feature(token))] += post;
            out[skip_fid] += post;
          }
          break;
      }
      if (ed.left >= 0)
        outside[ed.left] = logaddexp(outside[ed.left], outside[v] + ed.local + in_r);
      if (ed.right >= 0)
        outside[ed.right] = logaddexp(outside[ed.right], outside[v] + ed.local + in_l);
    }
  }
  return out;
}

std::set<int> Parser::reachable_lexemes(const ParseResult& result, size_t entry) const {
  std::set<int> lexemes;
  if (entry >= result.entries.size()) return lexemes;
  std::vector<char> seen(result.forest.size(), 0);
  std::vector<int> stack(result.entries[entry].parts);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    for (const Edge& ed : result.forest[v].edges) {
      if (ed.op == Edge::Op::Lex) lexemes.insert(ed.lexeme_id);
      if (ed.left >= 0 && !seen[ed.left]) stack.push_back(ed.left);
      if (ed.right >= 0 && !seen[ed.right]) stack.push_back(ed.right);
    }
  }
  return lexemes;
}

std::vector<Derivation> Parser::enumerate(const ParseResult& result, size_t entry,
                                          size_t limit) {
  if (entry >= result.entries.size()) throw FormError("no such root entry");
  ParseModel& model = core_.model;
  int skip_fid = model.feature_id(ParseModel::skip_count_feature());

  struct Partial {
    double leaf = 0.0;
    std::string sig;
    std::map<int, double> fv;
  };
  std::unordered_map<int, std::vector<Partial>> memo;
  size_t produced = 0;

  std::function<const std::vector<Partial>&(int)> build =
      [&](int v) -> const std::vector<Partial>& {
    auto hit = memo.find(v);
    if (hit != memo.end()) return hit->second;
    const ForestEntry& fe = result.forest[v];
    std::vector<Partial> out;
    for (const Edge& ed : fe.edges) {
      switch (ed.op) {
        case Edge::Op::Lex: {
          const Lexeme& lex = core_.lexicon.lexemes()[ed.lexeme_id];
          Partial p;
          p.leaf = ed.local;
          p.sig = "(lex " + std::to_string(fe.span_i) + " " + std::to_string(fe.span_j) +
                  " " + ParseModel::lexeme_feature(lex) + ":" +
                  core_.lexicon.templates()[ed.template_id].id + ")";
          p.fv[model.feature_id(ParseModel::lexeme_feature(lex))] += 1.0;
          p.fv[model.feature_id(ParseModel::template_feature(
              core_.lexicon.templates()[ed.template_id].id))] += 1.0;
          out.push_back(std::move(p));
          break;
        }
        case Edge::Op::SkipL:
        case Edge::Op::SkipR: {
          int null_fid = model.feature_id(ParseModel::null_feature(result.tokens[ed.token]));
          for (const Partial& c : build(ed.left)) {
            Partial p = c;
            p.leaf += ed.local;
            p.sig = ed.op == Edge::Op::SkipL
                        ? "(sl " + std::to_string(ed.token) + " " + c.sig + ")"
                        : "(sr " + c.sig + " " + std::to_string(ed.token) + ")";
            p.fv[null_fid] += 1.0;
            p.fv[skip_fid] += 1.0;
            out.push_back(std::move(p));
          }
          break;
        }
        case Edge::Op::Fwd:
        case Edge::Op::Bwd: {
          const auto& ls = build(ed.left);
          const auto& rs = build(ed.right);
          for (const Partial& l : ls) {
            for (const Partial& r : rs) {
              Partial p;
              p.leaf = l.leaf + r.leaf + ed.local;
              p.sig = std::string(ed.op == Edge::Op::Fwd ? "(fa " : "(ba ") + l.sig + " " +
                      r.sig + ")";
              p.fv = l.fv;
              for (const auto& [fid, val] : r.fv) p.fv[fid] += val;
              out.push_back(std::move(p));
            }
          }
          break;
        }
        case Edge::Op::NullRoot: {
          Partial p;
          p.leaf = ed.local;
          p.sig = "(null)";
          for (const std::string& token : result.tokens) {
            p.fv[model.feature_id(ParseModel::null_feature(token))] += 1.0;
            p.fv[skip_fid] += 1.0;
          }
          out.push_back(std::move(p));
          break;
        }
      }
      produced += out.size();
      if (out.size() > limit || produced > 64 * limit)
        throw FormError("derivation enumeration limit exceeded");
    }
    return memo.emplace(v, std::move(out)).first->second;
  };

  const RootEntry& root = result.entries[entry];
  double fscore = form_score(root.canon);
  std::vector<std::pair<std::string, int>> counts;
  count_form_constants(root.canon, counts);
  std::vector<Derivation> ders;
  for (int part : root.parts) {
    for (const Partial& p : build(part)) {
      Derivation d;
      d.score = p.leaf + fscore;
      d.signature = p.sig;
      for (const auto& [fid, val] : p.fv) d.features.add(fid, val);
      for (const auto& [name, count] : counts)
        d.features.add(model.feature_id(ParseModel::conjunct_count_feature(name, count)), 1.0);
      d.features.normalize();
      ders.push_back(std::move(d));
    }
  }
  std::sort(ders.begin(), ders.end(), [](const Derivation& l, const Derivation& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.signature < r.signature;
  });
  if (ders.size() > limit) throw FormError("derivation enumeration limit exceeded");
  return ders;
}

}  // namespace groundlex
