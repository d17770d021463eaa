#include "groundlex/supervised.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace groundlex {

namespace {

// Candidate lexemes for one example: every span of at most 3 tokens paired
// with the empty constant list or one constant the annotation mentions.
std::vector<Lexeme> candidate_lexemes(const std::vector<std::string>& tokens,
                                      const std::vector<AttrUse>& attrs) {
  std::vector<Lexeme> out;
  size_t n = tokens.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j <= n && j - i <= 3; ++j) {
      std::vector<std::string> span(tokens.begin() + (long)i, tokens.begin() + (long)j);
      out.push_back({span, {}});
      for (const AttrUse& a : attrs) out.push_back({span, {a.name}});
    }
  return out;
}

}  // namespace

bool annotated_form_gradient(Parser& parser, const ParseResult& result, FormRef z,
                             std::map<int, double>& grad) {
  grad.clear();
  if (result.failed()) return false;
  size_t target = result.entries.size();
  for (size_t e = 0; e < result.entries.size(); ++e)
    if (result.entries[e].canon == z) {
      target = e;
      break;
    }
  if (target == result.entries.size()) return false;
  std::vector<double> conditional(result.entries.size(), 0.0);
  conditional[target] = 1.0;
  std::vector<double> marginal(result.entries.size());
  for (size_t e = 0; e < result.entries.size(); ++e) marginal[e] = result.entry_prob(e);
  for (const auto& [fid, v] : parser.expected_features(result, conditional)) grad[fid] += v;
  for (const auto& [fid, v] : parser.expected_features(result, marginal)) grad[fid] -= v;
  return true;
}

SupervisedReport train_supervised(GrammarCore& core, const std::vector<SupervisedExample>& data,
                                  const SupervisedConfig& cfg) {
  SupervisedReport report;
  report.examples = data.size();
  if (data.empty()) return report;

  // Annotations, parsed once into the shared arena; constants registered as
  // they are first mentioned.
  std::vector<FormRef> labels;
  labels.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    FormRef z;
    try {
      z = core.arena.parse_sentence(data[i].lf);
    } catch (const std::exception& e) {
      throw FormError("example " + std::to_string(i) + ": " + e.what());
    }
    labels.push_back(z);
    for (const AttrUse& a : core.arena.attribute_set(z))
      if (!core.constants.contains(a.name))
        core.constants.add({a.name, a.channel, ConstantOrigin::Bootstrap});
    for (const std::string& tok : data[i].tokens) core.lexicon.add_null_word(tok);
  }

  // Candidate generation with retention: a candidate survives when it is a
  // leaf of some beam derivation of the annotated form, parsed against the
  // example's own candidates alone (zero weights).
  for (size_t i = 0; i < data.size(); ++i) {
    GrammarCore scratch;
    for (const AttributeConstant& c : core.constants.all()) scratch.constants.add(c);
    for (const std::string& tok : data[i].tokens) scratch.lexicon.add_null_word(tok);
    const std::vector<AttrUse>& attrs = core.arena.attribute_set(labels[i]);
    for (const Lexeme& cand : candidate_lexemes(data[i].tokens, attrs))
      scratch.lexicon.add_lexeme(cand);
    Parser parser(scratch);
    ParseResult res = parser.parse(data[i].tokens, cfg.beam);
    FormRef z = scratch.arena.parse_sentence(data[i].lf);
    size_t entry = res.entries.size();
    for (size_t e = 0; e < res.entries.size(); ++e)
      if (res.entries[e].canon == z) {
        entry = e;
        break;
      }
    if (entry == res.entries.size()) {
      ++report.unparsed;
      continue;
    }
    for (int lid : parser.reachable_lexemes(res, entry)) {
      const Lexeme& lx = scratch.lexicon.lexemes()[(size_t)lid];
      if (!core.lexicon.contains_lexeme(lx)) {
        core.lexicon.add_lexeme(lx);
        ++report.lexemes_added;
      }
    }
  }

  // Stochastic gradient ascent on the hidden-derivation log-likelihood.
  Parser parser(core);
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  long long t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) {
      ParseResult res = parser.parse(data[i].tokens, cfg.beam);
      std::map<int, double> grad;
      if (!annotated_form_gradient(parser, res, labels[i], grad)) continue;
      double eta = std::max(cfg.rate - (double)t * cfg.decay, 0.0);
      for (const auto& [fid, v] : grad) core.model.add_weight(fid, eta * v);
      ++t;
    }
  }

  size_t hits = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    ParseResult res = parser.parse(data[i].tokens, cfg.beam);
    if (!res.failed() && res.entries[0].canon == labels[i]) ++hits;
  }
  report.exact_match = (double)hits / (double)data.size();
  return report;
}

size_t induce_new_lexemes(GrammarCore& core,
                          const std::vector<std::vector<std::string>>& sentences,
                          const std::vector<std::string>& new_constants) {
  std::vector<std::vector<std::string>> lists;
  std::set<std::vector<std::string>> seen_lists;
  for (const Lexeme& lx : core.lexicon.lexemes())
    if (seen_lists.insert(lx.constants).second) lists.push_back(lx.constants);

  size_t added = 0;
  std::set<std::string> processed;
  for (const auto& sent : sentences)
    for (const std::string& tok : sent) {
      if (core.lexicon.known_word(tok) || core.lexicon.is_null_word(tok)) continue;
      if (!processed.insert(tok).second) continue;
      for (const std::string& c : new_constants) {
        Lexeme lx{{tok}, {c}};
        if (!core.lexicon.contains_lexeme(lx)) {
          core.lexicon.add_lexeme(lx);
          ++added;
        }
      }
      for (const auto& L : lists) {
        Lexeme lx{{tok}, L};
        if (!core.lexicon.contains_lexeme(lx)) {
          core.lexicon.add_lexeme(lx);
          ++added;
        }
      }
      core.lexicon.add_null_word(tok);
    }
  return added;
}

}  // namespace groundlex
