#include "groundlex/joint.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "groundlex/supervised.hpp"

namespace groundlex {

namespace {

std::set<std::string> to_set(const std::vector<std::string>& v) {
  return std::set<std::string>(v.begin(), v.end());
}

}  // namespace

std::vector<std::string> execute(FormArena& arena, FormRef z,
                                 const std::map<std::string, std::map<std::string, bool>>& world,
                                 const std::vector<ObjectFeatures>& objects) {
  const std::vector<AttrUse>& attrs = arena.attribute_set(z);
  std::vector<std::string> out;
  for (const ObjectFeatures& o : objects) {
    bool in = true;
    for (const AttrUse& a : attrs) {
      auto oit = world.find(o.id);
      if (oit == world.end()) throw FormError("world assignment missing object '" + o.id + "'");
      auto ait = oit->second.find(a.name);
      if (ait == oit->second.end())
        throw FormError("world assignment missing '" + a.name + "' for object '" + o.id + "'");
      if (!ait->second) {
        in = false;
        break;
      }
    }
    if (in) out.push_back(o.id);
  }
  return out;
}

double membership_prob(JointModel& m, FormRef z, const ObjectFeatures& o) {
  double q = 1.0;
  for (const AttrUse& a : m.core.arena.attribute_set(z))
    q *= classifier_prob(m.bank.get(a.name), o);
  return q;
}

double set_likelihood(JointModel& m, FormRef z, const std::vector<ObjectFeatures>& objects,
                      const std::set<std::string>& gold) {
  double lik = 1.0;
  for (const ObjectFeatures& o : objects) {
    double q = membership_prob(m, z, o);
    lik *= gold.count(o.id) ? q : 1.0 - q;
  }
  return lik;
}

Inference infer(JointModel& m, Parser& parser, const std::vector<std::string>& tokens,
                const std::vector<ObjectFeatures>& objects, const std::set<std::string>& gold,
                int beam) {
  Inference inf;
  inf.parse = parser.parse(tokens, beam);
  if (inf.parse.failed()) {
    inf.parse_failed = true;
    return inf;
  }
  size_t ne = inf.parse.entries.size();
  inf.member.resize(ne);
  inf.lik.resize(ne);
  std::vector<double> joint(ne);
  double total = 0.0;
  for (size_t e = 0; e < ne; ++e) {
    FormRef z = inf.parse.entries[e].canon;
    std::vector<double>& mem = inf.member[e];
    mem.reserve(objects.size());
    double lik = 1.0;
    for (const ObjectFeatures& o : objects) {
      double q = membership_prob(m, z, o);
      mem.push_back(q);
      lik *= gold.count(o.id) ? q : 1.0 - q;
    }
    inf.lik[e] = lik;
    joint[e] = inf.parse.entry_prob(e) * lik;
    total += joint[e];
  }
  if (total <= 0.0) {
    inf.unexplainable = true;
    return inf;
  }
  inf.post.resize(ne);
  for (size_t e = 0; e < ne; ++e) inf.post[e] = joint[e] / total;
  return inf;
}

std::map<int, double> language_gradient(Parser& parser, const Inference& inf) {
  std::map<int, double> grad;
  if (inf.parse_failed || inf.unexplainable) return grad;
  const ParseResult& res = inf.parse;
  // Posterior-weighted conditional expectation minus the model expectation.
  std::vector<double> marginal(res.entries.size());
  for (size_t e = 0; e < res.entries.size(); ++e) marginal[e] = res.entry_prob(e);
  for (const auto& [fid, v] : parser.expected_features(res, inf.post)) grad[fid] += v;
  for (const auto& [fid, v] : parser.expected_features(res, marginal)) grad[fid] -= v;
  return grad;
}

std::map<std::string, std::vector<double>> perception_gradient(
    JointModel& m, const Inference& inf, const std::vector<ObjectFeatures>& objects,
    const std::set<std::string>& gold) {
  std::map<std::string, std::vector<double>> grads;
  if (inf.parse_failed || inf.unexplainable) return grads;
  size_t dims = (size_t)(m.bank.d_c() + m.bank.d_s() + 1);
  for (size_t e = 0; e < inf.parse.entries.size(); ++e) {
    double post = inf.post[e];
    if (post <= 0.0) continue;
    const std::vector<AttrUse>& attrs = m.core.arena.attribute_set(inf.parse.entries[e].canon);
    if (attrs.empty()) continue;  // universal form mentions no classifier
    for (size_t oi = 0; oi < objects.size(); ++oi) {
      const ObjectFeatures& o = objects[oi];
      double mprob = inf.member[e][oi];  // product of the attribute probabilities
      bool in_gold = gold.count(o.id) > 0;
      for (const AttrUse& a : attrs) {
        double p = classifier_prob(m.bank.get(a.name), o);
        // E[w_{o,c} | z', G, o] - p in closed form: the expectation is 1 when
        // the object is selected, and p*(1 - mprob/p)/(1 - mprob) otherwise.
        double coeff;
        if (in_gold) {
          coeff = 1.0 - p;
        } else {
          double denom = 1.0 - mprob;
          if (denom <= 0.0) continue;  // zero-likelihood entry, post already 0
          coeff = -mprob * (1.0 - p) / denom;
        }
        auto [it, inserted] = grads.try_emplace(a.name, dims, 0.0);
        std::vector<double>& g = it->second;
        double w = post * coeff;
        size_t i = 0;
        for (double v : o.color) g[i++] += w * v;
        for (double v : o.shape) g[i++] += w * v;
        g[i] += w;  // bias
      }
    }
  }
  for (auto& [name, g] : grads) {
    const AttributeClassifier& c = m.bank.get(name);
    size_t lo = c.channel == Channel::Color ? 0 : (size_t)m.bank.d_c();
    size_t hi = c.channel == Channel::Color ? (size_t)m.bank.d_c()
                                            : (size_t)(m.bank.d_c() + m.bank.d_s());
    for (size_t i = 0; i + 1 < g.size(); ++i)
      if (i < lo || i >= hi) g[i] = 0.0;
  }
  return grads;
}

size_t extend_model(JointModel& m, const std::vector<SceneRecord>& records, int new_classifiers,
                    uint64_t seed) {
  if (m.bank.d_c() == 0 && m.bank.d_s() == 0) {
    if (!records.empty() && !records[0].objects.empty())
      m.bank.set_dims((int)records[0].objects[0].color.size(),
                      (int)records[0].objects[0].shape.size());
    else
      throw FormError("cannot size the classifier bank: no trained classifiers and no objects");
  }
  std::vector<std::string> induced;
  for (const AttributeConstant& c : m.core.constants.all())
    if (c.origin == ConstantOrigin::Induced) induced.push_back(c.name);
  if (induced.empty() && new_classifiers > 0) {
    std::vector<AttributeClassifier> bank =
        new_classifier_bank(new_classifiers, m.bank.d_c(), m.bank.d_s(), seed);
    for (AttributeClassifier& c : bank) {
      m.core.constants.add({c.constant, c.channel, ConstantOrigin::Induced});
      induced.push_back(c.constant);
      m.bank.add(std::move(c));
    }
  }
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(records.size());
  for (const SceneRecord& r : records) sentences.push_back(r.sentence);
  return induce_new_lexemes(m.core, sentences, induced);
}

std::vector<EpochStats> train_online(JointModel& m, Parser& parser,
                                     const std::vector<SceneRecord>& records,
                                     const TrainConfig& cfg) {
  if (cfg.rate <= 0.0) throw FormError("learning rate must be positive");
  if (cfg.threshold <= 0.0 || cfg.threshold >= 1.0)
    throw FormError("prediction threshold must lie strictly inside (0, 1)");
  std::vector<EpochStats> stats;
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  long long t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats st;
    st.epoch = epoch;
    st.examples = records.size();
    Confusion conf;
    for (size_t idx : order) {
      const SceneRecord& rec = records[idx];
      std::set<std::string> gold = to_set(rec.gold);
      Inference inf = infer(m, parser, rec.sentence, rec.objects, gold, cfg.beam);
      // Pre-update prediction; the epoch's training scores track the model
      // as it moves through the data.
      std::set<std::string> pred =
          inf.parse_failed ? std::set<std::string>{}
                           : to_set(predict_from(inf, rec.objects, cfg.threshold));
      for (const ObjectFeatures& o : rec.objects)
        conf.add(pred.count(o.id) > 0, gold.count(o.id) > 0);
      if (inf.parse_failed || inf.unexplainable) {
        ++st.skipped;
        continue;
      }
      std::map<int, double> lgrad = language_gradient(parser, inf);
      std::map<std::string, std::vector<double>> pgrad =
          perception_gradient(m, inf, rec.objects, gold);
      double eta = std::max(cfg.rate - (double)t * cfg.decay, 0.0);
      for (const auto& [fid, v] : lgrad) m.core.model.add_weight(fid, eta * v);
      for (const auto& [cname, g] : pgrad) {
        std::vector<double>& w = m.bank.get(cname).weights;
        for (size_t i = 0; i < w.size(); ++i) w[i] += eta * g[i];
      }
      ++t;
    }
    st.train = prf(conf);
    stats.push_back(st);
  }
  return stats;
}

std::vector<std::string> predict_from(const Inference& inf,
                                      const std::vector<ObjectFeatures>& objects,
                                      double threshold) {
  std::vector<std::string> out;
  if (inf.parse_failed) return out;
  for (size_t oi = 0; oi < objects.size(); ++oi) {
    double q = 0.0;
    for (size_t e = 0; e < inf.parse.entries.size(); ++e)
      q += inf.parse.entry_prob(e) * inf.member[e][oi];
    if (q > threshold) out.push_back(objects[oi].id);
  }
  return out;
}

std::vector<std::string> predict(JointModel& m, Parser& parser,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<ObjectFeatures>& objects, int beam,
                                 double threshold) {
  Inference inf;
  inf.parse = parser.parse(tokens, beam);
  if (inf.parse.failed()) return {};
  inf.member.resize(inf.parse.entries.size());
  for (size_t e = 0; e < inf.parse.entries.size(); ++e) {
    FormRef z = inf.parse.entries[e].canon;
    for (const ObjectFeatures& o : objects) inf.member[e].push_back(membership_prob(m, z, o));
  }
  return predict_from(inf, objects, threshold);
}

Prf evaluate(JointModel& m, Parser& parser, const std::vector<SceneRecord>& records, int beam,
             double threshold, Confusion* confusion) {
  Confusion conf;
  for (const SceneRecord& rec : records) {
    std::set<std::string> pred = to_set(predict(m, parser, rec.sentence, rec.objects, beam, threshold));
    std::set<std::string> gold = to_set(rec.gold);
    for (const ObjectFeatures& o : rec.objects)
      conf.add(pred.count(o.id) > 0, gold.count(o.id) > 0);
  }
  if (confusion) *confusion = conf;
  return prf(conf);
}

double data_log_likelihood(JointModel& m, Parser& parser,
                           const std::vector<SceneRecord>& records, int beam, size_t* skipped) {
  double ll = 0.0;
  size_t skip = 0;
  for (const SceneRecord& rec : records) {
    Inference inf = infer(m, parser, rec.sentence, rec.objects, to_set(rec.gold), beam);
    if (inf.parse_failed || inf.unexplainable) {
      ++skip;
      continue;
    }
    double total = 0.0;
    for (size_t e = 0; e < inf.parse.entries.size(); ++e)
      total += inf.parse.entry_prob(e) * inf.lik[e];
    ll += std::log(total);
  }
  if (skipped) *skipped = skip;
  return ll;
}

}  // namespace groundlex
