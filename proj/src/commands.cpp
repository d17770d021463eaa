#include "groundlex/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace groundlex {

namespace {

std::string fmt4(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4f", v);
  return b;
}

std::string fmtg(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%g", v);
  return b;
}

std::set<std::string> to_set(const std::vector<std::string>& v) {
  return std::set<std::string>(v.begin(), v.end());
}

std::string run_path(const std::string& out, int run, int runs) {
  if (runs <= 1) return out;
  size_t dot = out.rfind('.');
  size_t slash = out.find_last_of("/\\");
  std::string tag = "-run" + std::to_string(run);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + tag;
  return out.substr(0, dot) + tag + out.substr(dot);
}

Channel inventory_channel(const AttributeInventory& inv, const std::string& attr) {
  for (const AttributeDef& a : inv.colors)
    if (a.name == attr) return Channel::Color;
  for (const AttributeDef& a : inv.shapes)
    if (a.name == attr) return Channel::Shape;
  throw FormError("attribute '" + attr + "' is not in the dataset inventory");
}

}  // namespace

BootstrapSummary bootstrap_model(JointModel& m, const std::vector<SceneRecord>& dsup,
                                 const AttributeInventory& inv, const BootstrapParams& params) {
  BootstrapSummary out;
  if (m.bank.d_c() == 0 && m.bank.d_s() == 0) m.bank.set_dims(inv.d_c, inv.d_s);

  std::vector<SupervisedExample> examples;
  examples.reserve(dsup.size());
  for (const SceneRecord& rec : dsup) {
    if (rec.lf.empty())
      throw FormError("record '" + rec.id + "' has no logical-form annotation");
    if (rec.world.empty()) throw FormError("record '" + rec.id + "' has no attribute labels");
    examples.push_back({rec.sentence, rec.lf});
  }
  SupervisedConfig scfg;
  scfg.epochs = params.epochs;
  scfg.rate = params.rate;
  scfg.decay = params.decay;
  scfg.beam = params.beam;
  scfg.seed = params.seed;
  out.parser = train_supervised(m.core, examples, scfg);

  // Labeled objects pooled across records, deduped by object id (the same
  // physical scene backs several records).
  std::map<std::string, const ObjectFeatures*> features;
  std::map<std::string, std::map<std::string, bool>> labels;
  for (const SceneRecord& rec : dsup) {
    for (const ObjectFeatures& o : rec.objects) features.emplace(o.id, &o);
    for (const auto& [oid, w] : rec.world)
      for (const auto& [attr, v] : w) {
        auto [it, inserted] = labels[oid].emplace(attr, v);
        if (!inserted && it->second != v)
          throw FormError("conflicting labels for object '" + oid + "', attribute '" + attr + "'");
      }
  }
  std::set<std::string> attrs;
  for (const auto& [oid, w] : labels)
    for (const auto& [attr, v] : w) attrs.insert(attr);

  ClassifierTrainConfig ccfg;
  ccfg.iterations = params.classifier_iterations;
  for (const std::string& attr : attrs) {
    Channel ch = m.core.constants.contains(attr) ? m.core.constants.get(attr).channel
                                                 : inventory_channel(inv, attr);
    if (!m.core.constants.contains(attr))
      m.core.constants.add({attr, ch, ConstantOrigin::Bootstrap});
    std::vector<const ObjectFeatures*> pos, neg;
    for (const auto& [oid, w] : labels) {
      auto it = w.find(attr);
      if (it == w.end()) continue;
      (it->second ? pos : neg).push_back(features.at(oid));
    }
    ClassifierStat stat;
    stat.constant = attr;
    AttributeClassifier cls;
    try {
      cls = train_classifier(attr, ch, pos, neg, m.bank.d_c(), m.bank.d_s(), ccfg);
    } catch (const FormError&) {
      // One class empty at tiny corpus sizes: keep the constant usable with
      // an uninformed classifier rather than failing the whole bootstrap.
      stat.skipped = true;
      cls.constant = attr;
      cls.channel = ch;
      cls.weights.assign((size_t)(m.bank.d_c() + m.bank.d_s() + 1), 0.0);
    }
    size_t n = 0, hit = 0;
    for (const auto& [oid, w] : labels) {
      auto it = w.find(attr);
      if (it == w.end()) continue;
      ++n;
      if ((classifier_prob(cls, *features.at(oid)) > 0.5) == it->second) ++hit;
    }
    stat.accuracy = n ? (double)hit / (double)n : 0.0;
    m.bank.add(std::move(cls));
    out.classifiers.push_back(std::move(stat));
  }
  return out;
}

std::set<std::string> model_vocabulary(const JointModel& m) {
  std::set<std::string> v = m.core.lexicon.null_words();
  for (const Lexeme& lx : m.core.lexicon.lexemes())
    for (const std::string& w : lx.words) v.insert(w);
  return v;
}

std::string cmd_gen(const GenOptions& opt) {
  GenConfig cfg;
  cfg.scenes = opt.scenes;
  cfg.sentences_per_scene = opt.sentences_per_scene;
  cfg.noise = opt.noise;
  cfg.separation = opt.separation;
  cfg.theme = opt.theme;
  cfg.blur = opt.blur;
  cfg.focus = opt.focus;
  cfg.synonym_rate = opt.synonym_rate;
  cfg.bootstrap_fraction = opt.bootstrap_fraction;
  cfg.min_objects = opt.min_objects;
  cfg.max_objects = opt.max_objects;
  cfg.d_c = opt.d_c;
  cfg.d_s = opt.d_s;
  cfg.synonym_mode = opt.synonym_mode;
  cfg.seed = opt.seed;
  Dataset ds = generate(cfg);
  SplitResult split = split_by_attribute(ds.records, ds.inventory, opt.train_fraction, opt.seed);

  std::filesystem::create_directories(opt.out_dir);
  auto write = [&](const char* name, std::vector<SceneRecord> records) {
    Dataset part;
    part.seed = ds.seed;
    part.inventory = ds.inventory;
    part.records = std::move(records);
    save_dataset(part, opt.out_dir + "/" + name);
    return part.records.size();
  };
  std::ostringstream rep;
  rep << "file,records\n";
  rep << "dsup.json," << write("dsup.json", split.dsup) << "\n";
  rep << "train.json," << write("train.json", split.train) << "\n";
  rep << "test.json," << write("test.json", split.test) << "\n";
  save_thesaurus(ds.inventory, opt.out_dir + "/thesaurus.txt");
  rep << "thesaurus.txt," << ds.inventory.colors.size() + ds.inventory.shapes.size() << "\n";
  return rep.str();
}

std::string cmd_bootstrap(const BootstrapOptions& opt) {
  Dataset ds = load_dataset(opt.data);
  JointModel m;
  m.config = {{"command", "bootstrap"},
              {"seed", std::to_string(opt.params.seed)},
              {"epochs", std::to_string(opt.params.epochs)},
              {"lr", fmtg(opt.params.rate)},
              {"decay", fmtg(opt.params.decay)},
              {"beam", std::to_string(opt.params.beam)}};
  BootstrapSummary s = bootstrap_model(m, ds.records, ds.inventory, opt.params);
  save_model(m, opt.out);

  std::ostringstream rep;
  if (ds.records.empty()) rep << "warning,empty supervised corpus\n";
  rep << "examples," << s.parser.examples << "\n";
  rep << "unparsed," << s.parser.unparsed << "\n";
  rep << "lexemes," << s.parser.lexemes_added << "\n";
  rep << "exact_match," << fmt4(s.parser.exact_match) << "\n";
  for (const ClassifierStat& c : s.classifiers)
    rep << "classifier," << c.constant << ","
        << (c.skipped ? std::string("skipped") : fmt4(c.accuracy)) << "\n";
  return rep.str();
}

std::string cmd_train(const TrainOptions& opt) {
  if (opt.runs < 1) throw FormError("--runs must be at least 1");
  Dataset ds = load_dataset(opt.data);
  std::ostringstream rep;
  rep << "run,epoch,examples,skipped,train-p,train-r,train-f1\n";
  double sp = 0.0, sr = 0.0, sf = 0.0;
  bool have_stats = false;
  for (int r = 0; r < opt.runs; ++r) {
    std::unique_ptr<JointModel> m = load_model(opt.model);
    TrainConfig cfg = opt.config;
    cfg.seed = opt.config.seed + (uint64_t)r;
    if (cfg.epochs > 0) {
      m->config["command"] = "train";
      m->config["train_seed"] = std::to_string(cfg.seed);
      m->config["train_epochs"] = std::to_string(cfg.epochs);
      m->config["train_lr"] = fmtg(cfg.rate);
      m->config["train_decay"] = fmtg(cfg.decay);
      m->config["train_beam"] = std::to_string(cfg.beam);
      m->config["train_new_classifiers"] = std::to_string(cfg.new_classifiers);
      extend_model(*m, ds.records, cfg.new_classifiers, cfg.seed);
      Parser parser(m->core);
      std::vector<EpochStats> stats = train_online(*m, parser, ds.records, cfg);
      for (const EpochStats& st : stats)
        rep << r << "," << st.epoch << "," << st.examples << "," << st.skipped << ","
            << fmt4(st.train.precision) << "," << fmt4(st.train.recall) << ","
            << fmt4(st.train.f1) << "\n";
      if (!stats.empty()) {
        sp += stats.back().train.precision;
        sr += stats.back().train.recall;
        sf += stats.back().train.f1;
        have_stats = true;
      }
    }
    save_model(*m, run_path(opt.out, r, opt.runs));
  }
  if (have_stats) {
    double n = (double)opt.runs;
    rep << "mean,,,," << fmt4(sp / n) << "," << fmt4(sr / n) << "," << fmt4(sf / n) << "\n";
  }
  return rep.str();
}

std::string cmd_eval(const EvalOptions& opt) {
  std::unique_ptr<JointModel> m = load_model(opt.model);
  Dataset ds = load_dataset(opt.data);
  Parser parser(m->core);
  std::ostringstream rep;
  rep << "record,precision,recall,f1\n";
  Confusion total;
  for (const SceneRecord& rec : ds.records) {
    std::set<std::string> pred =
        to_set(predict(*m, parser, rec.sentence, rec.objects, opt.beam, opt.threshold));
    std::set<std::string> gold = to_set(rec.gold);
    Confusion c;
    for (const ObjectFeatures& o : rec.objects)
      c.add(pred.count(o.id) > 0, gold.count(o.id) > 0);
    total.merge(c);
    Prf p = prf(c);
    rep << rec.id << "," << fmt4(p.precision) << "," << fmt4(p.recall) << "," << fmt4(p.f1)
        << "\n";
  }
  Prf agg = prf(total);
  rep << "aggregate," << fmt4(agg.precision) << "," << fmt4(agg.recall) << "," << fmt4(agg.f1)
      << "\n";
  return rep.str();
}

std::string cmd_ablate_vision(const AblateVisionOptions& opt) {
  Dataset dsup = load_dataset(opt.dsup);
  Dataset train = load_dataset(opt.train);
  Dataset test = load_dataset(opt.test);
  std::map<std::string, std::vector<std::string>> thes = load_thesaurus(opt.thesaurus);

  std::set<std::string> known;
  for (const SceneRecord& rec : dsup.records)
    for (const std::string& t : rec.sentence) known.insert(t);
  std::set<std::string> unknown;
  for (const SceneRecord& rec : train.records)
    for (const std::string& t : rec.sentence)
      if (!known.count(t)) unknown.insert(t);

  std::set<std::string> all_terms;
  std::map<std::string, std::set<std::string>> sets;  // attribute -> unknown surface words
  for (const auto& [attr, words] : thes) {
    all_terms.insert(attr);
    for (const std::string& w : words) all_terms.insert(w);
    std::set<std::string> s;
    if (unknown.count(attr)) s.insert(attr);
    for (const std::string& w : words)
      if (unknown.count(w)) s.insert(w);
    if (!s.empty()) sets[attr] = std::move(s);
  }

  std::ostringstream rep;
  std::map<std::string, AttributeClassifier> classifiers;
  ClassifierTrainConfig ccfg;
  ccfg.iterations = opt.classifier_iterations;
  for (const auto& [attr, s] : sets) {
    std::set<std::string> occur_groups;     // scenes where the set appears at all
    std::vector<const SceneRecord*> eligible;  // set words and no other thesaurus term
    for (const SceneRecord& rec : train.records) {
      bool has = false, foreign = false;
      for (const std::string& t : rec.sentence) {
        if (s.count(t))
          has = true;
        else if (all_terms.count(t))
          foreign = true;
      }
      if (has) occur_groups.insert(rec.scene_group());
      if (has && !foreign) eligible.push_back(&rec);
    }
    std::set<std::string> eligible_groups;
    for (const SceneRecord* r : eligible) eligible_groups.insert(r->scene_group());
    if (eligible_groups.size() < 2) {
      rep << "set," << attr << ",discarded,scenes," << eligible_groups.size() << "\n";
      continue;
    }
    std::map<std::string, const ObjectFeatures*> pos, neg;
    for (const SceneRecord* r : eligible)
      for (const ObjectFeatures& o : r->objects) pos.emplace(o.id, &o);
    for (const SceneRecord& rec : train.records) {
      if (occur_groups.count(rec.scene_group())) continue;
      for (const ObjectFeatures& o : rec.objects) neg.emplace(o.id, &o);
    }
    std::vector<const ObjectFeatures*> pv, nv;
    for (const auto& [id, p] : pos) pv.push_back(p);
    for (const auto& [id, p] : neg)
      if (!pos.count(id)) nv.push_back(p);
    try {
      classifiers.emplace(attr,
                          train_classifier(attr, inventory_channel(train.inventory, attr), pv, nv,
                                           train.inventory.d_c, train.inventory.d_s, ccfg));
      rep << "set," << attr << ",kept,scenes," << eligible_groups.size() << "\n";
    } catch (const FormError&) {
      rep << "set," << attr << ",discarded,empty_class,0\n";
    }
  }

  Confusion conf;
  for (const SceneRecord& rec : test.records) {
    std::vector<const AttributeClassifier*> present;
    for (const auto& [attr, s] : sets) {
      auto cit = classifiers.find(attr);
      if (cit == classifiers.end()) continue;
      for (const std::string& t : rec.sentence)
        if (s.count(t)) {
          present.push_back(&cit->second);
          break;
        }
    }
    std::set<std::string> pred;
    if (!present.empty())
      for (const ObjectFeatures& o : rec.objects) {
        bool ok = true;
        for (const AttributeClassifier* c : present)
          if (classifier_prob(*c, o) <= 0.5) {
            ok = false;
            break;
          }
        if (ok) pred.insert(o.id);
      }
    std::set<std::string> gold = to_set(rec.gold);
    for (const ObjectFeatures& o : rec.objects)
      conf.add(pred.count(o.id) > 0, gold.count(o.id) > 0);
  }
  Prf p = prf(conf);
  rep << "precision," << fmt4(p.precision) << "\n";
  rep << "recall," << fmt4(p.recall) << "\n";
  rep << "f1," << fmt4(p.f1) << "\n";
  return rep.str();
}

std::string cmd_ablate_language(const AblateLanguageOptions& opt) {
  std::unique_ptr<JointModel> m = load_model(opt.model);
  Dataset ds = load_dataset(opt.data);
  Parser parser(m->core);
  Confusion conf;
  size_t failed = 0;
  for (const SceneRecord& rec : ds.records) {
    ParseResult res = parser.parse(rec.sentence, opt.beam);
    std::set<std::string> pred;
    if (res.failed()) {
      ++failed;
    } else {
      for (const ObjectFeatures& o : rec.objects) {
        double q = 0.0;
        for (size_t e = 0; e < res.entries.size(); ++e)
          q += res.entry_prob(e) * membership_prob(*m, res.entries[e].canon, o);
        if (q > opt.threshold) pred.insert(o.id);
      }
    }
    std::set<std::string> gold = to_set(rec.gold);
    for (const ObjectFeatures& o : rec.objects)
      conf.add(pred.count(o.id) > 0, gold.count(o.id) > 0);
  }
  Prf p = prf(conf);
  std::ostringstream rep;
  rep << "records," << ds.records.size() << "\n";
  rep << "failed_parses," << failed << "\n";
  rep << "precision," << fmt4(p.precision) << "\n";
  rep << "recall," << fmt4(p.recall) << "\n";
  rep << "f1," << fmt4(p.f1) << "\n";
  return rep.str();
}

std::string cmd_inspect(const InspectOptions& opt) {
  std::unique_ptr<JointModel> m = load_model(opt.model);
  std::vector<std::string> cols;
  for (const AttributeConstant& c : m->core.constants.all())
    if (c.origin == ConstantOrigin::Induced) cols.push_back(c.name);

  std::ostringstream rep;
  rep << "word";
  for (const std::string& c : cols) rep << "," << c;
  rep << ",null,argmax\n";
  for (const std::string& word : opt.words) {
    bool known = m->core.lexicon.known_word(word) || m->core.lexicon.is_null_word(word);
    std::vector<double> vals;
    for (const std::string& c : cols)
      vals.push_back(m->core.model.weight_by_name(ParseModel::lexeme_feature(Lexeme{{word}, {c}})));
    vals.push_back(m->core.model.weight_by_name(ParseModel::null_feature(word)));
    rep << word;
    for (double v : vals) rep << "," << fmt4(v);
    if (!known) {
      rep << ",?\n";
      continue;
    }
    size_t best = 0;
    for (size_t i = 1; i < vals.size(); ++i)
      if (vals[i] > vals[best]) best = i;
    rep << "," << (best < cols.size() ? cols[best] : std::string("null")) << "\n";
  }
  return rep.str();
}

std::string cmd_curve(const CurveOptions& opt) {
  GenConfig cfg;
  cfg.scenes = opt.gen.scenes;
  cfg.sentences_per_scene = opt.gen.sentences_per_scene;
  cfg.noise = opt.gen.noise;
  cfg.synonym_rate = opt.gen.synonym_rate;
  cfg.bootstrap_fraction = opt.gen.bootstrap_fraction;
  cfg.d_c = opt.gen.d_c;
  cfg.d_s = opt.gen.d_s;
  cfg.seed = opt.gen.seed;
  Dataset ds = generate(cfg);
  SplitResult split = split_by_attribute(ds.records, ds.inventory, opt.gen.train_fraction,
                                         opt.gen.seed);

  // One fixed shuffle of the supervised records; sizes take nested prefixes.
  std::vector<size_t> order(split.dsup.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(opt.gen.seed ^ 0xC2B2AE3D27D4EB4Full);
  std::shuffle(order.begin(), order.end(), rng);

  std::ostringstream rep;
  rep << "dsup_records,precision,recall,f1\n";
  for (double f : opt.sizes) {
    if (f < 0.0 || f > 1.0) throw FormError("curve sizes must lie in [0, 1]");
    size_t nsub = (size_t)std::llround(f * (double)split.dsup.size());
    std::vector<SceneRecord> sub;
    sub.reserve(nsub);
    for (size_t i = 0; i < nsub; ++i) sub.push_back(split.dsup[order[i]]);
    JointModel m;
    bootstrap_model(m, sub, ds.inventory, opt.bootstrap);
    extend_model(m, split.train, opt.train.new_classifiers, opt.train.seed);
    Parser parser(m.core);
    train_online(m, parser, split.train, opt.train);
    Prf p = evaluate(m, parser, split.test, opt.train.beam, opt.train.threshold);
    rep << nsub << "," << fmt4(p.precision) << "," << fmt4(p.recall) << "," << fmt4(p.f1)
        << "\n";
  }
  return rep.str();
}

std::string cmd_synonym(const SynonymOptions& opt) {
  GenConfig cfg;
  cfg.scenes = opt.gen.scenes;
  cfg.sentences_per_scene = opt.gen.sentences_per_scene;
  cfg.noise = opt.gen.noise;
  cfg.synonym_rate = opt.gen.synonym_rate;
  cfg.bootstrap_fraction = opt.gen.bootstrap_fraction;
  cfg.d_c = opt.gen.d_c;
  cfg.d_s = opt.gen.d_s;
  cfg.synonym_mode = true;
  cfg.seed = opt.gen.seed;
  Dataset ds = generate(cfg);
  for (const auto* list : {&ds.inventory.colors, &ds.inventory.shapes})
    for (const AttributeDef& a : *list)
      if (a.synonyms.empty()) throw FormError("synonym table absent for attribute '" + a.name + "'");
  SplitResult split = split_by_attribute(ds.records, ds.inventory, opt.gen.train_fraction,
                                         opt.gen.seed);

  JointModel base;
  bootstrap_model(base, split.dsup, ds.inventory, opt.bootstrap);
  std::set<std::string> vocab = model_vocabulary(base);
  std::vector<std::string> novel;
  {
    std::set<std::string> s;
    for (const SceneRecord& rec : split.train)
      for (const std::string& t : rec.sentence)
        if (!vocab.count(t)) s.insert(t);
    novel.assign(s.begin(), s.end());
  }
  std::map<std::string, std::string> surface = ds.inventory.surface_map();

  std::ostringstream rep;
  rep << "run,precision,recall,f1,bound,novel,binding\n";
  int passed = 0;
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (int r = 0; r < opt.runs; ++r) {
    std::unique_ptr<JointModel> m = clone_model(base);
    TrainConfig tcfg = opt.train;
    tcfg.seed = opt.train.seed + (uint64_t)r;
    extend_model(*m, split.train, tcfg.new_classifiers, tcfg.seed);
    Parser parser(m->core);
    train_online(*m, parser, split.train, tcfg);
    Prf p = evaluate(*m, parser, split.test, tcfg.beam, tcfg.threshold);

    size_t bound = 0;
    for (const std::string& w : novel) {
      const Lexeme* best = nullptr;
      double best_weight = 0.0;
      for (const Lexeme& lx : m->core.lexicon.lexemes()) {
        if (std::find(lx.words.begin(), lx.words.end(), w) == lx.words.end()) continue;
        double wt = m->core.model.weight_by_name(ParseModel::lexeme_feature(lx));
        if (!best || wt > best_weight) {
          best = &lx;
          best_weight = wt;
        }
      }
      auto it = surface.find(w);
      if (best && it != surface.end() &&
          best->constants == std::vector<std::string>{it->second})
        ++bound;
    }
    bool ok = !novel.empty() && (double)bound >= opt.binding_threshold * (double)novel.size();
    if (ok) ++passed;
    rep << r << "," << fmt4(p.precision) << "," << fmt4(p.recall) << "," << fmt4(p.f1) << ","
        << bound << "," << novel.size() << "," << (ok ? "yes" : "no") << "\n";
    sp += p.precision;
    sr += p.recall;
    sf += p.f1;
  }
  double n = (double)opt.runs;
  rep << "mean," << fmt4(sp / n) << "," << fmt4(sr / n) << "," << fmt4(sf / n) << ",,,\n";
  rep << "binding_runs," << passed << "," << opt.runs << ",,,,\n";
  return rep.str();
}

}  // namespace groundlex
