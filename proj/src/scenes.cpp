#include "groundlex/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace groundlex {

namespace {

using nlohmann::json;

struct RawAttr {
  const char* name;
  const char* synonyms[5];
};

// Main names double as logical constants; every surface word is a single
// lowercase token.  The last reserved_synonyms words per attribute are held
// out of ordinary corpora so synonym-mode corpora can introduce them fresh.
const RawAttr kColorTable[6] = {
    {"orange", {"tangerine", "apricot", "rust", "amber", "copper"}},
    {"yellow", {"gold", "lemon", "mustard", "blond", "canary"}},
    {"purple", {"violet", "lavender", "plum", "mauve", "lilac"}},
    {"red", {"crimson", "scarlet", "maroon", "ruby", "cherry"}},
    {"green", {"emerald", "jade", "lime", "olive", "mint"}},
    {"blue", {"azure", "navy", "cobalt", "teal", "indigo"}},
};
const RawAttr kShapeTable[6] = {
    {"cylinder", {"tube", "pipe", "barrel", "roller", "column"}},
    {"sphere", {"ball", "orb", "globe", "marble", "round"}},
    {"wedge", {"ramp", "doorstop", "slope", "chock", "incline"}},
    {"cube", {"box", "brick", "dice", "die", "crate"}},
    {"arch", {"bridge", "archway", "tunnel", "gateway", "overpass"}},
    {"triangle", {"prism", "pyramid", "trigon", "triangular", "trilateral"}},
};

enum class Mode { Color, Shape, Both };

// {C} and {S} expand to the drawn color and shape surface words.
const std::vector<std::vector<const char*>> kColorTemplates = {
    {"here", "are", "some", "{C}", "things"},
    {"these", "are", "various", "types", "of", "{C}", "colored", "objects"},
    {"the", "{C}", "ones"},
    {"these", "toys", "are", "{C}"},
};
const std::vector<std::vector<const char*>> kShapeTemplates = {
    {"here", "are", "some", "{S}", "toys"},
    {"this", "is", "a", "{S}"},
    {"these", "are", "the", "{S}", "shaped", "objects"},
    {"that", "block", "is", "a", "{S}"},
};
const std::vector<std::vector<const char*>> kBothTemplates = {
    {"this", "toy", "is", "{C}", "{S}"},
    {"this", "{C}", "block", "is", "in", "the", "shape", "of", "a", "{S}"},
    {"here", "is", "a", "{C}", "{S}"},
    {"these", "are", "{C}", "{S}", "toys"},
};

std::vector<double> random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v((size_t)dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm2 += x * x;
    }
  } while (norm2 < 1e-12);
  double norm = std::sqrt(norm2);
  for (double& x : v) x /= norm;
  return v;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d2);
}

std::vector<std::vector<double>> orthonormal_basis(std::mt19937_64& rng, int n, int dim) {
  std::vector<std::vector<double>> basis;
  while ((int)basis.size() < n) {
    std::vector<double> v = random_unit(rng, dim);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (size_t i = 0; i < v.size(); ++i) dot += v[i] * b[i];
      for (size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 < 1e-12) continue;  // rare near-dependent draw
    double norm = std::sqrt(norm2);
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Places `count` unit vectors with every pairwise distance equal to
// `separation`, built from count+1 orthonormal basis vectors starting at
// `first`. Distances up to sqrt(2) leave pairwise cosines positive; larger
// ones (bounded by the regular-simplex limit sqrt(2 + 2/(count-1))) make them
// negative, so a linear model that fits one point actively rejects the rest
// instead of merely preferring its own.
std::vector<std::vector<double>> place_simplex(const std::vector<std::vector<double>>& basis,
                                               int first, int count, int dim,
                                               double separation) {
  double cosine = 1.0 - separation * separation / 2.0;
  double min_cosine = count > 1 ? -1.0 / (count - 1) : -1.0;
  if (separation <= 0.0 || cosine < min_cosine - 1e-12)
    throw FormError("prototype separation must lie in (0, sqrt(2 + 2/(count-1))]");
  // p_i = alpha * (e_i - mean(e)) + gamma * b gives every pair cosine `cosine`
  // and unit norm; gamma shrinks to 0 at the simplex limit.
  double alpha = std::sqrt(std::max(0.0, 1.0 - cosine));
  double gamma =
      std::sqrt(std::max(0.0, (1.0 + cosine * (count - 1)) / std::max(count, 1)));
  std::vector<std::vector<double>> protos;
  protos.reserve((size_t)count);
  for (int i = 0; i < count; ++i) {
    std::vector<double> p((size_t)dim);
    for (int d = 0; d < dim; ++d) {
      double centered = basis[(size_t)(first + 1 + i)][(size_t)d];
      for (int j = 0; j < count; ++j)
        centered -= basis[(size_t)(first + 1 + j)][(size_t)d] / count;
      p[(size_t)d] = alpha * centered + gamma * basis[(size_t)first][(size_t)d];
    }
    protos.push_back(std::move(p));
  }
  return protos;
}

// A channel's six prototypes form two regular trios on the unit sphere: one
// for the supervised attributes and one for the novel ones, each with every
// pairwise distance equal to `separation`, in mutually orthogonal subspaces.
// Keeping the trios orthogonal means supervised and novel attributes never
// crowd each other, while the within-trio distance controls how hard the
// attributes that must be told apart really are.
std::vector<std::vector<double>> sample_prototypes(std::mt19937_64& rng, int count, int dim,
                                                   double separation) {
  if (count % 2 != 0) throw FormError("prototype count must be even");
  int trio = count / 2;
  if (count + 2 > dim)
    throw FormError("need at least " + std::to_string(count + 2) +
                    " feature dimensions for " + std::to_string(count) + " prototypes");
  auto basis = orthonormal_basis(rng, count + 2, dim);
  auto protos = place_simplex(basis, 0, trio, dim, separation);
  auto novel = place_simplex(basis, trio + 1, trio, dim, separation);
  for (auto& p : novel) protos.push_back(std::move(p));
  return protos;
}

std::string scene_id(int s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%03d", s);
  return buf;
}

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw FormError(ctx + ": missing '" + key + "'");
  return *it;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> AttributeInventory::bootstrap_names() const {
  std::vector<std::string> out;
  for (int i = 0; i < bootstrap_count && i < (int)colors.size(); ++i)
    out.push_back(colors[(size_t)i].name);
  for (int i = 0; i < bootstrap_count && i < (int)shapes.size(); ++i)
    out.push_back(shapes[(size_t)i].name);
  return out;
}

std::vector<std::string> AttributeInventory::eval_names() const {
  std::vector<std::string> out;
  for (size_t i = (size_t)bootstrap_count; i < colors.size(); ++i) out.push_back(colors[i].name);
  for (size_t i = (size_t)bootstrap_count; i < shapes.size(); ++i) out.push_back(shapes[i].name);
  return out;
}

std::map<std::string, std::string> AttributeInventory::surface_map() const {
  std::map<std::string, std::string> out;
  auto put = [&](const std::string& word, const std::string& attr) {
    auto [it, inserted] = out.emplace(word, attr);
    if (!inserted && it->second != attr)
      throw FormError("surface word '" + word + "' is ambiguous between attributes '" +
                      it->second + "' and '" + attr + "'");
  };
  for (const auto* list : {&colors, &shapes})
    for (const AttributeDef& a : *list) {
      put(a.name, a.name);
      for (const std::string& s : a.synonyms) put(s, a.name);
    }
  return out;
}

AttributeInventory AttributeInventory::standard(int d_c, int d_s, uint64_t seed,
                                                double separation) {
  if (d_c <= 0 || d_s <= 0) throw FormError("feature dimensions must be positive");
  AttributeInventory inv;
  inv.d_c = d_c;
  inv.d_s = d_s;
  std::mt19937_64 rng(seed);
  auto color_protos = sample_prototypes(rng, 6, d_c, separation);
  auto shape_protos = sample_prototypes(rng, 6, d_s, separation);
  for (int i = 0; i < 6; ++i) {
    AttributeDef a;
    a.name = kColorTable[i].name;
    a.prototype = color_protos[(size_t)i];
    for (const char* s : kColorTable[i].synonyms) a.synonyms.push_back(s);
    inv.colors.push_back(std::move(a));
  }
  for (int i = 0; i < 6; ++i) {
    AttributeDef a;
    a.name = kShapeTable[i].name;
    a.prototype = shape_protos[(size_t)i];
    for (const char* s : kShapeTable[i].synonyms) a.synonyms.push_back(s);
    inv.shapes.push_back(std::move(a));
  }
  inv.surface_map();  // validates word uniqueness
  return inv;
}

std::string SceneRecord::scene_group() const {
  size_t p = id.find('_');
  return p == std::string::npos ? id : id.substr(0, p);
}

Dataset generate(const GenConfig& cfg) {
  if (cfg.scenes <= 0 || cfg.sentences_per_scene <= 0)
    throw FormError("scene and sentence counts must be positive");
  if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects)
    throw FormError("invalid object count range");
  if (cfg.noise < 0.0) throw FormError("noise sigma must be non-negative");
  if (cfg.synonym_rate < 0.0 || cfg.synonym_rate > 1.0 || cfg.bootstrap_fraction < 0.0 ||
      cfg.bootstrap_fraction > 1.0 || cfg.theme < 0.0 || cfg.theme > 1.0 ||
      cfg.blur < 0.0 || cfg.blur > 1.0 || cfg.focus < 0.0 || cfg.focus > 1.0)
    throw FormError("rates must lie in [0, 1]");

  Dataset ds;
  ds.seed = cfg.seed;
  ds.inventory = AttributeInventory::standard(cfg.d_c, cfg.d_s, cfg.seed ^ 0x9E3779B97F4A7C15ull,
                                              cfg.separation);
  const AttributeInventory& inv = ds.inventory;
  const int nattr = 6;
  const int nboot_attr = inv.bootstrap_count;
  std::set<std::string> bootstrap_set;
  for (const auto& n : inv.bootstrap_names()) bootstrap_set.insert(n);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise);
  int nboot_scenes = (int)std::lround(cfg.bootstrap_fraction * cfg.scenes);

  for (int s = 0; s < cfg.scenes; ++s) {
    bool bootstrap_scene = s < nboot_scenes;
    // Synonym-mode eval scenes describe supervised attributes (under held-out
    // words), so their anchor object is drawn like a bootstrap one.
    bool anchor_bootstrap = bootstrap_scene || cfg.synonym_mode;
    std::string sid = scene_id(s);
    int n = std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(rng);

    std::vector<ObjectFeatures> objects;
    std::vector<ObjectTruth> truth;
    int anchor_ci = -1, anchor_si = -1;
    for (int j = 0; j < n; ++j) {
      // Object 0 anchors the scene: its attributes come from the subset the
      // scene's sentences are allowed to describe, so the sentence draw below
      // always has a valid reference object.
      int lo = 0, hi = nattr - 1;
      if (j == 0) {
        if (anchor_bootstrap)
          hi = nboot_attr - 1;
        else
          lo = nboot_attr;
      }
      int ci = std::uniform_int_distribution<int>(lo, hi)(rng);
      int si = std::uniform_int_distribution<int>(lo, hi)(rng);
      if (j == 0) {
        anchor_ci = ci;
        anchor_si = si;
      } else {
        if (unit(rng) < cfg.theme) ci = anchor_ci;
        if (unit(rng) < cfg.theme) si = anchor_si;
      }
      // Hard instances keep the majority of their own prototype so the true
      // attribute still dominates, but sit close enough to another class that
      // weakly trained classifiers miss them.
      auto channel = [&](const std::vector<AttributeDef>& defs, int idx, int dim,
                         std::vector<double>& out) {
        double lam = 1.0;
        int other = idx;
        if (unit(rng) < cfg.blur) {
          lam = std::uniform_real_distribution<double>(0.5, 0.8)(rng);
          other = std::uniform_int_distribution<int>(0, (int)defs.size() - 2)(rng);
          if (other >= idx) ++other;
        }
        out.resize((size_t)dim);
        for (int d = 0; d < dim; ++d)
          out[(size_t)d] = lam * defs[(size_t)idx].prototype[(size_t)d] +
                           (1.0 - lam) * defs[(size_t)other].prototype[(size_t)d] +
                           noise(rng);
      };
      ObjectFeatures o;
      o.id = sid + "_o" + std::to_string(j);
      channel(inv.colors, ci, cfg.d_c, o.color);
      channel(inv.shapes, si, cfg.d_s, o.shape);
      objects.push_back(std::move(o));
      truth.push_back({inv.colors[(size_t)ci].name, inv.shapes[(size_t)si].name});
    }

    for (int u = 0; u < cfg.sentences_per_scene; ++u) {
      std::string color_attr, shape_attr;
      Mode mode = Mode::Color;
      bool drawn = false;
      for (int attempt = 0; attempt < cfg.max_retries && !drawn; ++attempt) {
        double m = unit(rng);
        mode = m < 0.40 ? Mode::Color : (m < 0.80 ? Mode::Shape : Mode::Both);
        int ref = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (unit(rng) < cfg.focus) ref = 0;
        color_attr = mode != Mode::Shape ? truth[(size_t)ref].color : "";
        shape_attr = mode != Mode::Color ? truth[(size_t)ref].shape : "";
        bool ok = true;
        bool has_eval = false;
        for (const std::string* a : {&color_attr, &shape_attr}) {
          if (a->empty()) continue;
          if (!bootstrap_set.count(*a)) has_eval = true;
        }
        if (bootstrap_scene || cfg.synonym_mode)
          ok = !has_eval;  // supervised attributes only
        else
          ok = has_eval;  // at least one novel attribute
        // Gold set is non-empty by construction (the reference object matches
        // its own attributes); keep the guard to surface generator bugs.
        if (ok) {
          int matches = 0;
          for (int j = 0; j < n; ++j)
            if ((color_attr.empty() || truth[(size_t)j].color == color_attr) &&
                (shape_attr.empty() || truth[(size_t)j].shape == shape_attr))
              ++matches;
          ok = matches > 0;
        }
        drawn = ok;
      }
      if (!drawn)
        throw FormError("scene " + sid + ": no admissible sentence after " +
                        std::to_string(cfg.max_retries) + " attempts");

      auto find_attr = [&](const std::vector<AttributeDef>& list,
                           const std::string& name) -> const AttributeDef& {
        for (const auto& a : list)
          if (a.name == name) return a;
        throw FormError("unknown attribute '" + name + "'");
      };
      auto surface = [&](const AttributeDef& a) -> std::string {
        int reserved = inv.reserved_synonyms;
        int usable = (int)a.synonyms.size() - reserved;
        if (cfg.synonym_mode && !bootstrap_scene) {
          int k = std::uniform_int_distribution<int>(usable, (int)a.synonyms.size() - 1)(rng);
          return a.synonyms[(size_t)k];
        }
        if (usable > 0 && unit(rng) < cfg.synonym_rate) {
          int k = std::uniform_int_distribution<int>(0, usable - 1)(rng);
          return a.synonyms[(size_t)k];
        }
        return a.name;
      };
      std::string color_word =
          color_attr.empty() ? "" : surface(find_attr(inv.colors, color_attr));
      std::string shape_word =
          shape_attr.empty() ? "" : surface(find_attr(inv.shapes, shape_attr));

      const auto& bank = mode == Mode::Color   ? kColorTemplates
                         : mode == Mode::Shape ? kShapeTemplates
                                               : kBothTemplates;
      int t = std::uniform_int_distribution<int>(0, (int)bank.size() - 1)(rng);
      SceneRecord rec;
      rec.id = sid + "_u" + std::to_string(u);
      for (const char* tok : bank[(size_t)t]) {
        std::string w =
            tok == std::string("{C}") ? color_word : tok == std::string("{S}") ? shape_word : tok;
        rec.sentence.push_back(w);
      }
      rec.objects = objects;
      rec.truth = truth;
      for (int j = 0; j < n; ++j)
        if ((color_attr.empty() || truth[(size_t)j].color == color_attr) &&
            (shape_attr.empty() || truth[(size_t)j].shape == shape_attr))
          rec.gold.push_back(objects[(size_t)j].id);

      if (bootstrap_scene) {
        if (mode == Mode::Color)
          rec.lf = "(lam x (color x " + color_attr + "))";
        else if (mode == Mode::Shape)
          rec.lf = "(lam x (shape x " + shape_attr + "))";
        else
          rec.lf =
              "(lam x (and (color x " + color_attr + ") (shape x " + shape_attr + ")))";
        for (int j = 0; j < n; ++j) {
          auto& labels = rec.world[objects[(size_t)j].id];
          for (int i = 0; i < nboot_attr; ++i) {
            labels[inv.colors[(size_t)i].name] = truth[(size_t)j].color == inv.colors[(size_t)i].name;
            labels[inv.shapes[(size_t)i].name] = truth[(size_t)j].shape == inv.shapes[(size_t)i].name;
          }
        }
      }
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

SplitResult split_by_attribute(const std::vector<SceneRecord>& records,
                               const AttributeInventory& inv, double train_fraction,
                               uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw FormError("train fraction must lie in [0, 1]");
  auto surf = inv.surface_map();
  std::set<std::string> bootstrap_set;
  for (const auto& n : inv.bootstrap_names()) bootstrap_set.insert(n);
  std::set<std::string> heldout_words;
  for (const auto* list : {&inv.colors, &inv.shapes})
    for (const AttributeDef& a : *list)
      for (size_t i = a.synonyms.size() >= (size_t)inv.reserved_synonyms
                          ? a.synonyms.size() - (size_t)inv.reserved_synonyms
                          : 0;
           i < a.synonyms.size(); ++i)
        heldout_words.insert(a.synonyms[i]);

  std::set<std::string> ids;
  // group -> true when the group's records are supervised
  std::map<std::string, bool> group_supervised;
  std::vector<bool> supervised(records.size());
  std::vector<std::string> eval_groups;  // first-appearance order
  for (size_t r = 0; r < records.size(); ++r) {
    const SceneRecord& rec = records[r];
    if (!ids.insert(rec.id).second) throw FormError("duplicate record id '" + rec.id + "'");
    bool any_attr = false, any_eval = false, any_heldout = false;
    for (const std::string& tok : rec.sentence) {
      auto it = surf.find(tok);
      if (it == surf.end()) continue;
      any_attr = true;
      if (!bootstrap_set.count(it->second)) any_eval = true;
      if (heldout_words.count(tok)) any_heldout = true;
    }
    if (!any_attr)
      throw FormError("record '" + rec.id + "' mentions no known attribute word");
    bool sup = !any_eval && !any_heldout;
    supervised[r] = sup;
    std::string group = rec.scene_group();
    auto [it, inserted] = group_supervised.emplace(group, sup);
    if (inserted && !sup) eval_groups.push_back(group);
    if (!inserted && it->second != sup)
      throw FormError("physical scene '" + group +
                      "' has records on both sides of the supervised split");
  }

  std::mt19937_64 rng(seed);
  std::shuffle(eval_groups.begin(), eval_groups.end(), rng);
  size_t ntrain = (size_t)std::lround(train_fraction * (double)eval_groups.size());
  std::set<std::string> train_groups(eval_groups.begin(), eval_groups.begin() + (long)ntrain);

  SplitResult out;
  for (size_t r = 0; r < records.size(); ++r) {
    if (supervised[r]) {
      out.dsup.push_back(records[r]);
      continue;
    }
    SceneRecord rec = records[r];
    rec.lf.clear();
    rec.world.clear();
    rec.truth.clear();
    if (train_groups.count(rec.scene_group()))
      out.train.push_back(std::move(rec));
    else
      out.test.push_back(std::move(rec));
  }
  return out;
}

namespace {

json inventory_to_json(const AttributeInventory& inv) {
  json j;
  j["d_c"] = inv.d_c;
  j["d_s"] = inv.d_s;
  j["bootstrap_count"] = inv.bootstrap_count;
  j["reserved_synonyms"] = inv.reserved_synonyms;
  for (const char* key : {"colors", "shapes"}) {
    const auto& list = key == std::string("colors") ? inv.colors : inv.shapes;
    json arr = json::array();
    for (const AttributeDef& a : list) {
      json e;
      e["name"] = a.name;
      e["prototype"] = a.prototype;
      e["synonyms"] = a.synonyms;
      arr.push_back(std::move(e));
    }
    j[key] = std::move(arr);
  }
  return j;
}

AttributeInventory inventory_from_json(const json& j, const std::string& ctx) {
  AttributeInventory inv;
  inv.d_c = require(j, "d_c", ctx).get<int>();
  inv.d_s = require(j, "d_s", ctx).get<int>();
  inv.bootstrap_count = require(j, "bootstrap_count", ctx).get<int>();
  inv.reserved_synonyms = require(j, "reserved_synonyms", ctx).get<int>();
  for (const char* key : {"colors", "shapes"}) {
    auto& list = key == std::string("colors") ? inv.colors : inv.shapes;
    int dim = key == std::string("colors") ? inv.d_c : inv.d_s;
    const json& arr = require(j, key, ctx);
    for (size_t i = 0; i < arr.size(); ++i) {
      std::string actx = ctx + "." + key + "[" + std::to_string(i) + "]";
      AttributeDef a;
      a.name = require(arr[i], "name", actx).get<std::string>();
      a.prototype = require(arr[i], "prototype", actx).get<std::vector<double>>();
      a.synonyms = require(arr[i], "synonyms", actx).get<std::vector<std::string>>();
      if ((int)a.prototype.size() != dim)
        throw FormError(actx + ": prototype has " + std::to_string(a.prototype.size()) +
                        " components, expected " + std::to_string(dim));
      list.push_back(std::move(a));
    }
  }
  return inv;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  json j;
  j["format"] = "groundlex-scenes";
  j["version"] = 1;
  j["seed"] = ds.seed;
  j["inventory"] = inventory_to_json(ds.inventory);
  json scenes = json::array();
  for (const SceneRecord& rec : ds.records) {
    json e;
    e["id"] = rec.id;
    e["sentence"] = rec.sentence;
    json objs = json::array();
    for (const ObjectFeatures& o : rec.objects) {
      json oj;
      oj["id"] = o.id;
      oj["color"] = o.color;
      oj["shape"] = o.shape;
      objs.push_back(std::move(oj));
    }
    e["objects"] = std::move(objs);
    e["gold"] = rec.gold;
    if (!rec.lf.empty()) e["lf"] = rec.lf;
    if (!rec.world.empty()) e["world"] = rec.world;
    scenes.push_back(std::move(e));
  }
  j["scenes"] = std::move(scenes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormError("cannot write '" + path + "'");
  out << j.dump() << '\n';
  if (!out) throw FormError("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormError("cannot read '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormError(path + ": " + e.what());
  }
  try {
    if (require(j, "format", path).get<std::string>() != "groundlex-scenes")
      throw FormError(path + ": not a scene dataset");
    int version = require(j, "version", path).get<int>();
    if (version != 1)
      throw FormError(path + ": unsupported dataset version " + std::to_string(version));
    Dataset ds;
    ds.seed = require(j, "seed", path).get<uint64_t>();
    ds.inventory = inventory_from_json(require(j, "inventory", path), path + ".inventory");
    const json& scenes = require(j, "scenes", path);
    for (size_t i = 0; i < scenes.size(); ++i) {
      std::string ctx = path + ".scenes[" + std::to_string(i) + "]";
      const json& e = scenes[i];
      SceneRecord rec;
      rec.id = require(e, "id", ctx).get<std::string>();
      ctx += " ('" + rec.id + "')";
      rec.sentence = require(e, "sentence", ctx).get<std::vector<std::string>>();
      const json& objs = require(e, "objects", ctx);
      for (size_t k = 0; k < objs.size(); ++k) {
        std::string octx = ctx + ".objects[" + std::to_string(k) + "]";
        ObjectFeatures o;
        o.id = require(objs[k], "id", octx).get<std::string>();
        o.color = require(objs[k], "color", octx).get<std::vector<double>>();
        o.shape = require(objs[k], "shape", octx).get<std::vector<double>>();
        if ((int)o.color.size() != ds.inventory.d_c || (int)o.shape.size() != ds.inventory.d_s)
          throw FormError(octx + ": feature blocks do not match dataset dimensions");
        rec.objects.push_back(std::move(o));
      }
      rec.gold = require(e, "gold", ctx).get<std::vector<std::string>>();
      std::set<std::string> known;
      for (const auto& o : rec.objects) known.insert(o.id);
      for (const auto& g : rec.gold)
        if (!known.count(g))
          throw FormError(ctx + ": gold object '" + g + "' is not in the scene");
      if (e.contains("lf")) rec.lf = e["lf"].get<std::string>();
      if (e.contains("world"))
        rec.world = e["world"].get<std::map<std::string, std::map<std::string, bool>>>();
      ds.records.push_back(std::move(rec));
    }
    return ds;
  } catch (const json::exception& e) {
    throw FormError(path + ": " + e.what());
  }
}

void save_thesaurus(const AttributeInventory& inv, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormError("cannot write '" + path + "'");
  for (const auto* list : {&inv.colors, &inv.shapes})
    for (const AttributeDef& a : *list) {
      out << a.name << ":";
      for (size_t i = 0; i < a.synonyms.size(); ++i)
        out << (i == 0 ? " " : ", ") << a.synonyms[i];
      out << '\n';
    }
  if (!out) throw FormError("failed writing '" + path + "'");
}

std::map<std::string, std::vector<std::string>> load_thesaurus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormError("cannot read '" + path + "'");
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t colon = t.find(':');
    if (colon == std::string::npos)
      throw FormError(path + ":" + std::to_string(lineno) + ": expected 'attribute: words'");
    std::string attr = trim(t.substr(0, colon));
    if (attr.empty())
      throw FormError(path + ":" + std::to_string(lineno) + ": empty attribute name");
    std::vector<std::string> words;
    std::stringstream rest(t.substr(colon + 1));
    std::string piece;
    while (std::getline(rest, piece, ',')) {
      std::string w = trim(piece);
      if (!w.empty()) words.push_back(w);
    }
    out[attr] = std::move(words);
  }
  return out;
}

}  // namespace groundlex
