#pragma once

// Synthetic corpus generator and dataset plumbing.  A record pairs a tokenized
// sentence with a scene (objects as noisy two-channel feature vectors) and the
// gold set of objects the sentence selects.  Records produced for supervised
// initialization additionally carry the annotated logical form and total
// per-object attribute labels; weakly supervised records carry neither.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "groundlex/perception.hpp"

namespace groundlex {

struct AttributeDef {
  std::string name;                   // doubles as logical constant and main surface word
  std::vector<double> prototype;      // unit norm, length d_c or d_s
  std::vector<std::string> synonyms;  // alternative surface words, held-out ones last
};

struct AttributeInventory {
  int d_c = 0;
  int d_s = 0;
  int bootstrap_count = 3;     // per channel: leading attributes are the supervised ones
  int reserved_synonyms = 2;   // trailing synonyms per attribute, used only by synonym-mode corpora
  std::vector<AttributeDef> colors;
  std::vector<AttributeDef> shapes;

  std::vector<std::string> bootstrap_names() const;
  std::vector<std::string> eval_names() const;
  // word -> attribute name, over main names and all synonyms
  std::map<std::string, std::string> surface_map() const;

  // Six colors and six shapes with seeded random unit prototypes placed at
  // exactly `separation` from each other within a channel, plus a fixed
  // synonym table.  Separation against feature noise sets how hard the
  // attributes are to tell apart.
  static AttributeInventory standard(int d_c, int d_s, uint64_t seed, double separation = 0.6);
};

struct ObjectTruth {
  std::string color, shape;  // generating attribute names
};

struct SceneRecord {
  std::string id;                     // "<scene>_u<k>", e.g. "s042_u3"
  std::vector<std::string> sentence;  // lowercase tokens
  std::vector<ObjectFeatures> objects;
  std::vector<std::string> gold;      // ids of the selected objects, in object order
  std::string lf;                     // annotated logical form text, "" when absent
  // object id -> attribute name -> label; empty when absent
  std::map<std::string, std::map<std::string, bool>> world;
  // Generator-side truth parallel to objects; never serialized.
  std::vector<ObjectTruth> truth;

  std::string scene_group() const;  // id prefix before '_', shared by co-scene records
};

struct GenConfig {
  int scenes = 142;
  int sentences_per_scene = 7;
  int min_objects = 4;
  int max_objects = 10;
  int d_c = 16;
  int d_s = 16;
  double noise = 0.1;              // per-component feature noise sigma
  double separation = 0.6;         // pairwise prototype distance within a channel
  double theme = 0.5;              // chance a non-anchor object shares the anchor's
                                   // attribute, per channel; gives scenes a dominant
                                   // look so word/object co-occurrence carries signal
  double blur = 0.0;               // chance a channel's features are drawn off-center,
                                   // mixed toward another prototype; such objects still
                                   // carry their true attribute but are hard instances
  double focus = 0.9;              // chance a sentence describes the anchor object
                                   // instead of a uniformly drawn one; keeps most of a
                                   // scene's sentences on its dominant attributes
  double synonym_rate = 0.35;      // chance an attribute surfaces as a synonym
  double bootstrap_fraction = 0.45;  // share of scenes described with supervised attributes only
  bool synonym_mode = false;       // eval scenes use known attributes under held-out synonyms
  int max_retries = 100;
  uint64_t seed = 0;
};

struct Dataset {
  uint64_t seed = 0;
  AttributeInventory inventory;
  std::vector<SceneRecord> records;
};

// Deterministic corpus: same config, byte-identical dataset.  Every record's
// gold set is non-empty and consistent with the generating attribute truth.
Dataset generate(const GenConfig& cfg);

struct SplitResult {
  std::vector<SceneRecord> dsup;   // supervised records, labels kept
  std::vector<SceneRecord> train;  // weakly supervised, labels stripped
  std::vector<SceneRecord> test;   // held out, labels stripped
};

// Records whose attribute words are all supervised attributes under familiar
// surface forms go to dsup; the rest are split train/test by physical scene
// (seeded, ~train_fraction of scenes).  Throws if a physical scene would land
// on both sides of the supervised/weak boundary or if record ids collide.
SplitResult split_by_attribute(const std::vector<SceneRecord>& records,
                               const AttributeInventory& inv, double train_fraction,
                               uint64_t seed);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// "attribute: word1, word2, ..." lines, one per attribute, synonyms only.
void save_thesaurus(const AttributeInventory& inv, const std::string& path);
std::map<std::string, std::vector<std::string>> load_thesaurus(const std::string& path);

}  // namespace groundlex
