#include "groundlex/model_io.hpp"

#include <fstream>

#include "json.hpp"

namespace groundlex {

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw FormError(ctx + ": missing '" + key + "'");
  return *it;
}

json model_to_json(const JointModel& m) {
  json j;
  j["format"] = "groundlex-model";
  j["version"] = kModelVersion;
  j["dims"] = {{"d_c", m.bank.d_c()}, {"d_s", m.bank.d_s()}};
  j["config"] = m.config;

  json constants = json::array();
  for (const AttributeConstant& c : m.core.constants.all())
    constants.push_back(
        {{"name", c.name},
         {"channel", channel_name(c.channel)},
         {"origin", c.origin == ConstantOrigin::Bootstrap ? "bootstrap" : "induced"}});
  j["constants"] = std::move(constants);

  json templates = json::array();
  for (const Template& t : m.core.lexicon.templates()) templates.push_back(t.id);
  j["templates"] = std::move(templates);

  json lexemes = json::array();
  for (size_t i = 0; i < m.core.lexicon.lexemes().size(); ++i)
    lexemes.push_back(m.core.lexicon.lexeme_line((int)i, m.core.constants));
  j["lexemes"] = std::move(lexemes);

  j["null_words"] = m.core.lexicon.null_words();
  j["weights"] = m.core.model.sorted_weights(false);

  json classifiers = json::array();
  for (const AttributeClassifier& c : m.bank.all())
    classifiers.push_back(
        {{"constant", c.constant}, {"channel", channel_name(c.channel)}, {"weights", c.weights}});
  j["classifiers"] = std::move(classifiers);
  return j;
}

std::unique_ptr<JointModel> model_from_json(const json& j, const std::string& ctx) {
  if (require(j, "format", ctx).get<std::string>() != "groundlex-model")
    throw FormError(ctx + ": not a model file");
  int version = require(j, "version", ctx).get<int>();
  if (version != kModelVersion)
    throw FormError(ctx + ": unsupported model version " + std::to_string(version) +
                    ", expected " + std::to_string(kModelVersion));

  auto m = std::make_unique<JointModel>();
  const json& dims = require(j, "dims", ctx);
  m->bank.set_dims(require(dims, "d_c", ctx + ".dims").get<int>(),
                   require(dims, "d_s", ctx + ".dims").get<int>());
  m->config = require(j, "config", ctx).get<std::map<std::string, std::string>>();

  for (const json& c : require(j, "constants", ctx)) {
    std::string origin = require(c, "origin", ctx + ".constants").get<std::string>();
    if (origin != "bootstrap" && origin != "induced")
      throw FormError(ctx + ": unknown constant origin '" + origin + "'");
    m->core.constants.add(
        {require(c, "name", ctx + ".constants").get<std::string>(),
         channel_from_name(require(c, "channel", ctx + ".constants").get<std::string>()),
         origin == "bootstrap" ? ConstantOrigin::Bootstrap : ConstantOrigin::Induced});
  }

  const json& templates = require(j, "templates", ctx);
  const std::vector<Template>& builtin = m->core.lexicon.templates();
  if (templates.size() != builtin.size())
    throw FormError(ctx + ": template inventory size mismatch");
  for (size_t i = 0; i < builtin.size(); ++i)
    if (templates[i].get<std::string>() != builtin[i].id)
      throw FormError(ctx + ": template inventory mismatch at position " + std::to_string(i));

  for (const json& line : require(j, "lexemes", ctx))
    m->core.lexicon.add_lexeme(Lexicon::parse_lexeme_line(line.get<std::string>()));
  for (const json& w : require(j, "null_words", ctx))
    m->core.lexicon.add_null_word(w.get<std::string>());

  for (const auto& [name, value] : require(j, "weights", ctx).get<std::map<std::string, double>>())
    m->core.model.set_weight(m->core.model.feature_id(name), value);

  for (const json& c : require(j, "classifiers", ctx)) {
    AttributeClassifier cls;
    cls.constant = require(c, "constant", ctx + ".classifiers").get<std::string>();
    cls.channel =
        channel_from_name(require(c, "channel", ctx + ".classifiers").get<std::string>());
    cls.weights = require(c, "weights", ctx + ".classifiers").get<std::vector<double>>();
    m->bank.add(std::move(cls));
  }
  return m;
}

}  // namespace

void save_model(const JointModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormError("cannot write '" + path + "'");
  out << model_to_json(m).dump() << '\n';
  if (!out) throw FormError("failed writing '" + path + "'");
}

std::unique_ptr<JointModel> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormError("cannot read '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormError(path + ": " + e.what());
  }
  try {
    return model_from_json(j, path);
  } catch (const json::exception& e) {
    throw FormError(path + ": " + e.what());
  }
}

std::unique_ptr<JointModel> clone_model(const JointModel& m) {
  return model_from_json(model_to_json(m), "<clone>");
}

}  // namespace groundlex
