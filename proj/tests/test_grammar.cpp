#include "doctest.h"
#include "groundlex/grammar.hpp"

using namespace groundlex;

namespace {

ConstantTable sample_constants() {
  ConstantTable t;
  t.add({"red", Channel::Color, ConstantOrigin::Bootstrap});
  t.add({"blue", Channel::Color, ConstantOrigin::Bootstrap});
  t.add({"arch", Channel::Shape, ConstantOrigin::Bootstrap});
  return t;
}

int template_index(const Lexicon& lexicon, const std::string& id) {
  for (size_t t = 0; t < lexicon.templates().size(); ++t) {
    if (lexicon.templates()[t].id == id) return static_cast<int>(t);
  }
  return -1;
}

}  // namespace

TEST_CASE("categories parse, print, and intern") {
  CategoryTable cats;
  CHECK(cats.parse("N") == cats.n());
  CHECK(cats.parse("NP") == cats.np());
  CHECK(cats.parse("N/N")->text == "N/N");
  CategoryRef cop = cats.parse("(S\\N)/N");
  CHECK(cop->text == "(S\\N)/N");
  CHECK(cop->kind == CategoryNode::Kind::Fwd);
  CHECK(cop->arg == cats.n());
  CHECK(cop->result->text == "S\\N");
  CHECK(cats.parse("(S\\N)/N") == cop);
  CHECK_THROWS_AS(cats.parse("N/"), FormError);
  CHECK_THROWS_AS(cats.parse("(N"), FormError);
}

TEST_CASE("semantic types follow the category structure") {
  CategoryTable cats;
  FormArena a;
  TypeRef et = a.t_fn(a.t_entity(), a.t_truth());
  CHECK(cats.semantic_type(cats.n(), a) == et);
  CHECK(cats.semantic_type(cats.s(), a) == et);
  CHECK(cats.semantic_type(cats.np(), a) == a.t_entity());
  CHECK(cats.semantic_type(cats.parse("(S\\N)/N"), a) == a.t_fn(et, a.t_fn(et, et)));
  CHECK(cats.semantic_type(cats.parse("N/NP"), a) == a.t_fn(a.t_entity(), et));
}

TEST_CASE("builtin templates instantiate against lexemes") {
  FormArena a;
  CategoryTable cats;
  ConstantTable constants = sample_constants();
  Lexicon lexicon;
  lexicon.set_templates(builtin_templates(a, cats));
  int red = lexicon.add_lexeme({{"red"}, {"red"}});
  int arch = lexicon.add_lexeme({{"arch"}, {"arch"}});
  int is = lexicon.add_lexeme({{"is"}, {}});

  int attr_noun = template_index(lexicon, "attr_noun");
  int attr_mod = template_index(lexicon, "attr_mod");
  int copula = template_index(lexicon, "copula");
  int entity = template_index(lexicon, "entity");
  REQUIRE(attr_noun >= 0);
  REQUIRE(attr_mod >= 0);
  REQUIRE(copula >= 0);
  REQUIRE(entity >= 0);

  auto item = instantiate(lexicon, red, attr_noun, constants, a);
  REQUIRE(item.has_value());
  CHECK(item->category == cats.n());
  CHECK(a.text(item->form) == "(lam x:e (color x red))");

  // The predicate adopts the channel of the filler constant.
  auto arch_item = instantiate(lexicon, arch, attr_noun, constants, a);
  REQUIRE(arch_item.has_value());
  CHECK(a.text(arch_item->form) == "(lam x:e (shape x arch))");

  auto mod_item = instantiate(lexicon, arch, attr_mod, constants, a);
  REQUIRE(mod_item.has_value());
  CHECK(mod_item->category->text == "N/N");
  CHECK(a.text(mod_item->form) == "(lam f:<e,t> (lam x:e (and (app f x) (shape x arch))))");

  auto ent_item = instantiate(lexicon, red, entity, constants, a);
  REQUIRE(ent_item.has_value());
  CHECK(ent_item->category == cats.np());
  CHECK(a.text(ent_item->form) == "red");

  // Arity mismatches produce no item.
  CHECK_FALSE(instantiate(lexicon, red, copula, constants, a).has_value());
  CHECK_FALSE(instantiate(lexicon, is, attr_noun, constants, a).has_value());
  CHECK(instantiate(lexicon, is, copula, constants, a).has_value());

  // Zero-arity templates instantiate for every empty-constant lexeme.
  int count = 0;
  for (size_t t = 0; t < lexicon.templates().size(); ++t) {
    if (instantiate(lexicon, is, static_cast<int>(t), constants, a)) ++count;
  }
  CHECK(count == 6);  // mod_fwd, mod_bwd, copula, rel x2, np_ident
}

TEST_CASE("lexicon stores lexemes, spans, and null words") {
  Lexicon lexicon;
  int a = lexicon.add_lexeme({{"red"}, {"red"}});
  int b = lexicon.add_lexeme({{"red"}, {"blue"}});
  CHECK(a != b);
  CHECK(lexicon.add_lexeme({{"red"}, {"red"}}) == a);
  CHECK(lexicon.contains_lexeme({{"red"}, {"blue"}}));
  CHECK_FALSE(lexicon.contains_lexeme({{"blue"}, {"blue"}}));

  const auto* ids = lexicon.lexemes_for({"red"});
  REQUIRE(ids != nullptr);
  CHECK(ids->size() == 2);
  CHECK(lexicon.lexemes_for({"blue"}) == nullptr);

  lexicon.add_null_word("the");
  CHECK(lexicon.is_null_word("the"));
  CHECK_FALSE(lexicon.is_null_word("red"));
  CHECK(lexicon.known_word("red"));
  CHECK_FALSE(lexicon.known_word("the"));

  CHECK_THROWS_AS(lexicon.add_lexeme({{}, {}}), FormError);
  CHECK_THROWS_AS(lexicon.add_lexeme({{"a", "b", "c", "d"}, {}}), FormError);
}

TEST_CASE("lexeme lines round-trip") {
  ConstantTable constants = sample_constants();
  Lexicon lexicon;
  int two = lexicon.add_lexeme({{"burnt", "orange"}, {"red"}});
  int none = lexicon.add_lexeme({{"is"}, {}});
  int pair = lexicon.add_lexeme({{"thing"}, {"red", "arch"}});

  CHECK(lexicon.lexeme_line(two, constants) == "burnt orange\t[red]\tC");
  CHECK(lexicon.lexeme_line(none, constants) == "is\t[]\t");
  CHECK(lexicon.lexeme_line(pair, constants) == "thing\t[red,arch]\tCS");

  Lexeme parsed = Lexicon::parse_lexeme_line("burnt orange\t[red]\tC");
  CHECK(parsed.words == std::vector<std::string>{"burnt", "orange"});
  CHECK(parsed.constants == std::vector<std::string>{"red"});
  CHECK(Lexicon::parse_lexeme_line("is\t[]\t").constants.empty());
  CHECK_THROWS_AS(Lexicon::parse_lexeme_line("no tabs here"), FormError);
}

TEST_CASE("parse model registers features and defaults to zero") {
  ParseModel model;
  CHECK(model.find_feature("tpl:copula") == -1);
  CHECK(model.weight_by_name("tpl:copula") == 0.0);
  int id = model.feature_id("tpl:copula");
  CHECK(model.find_feature("tpl:copula") == id);
  CHECK(model.feature_id("tpl:copula") == id);
  model.add_weight(id, 0.5);
  CHECK(model.weight(id) == 0.5);
  CHECK(model.weight_by_name("tpl:copula") == 0.5);

  model.feature_id("null:the");
  auto sorted = model.sorted_weights();
  CHECK(sorted.size() == 1);
  CHECK(model.sorted_weights(true).size() == 2);

  Lexeme lex{{"burnt", "orange"}, {"red", "arch"}};
  CHECK(ParseModel::lexeme_feature(lex) == "lex:burnt orange:[red,arch]");
  CHECK(ParseModel::template_feature("copula") == "tpl:copula");
  CHECK(ParseModel::null_feature("the") == "null:the");
  CHECK(ParseModel::skip_count_feature() == "skip");
  CHECK(ParseModel::conjunct_count_feature("red", 2) == "lf:red:2");
}

TEST_CASE("feature vectors merge duplicates and dot with the model") {
  ParseModel model;
  int a = model.feature_id("a");
  int b = model.feature_id("b");
  model.set_weight(a, 2.0);
  model.set_weight(b, -1.0);
  FeatureVec fv;
  fv.add(b, 1.0);
  fv.add(a, 1.0);
  fv.add(a, 1.0);
  fv.normalize();
  REQUIRE(fv.items.size() == 2);
  CHECK(fv.items[0].first == a);
  CHECK(fv.items[0].second == 2.0);
  CHECK(fv.dot(model) == doctest::Approx(3.0));

  std::map<int, double> acc;
  fv.axpy(0.5, acc);
  CHECK(acc[a] == doctest::Approx(1.0));
  CHECK(acc[b] == doctest::Approx(0.5));
}
