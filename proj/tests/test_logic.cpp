#include "doctest.h"
#include "groundlex/logic.hpp"

using namespace groundlex;

TEST_CASE("types are interned and printed") {
  FormArena a;
  TypeRef et = a.t_fn(a.t_entity(), a.t_truth());
  CHECK(et == a.t_fn(a.t_entity(), a.t_truth()));
  CHECK(et->text == "<e,t>");
  CHECK(a.t_fn(et, et)->text == "<<e,t>,<e,t>>");
}

TEST_CASE("beta reduction is idempotent and type-preserving") {
  FormArena a;
  TypeRef e = a.t_entity();
  TypeRef et = a.t_fn(e, a.t_truth());
  FormRef f = a.var("f", et);
  FormRef x = a.var("x", e);
  FormRef red = a.constant("red", Channel::Color);
  FormRef noun = a.lam("x", e, a.pred(Channel::Color, x, red));
  FormRef mod = a.lam("f", et, a.lam("x", e, a.conj({a.app(f, x), a.pred(Channel::Color, x, red)})));

  FormRef applied = a.app(mod, noun);
  CHECK(applied->type == et);
  FormRef reduced = a.beta_reduce(applied);
  CHECK(reduced->type == et);
  CHECK(a.beta_reduce(reduced) == reduced);
  CHECK(a.text(reduced) == "(lam x:e (and (color x red) (color x red)))");
}

TEST_CASE("substitution avoids variable capture") {
  FormArena a;
  TypeRef e = a.t_entity();
  TypeRef et = a.t_fn(e, a.t_truth());
  FormRef f = a.var("f", et);
  FormRef x = a.var("x", e);
  FormRef red = a.constant("red", Channel::Color);
  // outer = lam f. lam x. f(x); g = lam z. color(x, red) with x free
  FormRef outer = a.lam("f", et, a.lam("x", e, a.app(f, x)));
  FormRef g = a.lam("z", e, a.pred(Channel::Color, x, red));
  FormRef reduced = a.beta_reduce(a.app(outer, g));
  // The free x must survive; the binder must have been renamed away from it.
  CHECK(reduced->kind == Form::Kind::Lam);
  CHECK(reduced->name != "x");
  CHECK(a.text(reduced->a) == "(color x red)");
}

TEST_CASE("conjunction flattens and truth is the empty conjunction") {
  FormArena a;
  TypeRef e = a.t_entity();
  FormRef x = a.var("x", e);
  FormRef p = a.pred(Channel::Color, x, a.constant("red", Channel::Color));
  FormRef q = a.pred(Channel::Shape, x, a.constant("arch", Channel::Shape));
  FormRef r = a.pred(Channel::Color, x, a.constant("blue", Channel::Color));
  FormRef nested = a.conj({a.conj({p, q}), r});
  CHECK(nested->kind == Form::Kind::And);
  CHECK(nested->kids.size() == 3);
  CHECK(a.truth()->is_truth());
  CHECK(a.conj({p}) == p);
}

TEST_CASE("canonicalize sorts, deduplicates, and renames variables") {
  FormArena a;
  FormRef z = a.parse_sentence("(lam q (and (shape q arch) (color q red) (color q red)))");
  CHECK(a.print_sentence(z) == "(lam x (and (color x red) (shape x arch)))");
  CHECK(a.canonicalize(z) == z);

  FormRef y = a.parse_sentence("(lam w (and (color w red) (shape w arch)))");
  CHECK(y == z);  // hash-consed: canonical equals compare by pointer
}

TEST_CASE("sentence grammar round-trips bit-exactly") {
  FormArena a;
  const char* samples[] = {
      "(lam x (color x red))",
      "(lam x (shape x cube))",
      "(lam x (and (color x blue) (shape x arch)))",
      "(lam x (and (color x green) (color x red) (shape x triangle)))",
      "(lam x true)",
  };
  for (const char* s : samples) {
    FormRef z = a.parse_sentence(s);
    CHECK(a.print_sentence(z) == s);
    CHECK(a.parse_sentence(a.print_sentence(z)) == z);
  }
}

TEST_CASE("attribute_set lists constants sorted by name") {
  FormArena a;
  FormRef z = a.parse_sentence("(lam x (and (shape x arch) (color x red)))");
  const auto& attrs = a.attribute_set(z);
  REQUIRE(attrs.size() == 2);
  CHECK(attrs[0].name == "arch");
  CHECK(attrs[0].channel == Channel::Shape);
  CHECK(attrs[1].name == "red");
  CHECK(attrs[1].channel == Channel::Color);

  CHECK(a.attribute_set(a.parse_sentence("(lam x true)")).empty());

  TypeRef e = a.t_entity();
  FormRef notsent = a.lam("f", a.t_fn(e, a.t_truth()), a.var("f", a.t_fn(e, a.t_truth())));
  CHECK_THROWS_AS(a.attribute_set(notsent), FormError);
}

TEST_CASE("parse_sentence rejects malformed input") {
  FormArena a;
  CHECK_THROWS_AS(a.parse_sentence("(color x red)"), FormError);
  CHECK_THROWS_AS(a.parse_sentence("(lam x (color y red))"), FormError);
  CHECK_THROWS_AS(a.parse_sentence("(lam x (and))"), FormError);
  CHECK_THROWS_AS(a.parse_sentence("(lam x (color x red)) tail"), FormError);
  CHECK_THROWS_AS(a.parse_sentence("(lam x (size x big))"), FormError);
}

TEST_CASE("ill-typed application throws with the offending subterm") {
  FormArena a;
  FormRef red = a.constant("red", Channel::Color);
  FormRef bad = a.app(red, red);
  CHECK(bad->type == a.t_invalid());
  CHECK_THROWS_AS(a.beta_reduce(bad), TypingError);
  try {
    a.beta_reduce(bad);
  } catch (const TypingError& err) {
    CHECK(std::string(err.what()).find("(app red red)") != std::string::npos);
  }
}

TEST_CASE("substitute_holes adapts predicate channels to fillers") {
  FormArena a;
  TypeRef e = a.t_entity();
  FormRef x = a.var("x", e);
  FormRef skeleton = a.lam("x", e, a.pred(Channel::Color, x, a.hole(1)));
  FormRef arch = a.constant("arch", Channel::Shape);
  FormRef filled = a.substitute_holes(skeleton, {arch});
  CHECK(a.text(filled) == "(lam x:e (shape x arch))");
  CHECK(filled->channel_ok);
  CHECK_THROWS_AS(a.substitute_holes(skeleton, {}), FormError);
}

TEST_CASE("channel mismatches are flagged") {
  FormArena a;
  TypeRef e = a.t_entity();
  FormRef x = a.var("x", e);
  FormRef arch = a.constant("arch", Channel::Shape);
  FormRef wrong = a.pred(Channel::Color, x, arch);
  CHECK_FALSE(wrong->channel_ok);
  CHECK(a.lam("x", e, wrong)->channel_ok == false);
}

TEST_CASE("apply_reduced memoizes on the operand pair") {
  FormArena a;
  TypeRef e = a.t_entity();
  FormRef x = a.var("x", e);
  FormRef noun = a.lam("x", e, a.pred(Channel::Color, x, a.constant("red", Channel::Color)));
  TypeRef et = a.t_fn(e, a.t_truth());
  FormRef f = a.var("f", et);
  FormRef ident = a.lam("f", et, f);
  FormRef r1 = a.apply_reduced(ident, noun);
  FormRef r2 = a.apply_reduced(ident, noun);
  CHECK(r1 == r2);
  CHECK(r1 == noun);
}
