#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "groundlex/commands.hpp"

namespace {

// Reports go to stdout; --out keeps a copy (for commands whose --out is not
// already claimed by a file artifact such as a model).
void emit(const std::string& report, const std::string& copy) {
  std::cout << report;
  if (copy.empty()) return;
  std::ofstream f(copy, std::ios::binary);
  if (!f) throw groundlex::FormError("cannot write '" + copy + "'");
  f << report;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace groundlex;
  CLI::App app{"grounded attribute learning over synthetic object scenes"};
  app.require_subcommand(1);

  GenOptions gen_opt;
  std::string gen_report;
  CLI::App* gen = app.add_subcommand("gen", "generate a corpus and split it into files");
  gen->add_option("--out-dir", gen_opt.out_dir, "directory for the dataset files");
  gen->add_option("--scenes", gen_opt.scenes, "number of scenes");
  gen->add_option("--sentences", gen_opt.sentences_per_scene, "sentences per scene");
  gen->add_option("--noise", gen_opt.noise, "feature noise level");
  gen->add_option("--separation", gen_opt.separation, "pairwise prototype distance");
  gen->add_option("--theme", gen_opt.theme, "scene attribute coherence in [0,1]");
  gen->add_option("--blur", gen_opt.blur, "chance of off-center object features in [0,1]");
  gen->add_option("--focus", gen_opt.focus, "chance a sentence describes the anchor object");
  gen->add_option("--synonym-rate", gen_opt.synonym_rate, "chance of a synonym surface form");
  gen->add_option("--bootstrap-fraction", gen_opt.bootstrap_fraction,
                  "fraction of scenes reserved for the annotated corpus");
  gen->add_option("--train-fraction", gen_opt.train_fraction, "train share of the weak corpus");
  gen->add_option("--min-objects", gen_opt.min_objects, "fewest objects per scene");
  gen->add_option("--max-objects", gen_opt.max_objects, "most objects per scene");
  gen->add_option("--dc", gen_opt.d_c, "color feature dimensions");
  gen->add_option("--ds", gen_opt.d_s, "shape feature dimensions");
  gen->add_flag("--synonym-mode", gen_opt.synonym_mode,
                "describe known attributes only through held-out synonyms");
  gen->add_option("--seed", gen_opt.seed, "RNG seed");
  gen->add_option("--out", gen_report, "also write the report here");
  gen->callback([&] { emit(cmd_gen(gen_opt), gen_report); });

  BootstrapOptions boot_opt;
  CLI::App* boot = app.add_subcommand("bootstrap", "train the initial model from annotated data");
  boot->add_option("--data", boot_opt.data, "annotated dataset file")->required();
  boot->add_option("--out", boot_opt.out, "output model file")->required();
  boot->add_option("--epochs", boot_opt.params.epochs, "parser training epochs");
  boot->add_option("--lr", boot_opt.params.rate, "parser learning rate");
  boot->add_option("--decay", boot_opt.params.decay, "learning-rate decay per update");
  boot->add_option("--beam", boot_opt.params.beam, "parser beam width");
  boot->add_option("--classifier-iterations", boot_opt.params.classifier_iterations,
                   "gradient steps per attribute classifier");
  boot->add_option("--seed", boot_opt.params.seed, "RNG seed");
  boot->callback([&] { emit(cmd_bootstrap(boot_opt), ""); });

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand("train", "extend and train a model on weak supervision");
  train->add_option("--model", train_opt.model, "input model file")->required();
  train->add_option("--data", train_opt.data, "weakly supervised dataset file")->required();
  train->add_option("--out", train_opt.out, "output model file")->required();
  train->add_option("--epochs", train_opt.config.epochs, "training epochs");
  train->add_option("--lr", train_opt.config.rate, "learning rate");
  train->add_option("--decay", train_opt.config.decay, "learning-rate decay per update");
  train->add_option("--beam", train_opt.config.beam, "parser beam width");
  train->add_option("--new-classifiers", train_opt.config.new_classifiers,
                    "fresh classifiers to add before training");
  train->add_option("--threshold", train_opt.config.threshold, "membership threshold");
  train->add_option("--seed", train_opt.config.seed, "RNG seed");
  train->add_option("--runs", train_opt.runs, "independent runs (seed+run each)");
  train->callback([&] { emit(cmd_train(train_opt), ""); });

  EvalOptions eval_opt;
  std::string eval_report;
  CLI::App* eval = app.add_subcommand("eval", "score a model's set predictions on a dataset");
  eval->add_option("--model", eval_opt.model, "model file")->required();
  eval->add_option("--data", eval_opt.data, "dataset file")->required();
  eval->add_option("--beam", eval_opt.beam, "parser beam width");
  eval->add_option("--threshold", eval_opt.threshold, "membership threshold");
  eval->add_option("--out", eval_report, "also write the report here");
  eval->callback([&] { emit(cmd_eval(eval_opt), eval_report); });

  AblateVisionOptions av_opt;
  std::string av_report;
  CLI::App* av = app.add_subcommand(
      "ablate-vision", "classifier-only baseline driven by a synonym table");
  av->add_option("--dsup", av_opt.dsup, "annotated dataset (fixes the known vocabulary)")
      ->required();
  av->add_option("--train", av_opt.train, "weakly supervised training dataset")->required();
  av->add_option("--test", av_opt.test, "test dataset")->required();
  av->add_option("--thesaurus", av_opt.thesaurus, "attribute synonym table")->required();
  av->add_option("--classifier-iterations", av_opt.classifier_iterations,
                 "gradient steps per classifier");
  av->add_option("--out", av_report, "also write the report here");
  av->callback([&] { emit(cmd_ablate_vision(av_opt), av_report); });

  AblateLanguageOptions al_opt;
  std::string al_report;
  CLI::App* al = app.add_subcommand(
      "ablate-language", "evaluate the initial model with no new-word handling");
  al->add_option("--model", al_opt.model, "model file")->required();
  al->add_option("--data", al_opt.data, "dataset file")->required();
  al->add_option("--beam", al_opt.beam, "parser beam width");
  al->add_option("--threshold", al_opt.threshold, "membership threshold");
  al->add_option("--out", al_report, "also write the report here");
  al->callback([&] { emit(cmd_ablate_language(al_opt), al_report); });

  InspectOptions ins_opt;
  std::string ins_report;
  CLI::App* ins = app.add_subcommand("inspect", "show word-to-classifier weight bindings");
  ins->add_option("--model", ins_opt.model, "model file")->required();
  ins->add_option("words", ins_opt.words, "words to inspect")->required();
  ins->add_option("--out", ins_report, "also write the report here");
  ins->callback([&] { emit(cmd_inspect(ins_opt), ins_report); });

  CurveOptions curve_opt;
  std::string curve_report;
  uint64_t curve_seed = 0;
  CLI::App* curve = app.add_subcommand(
      "curve", "accuracy as a function of annotated-corpus size");
  curve->add_option("--scenes", curve_opt.gen.scenes, "number of scenes");
  curve->add_option("--separation", curve_opt.gen.separation, "pairwise prototype distance");
  curve->add_option("--theme", curve_opt.gen.theme, "scene attribute coherence in [0,1]");
  curve->add_option("--blur", curve_opt.gen.blur, "chance of off-center object features");
  curve->add_option("--focus", curve_opt.gen.focus, "chance a sentence describes the anchor");
  curve->add_option("--sizes", curve_opt.sizes, "annotated-corpus fractions");
  curve->add_option("--epochs", curve_opt.train.epochs, "training epochs");
  curve->add_option("--seed", curve_seed, "RNG seed");
  curve->add_option("--out", curve_report, "also write the report here");
  curve->callback([&] {
    curve_opt.gen.seed = curve_seed;
    curve_opt.bootstrap.seed = curve_seed;
    curve_opt.train.seed = curve_seed;
    emit(cmd_curve(curve_opt), curve_report);
  });

  SynonymOptions syn_opt;
  std::string syn_report;
  uint64_t syn_seed = 0;
  CLI::App* syn = app.add_subcommand(
      "synonym", "novel-word experiment: held-out synonyms for known attributes");
  syn->add_option("--scenes", syn_opt.gen.scenes, "number of scenes");
  syn->add_option("--separation", syn_opt.gen.separation, "pairwise prototype distance");
  syn->add_option("--theme", syn_opt.gen.theme, "scene attribute coherence in [0,1]");
  syn->add_option("--blur", syn_opt.gen.blur, "chance of off-center object features");
  syn->add_option("--focus", syn_opt.gen.focus, "chance a sentence describes the anchor");
  syn->add_option("--epochs", syn_opt.train.epochs, "training epochs");
  syn->add_option("--runs", syn_opt.runs, "independent runs (seed+run each)");
  syn->add_option("--binding-threshold", syn_opt.binding_threshold,
                  "fraction of novel words that must bind to the right attribute");
  syn->add_option("--seed", syn_seed, "RNG seed");
  syn->add_option("--out", syn_report, "also write the report here");
  syn->callback([&] {
    syn_opt.gen.seed = syn_seed;
    syn_opt.bootstrap.seed = syn_seed;
    syn_opt.train.seed = syn_seed;
    emit(cmd_synonym(syn_opt), syn_report);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
