// Command-line front end: train, eval, tag, augment, gradcheck, split, synth.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "slotfill/checkpoint.hpp"
#include "slotfill/corpus.hpp"
#include "slotfill/decode.hpp"
#include "slotfill/errors.hpp"
#include "slotfill/gradcheck.hpp"
#include "slotfill/synthetic.hpp"
#include "slotfill/tagging.hpp"
#include "slotfill/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slotfill;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kVersion = "0.1.0";

// Published ATIS F1 for the two mechanisms, shown beside --compare output.
constexpr double kAtisAttentionF1 = 92.73;
constexpr double kAtisFocusF1 = 95.79;

std::string default_out_dir() {
  if (const char* env = std::getenv("SLOTFILL_OUT_DIR"); env && *env) return env;
  return "slotfill_out";
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable";
  std::ostringstream ss;
  ss << in.rdbuf();
  return fmt::format("{:016x}", fnv1a64(ss.str()));
}

struct Manifest {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;

  void input(const std::string& role, const fs::path& path) {
    inputs[role] = {{"path", path.string()}, {"fnv1a64", file_hash(path)}};
  }

  void write(const fs::path& path) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
  }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (seed) return *seed;
  std::cerr << "note: " << command << ": no --seed given, using 0\n";
  return 0;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string train_path;
  std::string valid_path;
  double split = 0.8;
  std::string mechanism = "focus";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> grid;
  bool use_grid = false;
  std::size_t min_count = 2;
  bool repair_iob = false;
  int precision = 64;
  std::string out_dir = default_out_dir();
  TrainConfig config;
};

void check_training_tags(Corpus& corpus, bool repair, const std::string& path) {
  for (LabeledSentence& s : corpus) {
    try {
      s.tags.tags = validate_iob(s.tags.tags, repair ? IobMode::kRepair : IobMode::kStrict);
    } catch (const ValidationError& e) {
      throw ParseError(path, s.line + e.position() - 1, e.what());
    }
  }
}

template <typename T>
int run_train(TrainOptions& o) {
  TrainConfig& cfg = o.config;
  cfg.mechanism = parse_mechanism(o.mechanism);
  cfg.seed = resolve_seed(o.seed, "train");
  if (o.use_grid) {
    std::vector<double> rates;
    for (const std::string& r : o.grid) {
      if (r.empty()) continue;
      try {
        rates.push_back(std::stod(r));
      } catch (const std::exception&) {
        throw ConfigError("--grid: '" + r + "' is not a number");
      }
    }
    if (!rates.empty()) cfg.grid = rates;
  }
  if (o.min_count < 1) throw ConfigError("min-count must be at least 1");
  cfg.validate();

  Manifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.seed;
  Corpus train_set = read_conll(o.train_path);
  manifest.input("train", o.train_path);
  Corpus valid_set;
  if (!o.valid_path.empty()) {
    valid_set = read_conll(o.valid_path);
    manifest.input("validation", o.valid_path);
  } else {
    Rng split_rng = Rng(cfg.seed).stream("split");
    auto parts = split_corpus(train_set, o.split, split_rng);
    train_set = std::move(parts.first);
    valid_set = std::move(parts.second);
    if (valid_set.empty()) throw ContractError("split left no validation sentences");
  }
  check_training_tags(train_set, o.repair_iob, o.train_path);
  const Vocabulary vocab = build_vocab(train_set, o.min_count);

  const fs::path out_dir = o.out_dir;
  ensure_dir(out_dir);
  std::ofstream log(out_dir / "train_log.jsonl");
  auto log_epoch = [&](double lr, const EpochStats& s) {
    log << json{{"lr", lr}, {"epoch", s.epoch}, {"loss", s.loss}, {"val_f1", s.val_f1},
                {"clamped_steps", s.clamped_steps}}.dump()
        << "\n";
    std::cerr << fmt::format("lr {:g} epoch {:3d}  loss {:12.4f}  val F1 {:6.2f}  ({:.1f}s)\n", lr,
                             s.epoch, s.loss, s.val_f1, s.seconds);
  };

  std::optional<TrainRecord<T>> best;
  if (o.use_grid) {
    GridResult<T> grid = grid_search<T>(cfg, vocab, train_set, valid_set);
    for (const auto& cell : grid.cells) {
      if (!cell.record) continue;
      for (const EpochStats& s : cell.record->epochs) log_epoch(cell.learning_rate, s);
    }
    const std::string table = format_grid(grid);
    std::cout << table;
    std::ofstream(out_dir / "grid.tsv") << table;
    manifest.outputs.push_back((out_dir / "grid.tsv").string());
    best = grid.best_record();
  } else {
    best = train<T>(cfg, vocab, train_set, valid_set,
                    [&](const EpochStats& s) { log_epoch(cfg.learning_rate, s); return true; });
  }
  log << json{{"summary", true}, {"lr", best->learning_rate}, {"best_epoch", best->best_epoch},
              {"best_val_f1", best->best_f1}}.dump()
      << "\n";

  Checkpoint ck = make_checkpoint(best->best_params, vocab,
                                  {{"best_epoch", std::to_string(best->best_epoch)},
                                   {"best_val_f1", fmt::format("{:.2f}", best->best_f1)},
                                   {"learning_rate", fmt::format("{:g}", best->learning_rate)},
                                   {"seed", std::to_string(cfg.seed)}});
  save_checkpoint(out_dir / "model.ckpt", ck);
  std::cout << fmt::format("best epoch {} (lr {:g}): validation F1 {:.2f}\n", best->best_epoch,
                           best->learning_rate, best->best_f1);

  manifest.config = {{"mechanism", o.mechanism},
                     {"learning_rate", cfg.learning_rate},
                     {"grid", o.use_grid ? json(cfg.grid) : json(nullptr)},
                     {"epochs", cfg.epochs},
                     {"dropout", cfg.dropout},
                     {"init_range", cfg.init_range},
                     {"beam", cfg.beam_size},
                     {"embedding_dim", cfg.embedding_dim},
                     {"hidden_dim", cfg.hidden_dim},
                     {"label_dim", cfg.label_dim},
                     {"decoder_dim", cfg.decoder_dim},
                     {"scorer_dim", cfg.scorer_dim},
                     {"peephole", cfg.peephole},
                     {"min_count", o.min_count},
                     {"split", o.valid_path.empty() ? json(o.split) : json(nullptr)},
                     {"repair_iob", o.repair_iob},
                     {"precision", o.precision},
                     {"jobs", cfg.jobs}};
  manifest.outputs.push_back((out_dir / "model.ckpt").string());
  manifest.outputs.push_back((out_dir / "train_log.jsonl").string());
  manifest.write(out_dir / "train.manifest.json");
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string model;
  std::string gold;
  std::string compare;
  std::size_t beam = 2;
  std::size_t jobs = 1;
  bool json_out = false;
  std::string out_dir = default_out_dir();
};

F1Report score_checkpoint(const Checkpoint& ck, const Corpus& gold, std::size_t beam,
                          std::size_t jobs) {
  Corpus data = gold;
  encode(data, ck.vocab);
  return evaluate(ck.params, ck.params.config().mechanism, ck.vocab.tags, data, beam, jobs);
}

int run_eval(const EvalOptions& o) {
  if (o.beam < 1) throw ConfigError("beam size must be at least 1");
  Manifest manifest;
  manifest.command = "eval";
  manifest.config = {{"beam", o.beam}, {"jobs", o.jobs}};
  const Corpus gold = read_conll(o.gold);
  manifest.input("gold", o.gold);
  const Checkpoint ck = load_checkpoint(o.model);
  manifest.input("model", o.model);
  const F1Report report = score_checkpoint(ck, gold, o.beam, o.jobs);
  json result = {{"model", o.model}, {"report", report_to_json(report)}};

  if (o.compare.empty()) {
    std::cout << (o.json_out ? report_to_json(report).dump(2) + "\n" : format_report(report));
  } else {
    const Checkpoint other = load_checkpoint(o.compare);
    manifest.input("compare", o.compare);
    const F1Report other_report = score_checkpoint(other, gold, o.beam, o.jobs);
    result["compare"] = {{"model", o.compare}, {"report", report_to_json(other_report)}};
    if (o.json_out) {
      std::cout << result.dump(2) << "\n";
    } else {
      std::cout << fmt::format("{:<12}{:<12}{:>14}{:>16}\n", "Model", "Mechanism", "F1-score (%)",
                               "ATIS reference");
      auto row = [](const Checkpoint& c, const F1Report& r) {
        const Mechanism m = c.params.config().mechanism;
        return fmt::format("{:<12}{:<12}{:>14.2f}{:>16.2f}\n", "BLSTM-LSTM",
                           m == Mechanism::kAttention ? "Attention" : "Focus", round2(r.overall.f1()),
                           m == Mechanism::kAttention ? kAtisAttentionF1 : kAtisFocusF1);
      };
      // Attention first, as in the published comparison.
      const bool first_is_attention = ck.params.config().mechanism == Mechanism::kAttention ||
                                      other.params.config().mechanism == Mechanism::kFocus;
      if (first_is_attention) {
        std::cout << row(ck, report) << row(other, other_report);
      } else {
        std::cout << row(other, other_report) << row(ck, report);
      }
      std::cout << fmt::format("# beam size {}; IOB-repaired predictions\n", o.beam);
    }
  }

  const fs::path out_dir = o.out_dir;
  ensure_dir(out_dir);
  std::ofstream(out_dir / "eval.json") << result.dump(2) << "\n";
  manifest.outputs.push_back((out_dir / "eval.json").string());
  manifest.write(out_dir / "eval.manifest.json");
  return 0;
}

// ---------------------------------------------------------------- augment

struct AugmentOptions {
  std::string input;
  std::string output;
  std::string lexicon;
  std::string lexicon_out;
  std::size_t factor = 10;
  std::optional<std::uint64_t> seed;
};

int run_augment(const AugmentOptions& o) {
  if (o.factor < 1) throw ConfigError("factor must be at least 1");
  Manifest manifest;
  manifest.command = "augment";
  manifest.seed = resolve_seed(o.seed, "augment");
  const Corpus corpus = read_conll(o.input);
  manifest.input("input", o.input);
  SlotLexicon lexicon;
  if (!o.lexicon.empty()) {
    std::ifstream in(o.lexicon, std::ios::binary);
    if (!in) throw ParseError(o.lexicon, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    lexicon = parse_lexicon(ss.str(), o.lexicon);
    manifest.input("lexicon", o.lexicon);
  } else {
    lexicon = harvest_lexicon(corpus);
  }
  Rng rng = Rng(*manifest.seed).stream("augment");
  const Corpus out = augment(corpus, lexicon, o.factor, rng);
  write_conll(o.output, out);
  manifest.outputs.push_back(o.output);
  if (!o.lexicon_out.empty()) {
    std::ofstream(o.lexicon_out, std::ios::binary) << format_lexicon(lexicon);
    manifest.outputs.push_back(o.lexicon_out);
  }
  manifest.config = {{"factor", o.factor}};
  manifest.write(o.output + ".manifest.json");
  std::cerr << fmt::format("{} sentences -> {} sentences ({} lexicon values)\n", corpus.size(),
                           out.size(), lexicon.values.size());
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  std::optional<std::uint64_t> seed;
  std::string mechanism = "both";
  double dropout = 0.5;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::string out_dir = default_out_dir();
};

int run_gradcheck(const GradcheckOptions& o) {
  Manifest manifest;
  manifest.command = "gradcheck";
  manifest.seed = resolve_seed(o.seed, "gradcheck");
  std::vector<Mechanism> mechanisms;
  if (o.mechanism == "both") {
    mechanisms = {Mechanism::kAttention, Mechanism::kFocus};
  } else {
    mechanisms = {parse_mechanism(o.mechanism)};
  }
  double worst = 0.0;
  json results = json::array();
  for (Mechanism m : mechanisms) {
    const GradCheckFixture f = make_gradcheck_fixture(m, *manifest.seed);
    const GradCheckResult r =
        check_loss_gradients(f.params, context_mode(m), f.example, o.dropout, *manifest.seed, o.step);
    std::cout << fmt::format("{:<10} checked {:5d} values  max rel. error {:.3e}  (worst: {}[{}])\n",
                             to_string(m), r.checked, r.max_rel_error, r.worst_tensor,
                             r.worst_index);
    results.push_back({{"mechanism", to_string(m)},
                       {"checked", r.checked},
                       {"max_rel_error", r.max_rel_error},
                       {"worst_tensor", r.worst_tensor}});
    worst = std::max(worst, r.max_rel_error);
  }
  const bool ok = worst < o.tolerance;
  std::cout << fmt::format("max rel. error {:.3e} {} tolerance {:g}: {}\n", worst, ok ? "<" : ">=",
                           o.tolerance, ok ? "PASS" : "FAIL");
  const fs::path out_dir = o.out_dir;
  ensure_dir(out_dir);
  std::ofstream(out_dir / "gradcheck.json") << results.dump(2) << "\n";
  manifest.config = {{"mechanism", o.mechanism}, {"dropout", o.dropout}, {"step", o.step},
                     {"tolerance", o.tolerance}};
  manifest.outputs.push_back((out_dir / "gradcheck.json").string());
  manifest.write(out_dir / "gradcheck.manifest.json");
  return ok ? 0 : kExitNumeric;
}

// ---------------------------------------------------------------- tag

struct TagOptions {
  std::string model;
  std::string input;
  std::string output;
  std::size_t beam = 2;
  std::size_t jobs = 1;
};

int run_tag(const TagOptions& o) {
  if (o.beam < 1) throw ConfigError("beam size must be at least 1");
  Manifest manifest;
  manifest.command = "tag";
  const Checkpoint ck = load_checkpoint(o.model);
  manifest.input("model", o.model);
  manifest.input("input", o.input);
  const std::size_t n = tag_file(ck, o.input, o.output, o.beam, o.jobs);
  manifest.config = {{"beam", o.beam}, {"jobs", o.jobs}};
  manifest.outputs.push_back(o.output);
  manifest.write(o.output + ".manifest.json");
  std::cerr << fmt::format("tagged {} sentences\n", n);
  return 0;
}

// ---------------------------------------------------------------- split / synth

struct SplitOptions {
  std::string input;
  std::string train_out;
  std::string valid_out;
  double fraction = 0.8;
  std::optional<std::uint64_t> seed;
};

int run_split(const SplitOptions& o) {
  Manifest manifest;
  manifest.command = "split";
  manifest.seed = resolve_seed(o.seed, "split");
  const Corpus corpus = read_conll(o.input);
  manifest.input("input", o.input);
  Rng rng = Rng(*manifest.seed).stream("split");
  auto [train_part, valid_part] = split_corpus(corpus, o.fraction, rng);
  write_conll(o.train_out, train_part);
  write_conll(o.valid_out, valid_part);
  manifest.config = {{"fraction", o.fraction}};
  manifest.outputs = {o.train_out, o.valid_out};
  manifest.write(o.train_out + ".manifest.json");
  std::cerr << fmt::format("{} train / {} validation sentences\n", train_part.size(),
                           valid_part.size());
  return 0;
}

struct SynthOptions {
  std::string grammar = "flights";
  std::size_t sentences = 500;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int run_synth(const SynthOptions& o) {
  Manifest manifest;
  manifest.command = "synth";
  manifest.seed = resolve_seed(o.seed, "synth");
  const Corpus corpus = generate_corpus(parse_grammar(o.grammar), o.sentences, *manifest.seed);
  write_conll(o.output, corpus);
  manifest.config = {{"grammar", o.grammar}, {"sentences", o.sentences}};
  manifest.outputs = {o.output};
  manifest.write(o.output + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BLSTM-LSTM encoder-decoder slot filling with attention or focus context"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  // Config keys live under a section per command, e.g. [train] epochs = 50.
  app.set_config("--config", "", "INI/TOML config file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "train a model (optionally grid-search the learning rate)");
  train_cmd->add_option("--train", train_opts.train_path, "training CoNLL file")->required();
  train_cmd->add_option("--valid", train_opts.valid_path, "validation CoNLL file");
  train_cmd->add_option("--split", train_opts.split,
                        "fraction of --train kept for training when no --valid is given");
  train_cmd->add_option("--mechanism", train_opts.mechanism, "focus or attention");
  train_cmd->add_option("--lr", train_opts.config.learning_rate, "learning rate");
  train_cmd->add_option("--grid", train_opts.grid, "grid-search these learning rates (default 0.004 0.008 0.016 0.032 0.04)")
      ->expected(0, -1);
  train_cmd->add_option("--epochs", train_opts.config.epochs, "training epochs");
  train_cmd->add_option("--dropout", train_opts.config.dropout, "dropout probability");
  train_cmd->add_option("--init-range", train_opts.config.init_range, "uniform init half-width");
  train_cmd->add_option("--seed", train_opts.seed, "random seed");
  train_cmd->add_option("--beam", train_opts.config.beam_size, "beam size for validation decoding");
  train_cmd->add_option("--emb-dim", train_opts.config.embedding_dim, "word embedding size");
  train_cmd->add_option("--hidden", train_opts.config.hidden_dim, "encoder hidden units per direction");
  train_cmd->add_option("--label-dim", train_opts.config.label_dim, "label embedding size");
  train_cmd->add_option("--decoder-dim", train_opts.config.decoder_dim, "decoder width (0: twice --hidden)");
  train_cmd->add_option("--scorer-dim", train_opts.config.scorer_dim, "attention scorer width (0: --hidden)");
  train_cmd->add_flag("--no-peephole{false}", train_opts.config.peephole, "drop LSTM peephole connections");
  train_cmd->add_option("--min-count", train_opts.min_count, "words seen fewer times become <unk>");
  train_cmd->add_flag("--repair-iob", train_opts.repair_iob, "repair dangling I- tags instead of rejecting them");
  train_cmd->add_option("--precision", train_opts.precision, "arithmetic precision in bits")
      ->check(CLI::IsMember({32, 64}));
  train_cmd->add_option("--jobs", train_opts.config.jobs, "parallel grid cells / decoding threads");
  train_cmd->add_option("--out", train_opts.out_dir, "output directory");

  EvalOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a gold CoNLL file");
  eval_cmd->add_option("--model", eval_opts.model, "checkpoint")->required();
  eval_cmd->add_option("--gold", eval_opts.gold, "gold CoNLL file")->required();
  eval_cmd->add_option("--compare", eval_opts.compare, "second checkpoint for a side-by-side table");
  eval_cmd->add_option("--beam", eval_opts.beam, "beam size");
  eval_cmd->add_option("--jobs", eval_opts.jobs, "decoding threads");
  eval_cmd->add_flag("--json", eval_opts.json_out, "print the machine-readable report");
  eval_cmd->add_option("--out", eval_opts.out_dir, "output directory");

  AugmentOptions aug_opts;
  auto* aug_cmd = app.add_subcommand("augment", "expand a corpus by random slot-value replacement");
  aug_cmd->add_option("--input", aug_opts.input, "CoNLL input")->required();
  aug_cmd->add_option("--output", aug_opts.output, "CoNLL output")->required();
  aug_cmd->add_option("--factor", aug_opts.factor, "output size as a multiple of the input");
  aug_cmd->add_option("--lexicon", aug_opts.lexicon, "slot<TAB>value file (default: harvest from input)");
  aug_cmd->add_option("--lexicon-out", aug_opts.lexicon_out, "write the lexicon used");
  aug_cmd->add_option("--seed", aug_opts.seed, "random seed");

  GradcheckOptions gc_opts;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of end-to-end gradients");
  gc_cmd->add_option("--seed", gc_opts.seed, "fixture seed");
  gc_cmd->add_option("--mechanism", gc_opts.mechanism, "focus, attention or both");
  gc_cmd->add_option("--dropout", gc_opts.dropout, "dropout probability (masks frozen)");
  gc_cmd->add_option("--step", gc_opts.step, "central-difference step");
  gc_cmd->add_option("--tolerance", gc_opts.tolerance, "maximum relative error");
  gc_cmd->add_option("--out", gc_opts.out_dir, "output directory");

  TagOptions tag_opts;
  auto* tag_cmd = app.add_subcommand("tag", "label a CoNLL or one-token-per-line file");
  tag_cmd->add_option("--model", tag_opts.model, "checkpoint")->required();
  tag_cmd->add_option("--input", tag_opts.input, "input file")->required();
  tag_cmd->add_option("--output", tag_opts.output, "output CoNLL file")->required();
  tag_cmd->add_option("--beam", tag_opts.beam, "beam size");
  tag_cmd->add_option("--jobs", tag_opts.jobs, "decoding threads");

  SplitOptions split_opts;
  auto* split_cmd = app.add_subcommand("split", "seeded train/validation split of a CoNLL file");
  split_cmd->add_option("--input", split_opts.input, "CoNLL input")->required();
  split_cmd->add_option("--train-out", split_opts.train_out, "training part")->required();
  split_cmd->add_option("--valid-out", split_opts.valid_out, "validation part")->required();
  split_cmd->add_option("--fraction", split_opts.fraction, "training fraction");
  split_cmd->add_option("--seed", split_opts.seed, "random seed");

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic flight-query corpus");
  synth_cmd->add_option("--grammar", synth_opts.grammar, "compact or flights");
  synth_cmd->add_option("--sentences", synth_opts.sentences, "number of sentences");
  synth_cmd->add_option("--seed", synth_opts.seed, "random seed");
  synth_cmd->add_option("--output", synth_opts.output, "CoNLL output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train_cmd) {
      train_opts.use_grid = train_cmd->count("--grid") > 0;
      return train_opts.precision == 32 ? run_train<float>(train_opts) : run_train<double>(train_opts);
    }
    if (*eval_cmd) return run_eval(eval_opts);
    if (*aug_cmd) return run_augment(aug_opts);
    if (*gc_cmd) return run_gradcheck(gc_opts);
    if (*tag_cmd) return run_tag(tag_opts);
    if (*split_cmd) return run_split(split_opts);
    if (*synth_cmd) return run_synth(synth_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
