#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "toklab/error.hpp"
#include "toklab/evalpipe.hpp"
#include "toklab/textio.hpp"
#include "toklab/unicode.hpp"
#include "toklab/version.hpp"
#include "toklab/vocab.hpp"

namespace toklab::cli {
namespace {

namespace fs = std::filesystem;

struct Columns {
  StimulusSchema schema;

  void attach(CLI::App* sub) {
    sub->add_option("--col-seq", schema.sequence, "Column holding the letter string")
        ->capture_default_str();
    sub->add_option("--col-word", schema.is_word, "Column holding the word/non-word label")
        ->capture_default_str();
    sub->add_option("--col-rt", schema.rt, "Column holding mean response time (ms)")
        ->capture_default_str();
    sub->add_option("--col-acc", schema.accuracy, "Column holding mean accuracy")
        ->capture_default_str();
  }
};

struct TrainFlags {
  std::string algo = "wpc";
  std::vector<std::string> corpora;
  std::optional<std::size_t> limit;
  bool lowercase = true;
  std::size_t max_token_chars = 32;
  double seed_factor = 10.0;
  int em_iters = 2;
  double prune_fraction = 0.25;

  void attach(CLI::App* sub, bool require_corpus) {
    sub->add_option("--algo", algo, "bpe, wpc or uni")
        ->check(CLI::IsMember({"bpe", "wpc", "uni"}))
        ->capture_default_str();
    auto* corpus = sub->add_option("--corpus", corpora, "Training corpus (repeatable)");
    if (require_corpus) corpus->required();
    sub->add_option("--limit", limit, "Read at most this many sentences per corpus");
    sub->add_flag("--lowercase,!--no-lowercase", lowercase, "Lowercase text (default on)");
    sub->add_option("--max-token-chars", max_token_chars)->capture_default_str();
    sub->add_option("--seed-factor", seed_factor, "UnigramLM seed lexicon factor")
        ->capture_default_str();
    sub->add_option("--em-iters", em_iters, "UnigramLM EM rounds per prune step")
        ->capture_default_str();
    sub->add_option("--prune-fraction", prune_fraction, "UnigramLM prune share per step")
        ->capture_default_str();
  }

  TrainingOptions options(std::uint64_t seed) const {
    TrainingOptions o;
    o.lowercase = lowercase;
    o.seed = seed;
    o.max_token_chars = max_token_chars;
    o.unigram.seed_factor = seed_factor;
    o.unigram.em_iters = em_iters;
    o.unigram.prune_fraction = prune_fraction;
    return o;
  }

  std::vector<Corpus> load() const {
    std::vector<Corpus> out;
    for (const auto& path : corpora) out.push_back(load_corpus(path, limit, {lowercase}));
    return out;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

fs::path with_suffix(const fs::path& path, std::string_view suffix) {
  fs::path p = path;
  p += suffix;
  return p;
}

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<Metric> out;
  for (const auto& n : names) out.push_back(parse_metric(n));
  return out;
}

std::vector<Signal> parse_signals(const std::vector<std::string>& names) {
  std::vector<Signal> out;
  for (const auto& n : names) out.push_back(parse_signal(n));
  return out;
}

/// Model labels: file stems, disambiguated by position when they collide.
std::vector<std::string> model_ids(const std::vector<std::string>& paths) {
  std::map<std::string, int> seen;
  for (const auto& p : paths) ++seen[fs::path(p).stem().string()];
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string stem = fs::path(paths[i]).stem().string();
    ids.push_back(seen[stem] > 1 ? stem + "#" + std::to_string(i + 1) : stem);
  }
  return ids;
}

std::vector<Stimulus> load_stimuli(const std::string& path, const Columns& cols, bool lowercase,
                                   const std::vector<double>& rt_percentiles, std::ostream& err) {
  auto data = load_lexical_decision(path, cols.schema, {lowercase});
  if (data.rows_dropped > 0) {
    err << "toklab: dropped " << data.rows_dropped << " of " << data.rows_read
        << " rows from " << path << '\n';
  }
  if (!rt_percentiles.empty()) {
    const auto bounds = rt_percentile_bounds(data.stimuli, rt_percentiles[0], rt_percentiles[1]);
    const std::size_t before = data.stimuli.size();
    data.stimuli = filter_rt_range(data.stimuli, bounds);
    err << "toklab: RT filter [" << bounds.low_ms << ", " << bounds.high_ms << "] ms kept "
        << data.stimuli.size() << " of " << before << " stimuli\n";
  }
  return data.stimuli;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"toklab: train subword tokenizers and score them against lexical-decision data",
               "toklab"};
  app.set_version_flag("--version", std::string("toklab ") + std::string(kToolVersion) +
                                        " (model format " + std::to_string(kModelFormatVersion) +
                                        ")");
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::uint64_t seed = 13;
  std::size_t threads = 1;
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (1 = bit-exact baseline)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.fallthrough();

  // train
  auto* train = app.add_subcommand("train", "Train a tokenizer model");
  TrainFlags train_flags;
  std::size_t vocab_size = 0;
  std::string train_out;
  train_flags.attach(train, true);
  train->add_option("--vocab-size", vocab_size, "Target vocabulary size")->required();
  train->add_option("--out", train_out, "Model file to write")->required();

  // encode
  auto* enc = app.add_subcommand("encode", "Tokenize words with a model");
  std::string enc_model;
  std::vector<std::string> enc_words;
  enc->add_option("--model", enc_model)->required()->check(CLI::ExistingFile);
  enc->add_option("words", enc_words, "Words to encode")->required();

  // chunk
  auto* chunk = app.add_subcommand("chunk", "Per-stimulus chunkability table");
  std::string chunk_model, chunk_input, chunk_out, chunk_col = "sequence";
  chunk->add_option("--model", chunk_model)->required()->check(CLI::ExistingFile);
  chunk->add_option("--input", chunk_input, "Delimited file with a header")->required();
  chunk->add_option("--out", chunk_out)->required();
  chunk->add_option("--col-seq", chunk_col)->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Correlate tokenizer metrics with human responses");
  std::vector<std::string> eval_models;
  std::string eval_data, eval_out, eval_metrics_out, eval_dataset = "dataset",
                                                     eval_corr = "pearson";
  std::vector<std::string> eval_metric_names{"chunkability", "num-tokens", "length"};
  std::vector<std::string> eval_signal_names{"rt", "acc"};
  std::vector<double> eval_pct;
  Columns eval_cols;
  eval->add_option("--model", eval_models, "Model file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "Lexical-decision file")->required();
  eval->add_option("--out", eval_out, "Report JSON (a CSV mirror is written next to it)")
      ->required();
  eval->add_option("--metrics-out", eval_metrics_out,
                   "Per-stimulus metrics CSV (default <out>.stimuli.csv)");
  eval->add_option("--metrics", eval_metric_names)->delimiter(',')->capture_default_str();
  eval->add_option("--signals", eval_signal_names)->delimiter(',')->capture_default_str();
  eval->add_option("--dataset", eval_dataset)->capture_default_str();
  eval->add_option("--correlation", eval_corr)
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();
  eval->add_option("--rt-percentiles", eval_pct, "Keep RTs within these percentiles, e.g. 1,99")
      ->delimiter(',')
      ->expected(2);
  eval_cols.attach(eval);

  // report
  auto* rep = app.add_subcommand("report", "Rebuild a report from a per-stimulus metrics file");
  std::string rep_in, rep_out, rep_dataset = "dataset", rep_corr = "pearson";
  std::vector<std::string> rep_metric_names{"chunkability", "num-tokens", "length"};
  std::vector<std::string> rep_signal_names{"rt", "acc"};
  rep->add_option("--metrics-file", rep_in)->required()->check(CLI::ExistingFile);
  rep->add_option("--out", rep_out)->required();
  rep->add_option("--metrics", rep_metric_names)->delimiter(',')->capture_default_str();
  rep->add_option("--signals", rep_signal_names)->delimiter(',')->capture_default_str();
  rep->add_option("--dataset", rep_dataset)->capture_default_str();
  rep->add_option("--correlation", rep_corr)
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Correlation as a function of vocabulary size");
  TrainFlags sweep_flags;
  std::vector<std::size_t> sweep_sizes = default_size_grid();
  std::string sweep_data, sweep_out, sweep_cache, sweep_dataset = "dataset";
  std::vector<std::string> sweep_metric_names{"chunkability", "num-tokens", "length"};
  std::vector<std::string> sweep_signal_names{"rt", "acc"};
  Columns sweep_cols;
  sweep_flags.attach(sweep, true);
  sweep->add_option("--sizes", sweep_sizes)->delimiter(',')->capture_default_str();
  sweep->add_option("--data", sweep_data)->required();
  sweep->add_option("--out", sweep_out, "Sweep JSON (stdout if omitted)");
  sweep->add_option("--cache-dir", sweep_cache, "Directory for trained models");
  sweep->add_option("--metrics", sweep_metric_names)->delimiter(',')->capture_default_str();
  sweep->add_option("--signals", sweep_signal_names)->delimiter(',')->capture_default_str();
  sweep->add_option("--dataset", sweep_dataset)->capture_default_str();
  sweep_cols.attach(sweep);

  // morph
  auto* morph = app.add_subcommand("morph", "Derivational morpheme coverage of vocabularies");
  std::vector<std::string> morph_models;
  std::string morph_file, morph_out, morph_lang = "und";
  double min_share = 0.001;
  morph->add_option("--model", morph_models, "Model file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  morph->add_option("--morphemes", morph_file, "word<TAB>morphemes<TAB>tags")->required();
  morph->add_option("--out", morph_out, "Coverage CSV")->required();
  morph->add_option("--min-share", min_share)->capture_default_str();
  morph->add_option("--language", morph_lang)->capture_default_str();

  // regress
  auto* reg = app.add_subcommand("regress", "Chunkability vs. frequency regression on words");
  std::string reg_model, reg_data, reg_freq, reg_out;
  Columns reg_cols;
  reg->add_option("--model", reg_model)->required()->check(CLI::ExistingFile);
  reg->add_option("--data", reg_data)->required();
  reg->add_option("--freq", reg_freq, "word<TAB>Zipf score")->required();
  reg->add_option("--out", reg_out, "Regression JSON (stdout if omitted)");
  reg_cols.attach(reg);

  // import / export
  auto* imp = app.add_subcommand("import", "Wrap an external vocabulary file as a model");
  std::string imp_format, imp_vocab, imp_out;
  bool imp_lower = true;
  imp->add_option("--format", imp_format)
      ->required()
      ->check(CLI::IsMember({"wordpiece-list", "bpe-merges"}));
  imp->add_option("--vocab", imp_vocab)->required();
  imp->add_option("--out", imp_out)->required();
  imp->add_flag("--lowercase,!--no-lowercase", imp_lower, "Stimuli lowercased for this model");

  auto* exp = app.add_subcommand("export", "Write a model's vocabulary as a token list");
  std::string exp_model, exp_out;
  exp->add_option("--model", exp_model)->required()->check(CLI::ExistingFile);
  exp->add_option("--out", exp_out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Resolved configuration of the active command, archived next to each output.
  const auto snapshot = [&](const fs::path& output) {
    CLI::App* sub = app.get_subcommands().front();
    std::ostringstream ini;
    ini << "# toklab " << kToolVersion << " (model format " << kModelFormatVersion << ")\n";
    ini << "seed=" << seed << "\nthreads=" << threads << "\n[" << sub->get_name() << "]\n";
    for (const CLI::Option* opt : sub->get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help") continue;
      std::string value;
      if (name == "lowercase") {
        const bool on = sub == train ? train_flags.lowercase
                        : sub == sweep ? sweep_flags.lowercase
                                       : imp_lower;
        value = on ? "true" : "false";
      } else if (opt->count() > 0) {
        for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = opt->get_default_str();
      }
      ini << name << '=' << value << '\n';
    }
    write_text(with_suffix(output, ".config.ini"), ini.str());
  };

  try {
    if (train->parsed()) {
      const auto corpora = train_flags.load();
      const auto model = train_model(parse_algorithm(train_flags.algo), corpora, vocab_size,
                                     train_flags.options(seed));
      save_model(model, train_out);
      snapshot(train_out);
      err << "toklab: wrote " << train_out << " (" << model.vocabulary().size() << " tokens)\n";
    } else if (enc->parsed()) {
      const auto model = load_model(enc_model);
      const bool lower = model.metadata().options.lowercase;
      out << std::setprecision(6);
      for (const auto& w : enc_words) {
        const auto t = encode(model, unicode::normalize(w, lower));
        for (std::size_t i = 0; i < t.tokens.size(); ++i) out << (i ? " " : "") << t.tokens[i];
        out << "\tk=" << t.k << "\tn=" << t.n << "\tchunkability=" << chunkability(t) << '\n';
      }
    } else if (chunk->parsed()) {
      const auto model = load_model(chunk_model);
      const auto seqs = load_sequences(chunk_input, chunk_col,
                                       {model.metadata().options.lowercase});
      std::ostringstream csv;
      csv << std::setprecision(17);
      csv << "stimulus,k,n,chunkability,num_tokens,char_length,tokens\n";
      for (const auto& s : seqs) {
        const auto t = encode(model, s);
        std::string joined;
        for (const auto& piece : t.tokens) joined += (joined.empty() ? "" : " ") + piece;
        csv << s << ',' << t.k << ',' << t.n << ',' << chunkability(t) << ',' << num_tokens(t)
            << ',' << char_length(s) << ',' << joined << '\n';
      }
      write_text(chunk_out, csv.str());
      snapshot(chunk_out);
    } else if (eval->parsed()) {
      std::vector<TokenizerModel> models;
      for (const auto& p : eval_models) models.push_back(load_model(p));
      const auto ids = model_ids(eval_models);
      std::vector<NamedModel> named;
      for (std::size_t i = 0; i < models.size(); ++i) named.push_back({ids[i], &models[i]});
      const auto stimuli = load_stimuli(eval_data, eval_cols,
                                        models.front().metadata().options.lowercase, eval_pct, err);
      EvalOptions opts;
      opts.dataset = eval_dataset;
      opts.metrics = parse_metrics(eval_metric_names);
      opts.signals = parse_signals(eval_signal_names);
      opts.method = parse_correlation_method(eval_corr);
      opts.threads = threads;
      StimulusMetrics metrics;
      const auto report = run_cognitive_eval(named, stimuli, opts, &metrics);
      const fs::path metrics_path =
          eval_metrics_out.empty() ? with_suffix(eval_out, ".stimuli.csv") : fs::path(eval_metrics_out);
      if (metrics_path.has_parent_path()) fs::create_directories(metrics_path.parent_path());
      write_stimulus_metrics(metrics_path, metrics);
      write_text(eval_out, report_to_json(report));
      write_text(with_suffix(eval_out, ".csv"), report_to_csv(report));
      snapshot(eval_out);
    } else if (rep->parsed()) {
      EvalOptions opts;
      opts.dataset = rep_dataset;
      opts.metrics = parse_metrics(rep_metric_names);
      opts.signals = parse_signals(rep_signal_names);
      opts.method = parse_correlation_method(rep_corr);
      const auto report = build_report(read_stimulus_metrics(rep_in), opts);
      write_text(rep_out, report_to_json(report));
      write_text(with_suffix(rep_out, ".csv"), report_to_csv(report));
      snapshot(rep_out);
    } else if (sweep->parsed()) {
      const auto corpora = sweep_flags.load();
      SweepConfig config;
      config.algorithm = parse_algorithm(sweep_flags.algo);
      config.options = sweep_flags.options(seed);
      if (!sweep_cache.empty()) config.cache_dir = sweep_cache;
      const auto stimuli = load_stimuli(sweep_data, sweep_cols, sweep_flags.lowercase, {}, err);
      EvalOptions opts;
      opts.dataset = sweep_dataset;
      opts.metrics = parse_metrics(sweep_metric_names);
      opts.signals = parse_signals(sweep_signal_names);
      opts.threads = threads;
      const auto result = run_sweep(config, corpora, sweep_sizes, stimuli, opts);
      if (sweep_out.empty()) {
        out << sweep_to_json(result);
      } else {
        write_text(sweep_out, sweep_to_json(result));
        snapshot(sweep_out);
      }
      if (result.error) {
        err << "toklab: sweep incomplete: " << *result.error << '\n';
        return kExitData;
      }
    } else if (morph->parsed()) {
      std::vector<TokenizerModel> models;
      for (const auto& p : morph_models) models.push_back(load_model(p));
      const auto ids = model_ids(morph_models);
      std::vector<NamedModel> named;
      for (std::size_t i = 0; i < models.size(); ++i) named.push_back({ids[i], &models[i]});
      const auto inventory = load_morpheme_inventory(
          morph_file, min_share, {models.front().metadata().options.lowercase}, morph_lang);
      err << "toklab: " << inventory.morphemes.size() << " derivational morphemes from "
          << inventory.source_row_count << " annotations\n";
      write_text(morph_out, coverage_to_csv(coverage_curve(named, inventory)));
      snapshot(morph_out);
    } else if (reg->parsed()) {
      const auto model = load_model(reg_model);
      const bool lower = model.metadata().options.lowercase;
      const auto stimuli = load_stimuli(reg_data, reg_cols, lower, {}, err);
      const auto freq = load_frequency_table(reg_freq, {lower});
      const auto report = run_regression(stimuli, model, freq, seed);
      if (report.words_dropped > 0) {
        err << "toklab: " << report.words_dropped << " words lack a frequency entry\n";
      }
      if (reg_out.empty()) {
        out << regression_to_json(report);
      } else {
        write_text(reg_out, regression_to_json(report));
        snapshot(reg_out);
      }
    } else if (imp->parsed()) {
      const auto model = import_external_vocab(imp_vocab, parse_external_format(imp_format),
                                               imp_lower);
      save_model(model, imp_out);
      snapshot(imp_out);
    } else if (exp->parsed()) {
      export_vocab(load_model(exp_model), exp_out);
    }
  } catch (const UsageError& e) {
    err << "toklab: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "toklab: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "toklab: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvariantError& e) {
    err << "toklab: internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "toklab: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace toklab::cli
