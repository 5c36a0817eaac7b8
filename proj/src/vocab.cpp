#include "toklab/vocab.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "toklab/bpe.hpp"
#include "toklab/error.hpp"
#include "toklab/unicode.hpp"
#include "toklab/unigram.hpp"
#include "toklab/wordpiece.hpp"

namespace toklab {

using json = nlohmann::json;

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::bpe:
      return "bpe";
    case Algorithm::wordpiece:
      return "wpc";
    case Algorithm::unigram:
      return "uni";
  }
  throw InvariantError("unknown algorithm");
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "bpe") return Algorithm::bpe;
  if (name == "wpc" || name == "wordpiece") return Algorithm::wordpiece;
  if (name == "uni" || name == "unigram") return Algorithm::unigram;
  throw UsageError("unknown algorithm '" + std::string(name) + "' (expected bpe, wpc or uni)");
}

// --- Vocabulary -------------------------------------------------------------

bool Vocabulary::add(std::string token) {
  if (token.empty()) throw InvariantError("empty token");
  if (contains(token)) return false;
  std::string_view body = token;
  if (!marker_.empty() && body.size() > marker_.size() && body.starts_with(marker_)) {
    body.remove_prefix(marker_.size());
  }
  max_chars_ = std::max(max_chars_, unicode::length(body));
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  return true;
}

void Vocabulary::add_alphabet_char(const std::string& ch) {
  alphabet_.insert(ch);
  add(ch);
}

void Vocabulary::add_special(std::string token) {
  special_.insert(token);
  if (!contains(token)) {
    index_.emplace(token, tokens_.size());
    tokens_.push_back(std::move(token));
  }
}

std::optional<std::size_t> Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// --- TokenizerModel -----------------------------------------------------------

namespace {

std::string merge_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\0');
  key.append(right);
  return key;
}

}  // namespace

void TokenizerModel::build_indices() {
  merge_ranks_.clear();
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    if (merges_[i].rank != i) throw InvariantError("merge ranks must be contiguous from 0");
    merge_ranks_.emplace(merge_key(merges_[i].left, merges_[i].right), i);
  }
  lexicon_.clear();
  if (algo_ == Algorithm::unigram) {
    if (log_probs_.size() != vocab_.size()) {
      throw InvariantError("unigram lexicon needs one log-probability per token");
    }
    double min_lp = 0.0;
    for (std::size_t i = 0; i < log_probs_.size(); ++i) {
      if (!std::isfinite(log_probs_[i]) || log_probs_[i] > 0.0) {
        throw InvariantError("unigram log-probabilities must be finite and non-positive");
      }
      lexicon_.emplace(vocab_.tokens()[i], log_probs_[i]);
      min_lp = std::min(min_lp, log_probs_[i]);
    }
    fallback_log_prob_ = min_lp - 10.0;
  }
}

TokenizerModel TokenizerModel::from_merges(Algorithm algo, Vocabulary vocab,
                                           std::vector<MergeRule> merges, TrainingMetadata meta) {
  if (algo == Algorithm::unigram) throw InvariantError("unigram models have no merge list");
  TokenizerModel m;
  m.algo_ = algo;
  m.vocab_ = std::move(vocab);
  m.merges_ = std::move(merges);
  m.meta_ = std::move(meta);
  m.build_indices();
  return m;
}

TokenizerModel TokenizerModel::from_wordpiece_vocab(Vocabulary vocab, TrainingMetadata meta) {
  return from_merges(Algorithm::wordpiece, std::move(vocab), {}, std::move(meta));
}

TokenizerModel TokenizerModel::from_lexicon(Vocabulary vocab, std::vector<double> log_probs,
                                            TrainingMetadata meta) {
  TokenizerModel m;
  m.algo_ = Algorithm::unigram;
  m.vocab_ = std::move(vocab);
  m.log_probs_ = std::move(log_probs);
  m.meta_ = std::move(meta);
  m.build_indices();
  return m;
}

std::optional<std::size_t> TokenizerModel::merge_rank(std::string_view left,
                                                      std::string_view right) const {
  const auto it = merge_ranks_.find(merge_key(left, right));
  if (it == merge_ranks_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TokenizerModel::log_prob(std::string_view token) const {
  const auto it = lexicon_.find(token);
  if (it == lexicon_.end()) return std::nullopt;
  return it->second;
}

TokenizerModel truncate_to_size(const TokenizerModel& model, std::size_t size) {
  if (model.algorithm() == Algorithm::unigram) {
    throw UsageError("unigram vocabularies are not nested; train each size separately");
  }
  const Vocabulary& full = model.vocabulary();
  const std::string& marker = full.continuation_marker();
  Vocabulary vocab(marker);
  // Base entries (specials and single characters) precede every merge result.
  for (const auto& tok : full.tokens()) {
    if (full.special_tokens().contains(tok)) {
      vocab.add_special(tok);
      continue;
    }
    std::string_view body = tok;
    if (!marker.empty() && body.size() > marker.size() && body.starts_with(marker)) {
      body.remove_prefix(marker.size());
    }
    if (unicode::length(body) != 1) break;
    if (full.alphabet().contains(tok)) {
      vocab.add_alphabet_char(tok);
    } else {
      vocab.add(tok);
    }
  }
  if (size < vocab.size()) {
    throw UsageError("size " + std::to_string(size) + " is below the alphabet size " +
                     std::to_string(vocab.size()));
  }
  std::vector<MergeRule> merges;
  for (const auto& rule : model.merges()) {
    if (vocab.size() >= size) break;
    merges.push_back(rule);
    vocab.add(model.algorithm() == Algorithm::wordpiece
                  ? wordpiece_join(rule.left, rule.right, marker)
                  : rule.left + rule.right);
  }
  TrainingMetadata meta = model.metadata();
  meta.target_size = size;
  return TokenizerModel::from_merges(model.algorithm(), std::move(vocab), std::move(merges),
                                     std::move(meta));
}

// --- Encoding -----------------------------------------------------------------

Tokenization encode(const TokenizerModel& model, std::string_view sequence) {
  if (sequence.empty()) throw UsageError("cannot encode an empty sequence");
  switch (model.algorithm()) {
    case Algorithm::bpe:
      return encode_bpe(model, sequence);
    case Algorithm::wordpiece:
      return encode_wpc(model, sequence);
    case Algorithm::unigram:
      return encode_uni(model, sequence);
  }
  throw InvariantError("unknown algorithm");
}

std::string strip_markers(std::span<const std::string> tokens, std::string_view marker) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string_view tok = tokens[i];
    if (i > 0 && !marker.empty() && tok.size() > marker.size() && tok.starts_with(marker)) {
      tok.remove_prefix(marker.size());
    }
    out.append(tok);
  }
  return out;
}

std::string reconstruct(const TokenizerModel& model, const Tokenization& t) {
  return strip_markers(t.tokens, model.vocabulary().continuation_marker());
}

// --- Native model format --------------------------------------------------------

namespace {

constexpr std::string_view kFormatName = "toklab-model";

std::string checksum_of(const json& doc) {
  const std::string body = doc.dump();
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                          static_cast<uInt>(body.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return std::string("crc32:") + buf;
}

json metadata_to_json(const TrainingMetadata& meta) {
  const auto& o = meta.options;
  return json{{"origin", meta.origin},
              {"corpus_ids", meta.corpus_ids},
              {"languages", meta.languages},
              {"target_size", meta.target_size},
              {"lowercase", o.lowercase},
              {"seed", o.seed},
              {"max_token_chars", o.max_token_chars},
              {"unigram",
               {{"seed_factor", o.unigram.seed_factor},
                {"em_iters", o.unigram.em_iters},
                {"prune_fraction", o.unigram.prune_fraction},
                {"max_piece_chars", o.unigram.max_piece_chars}}}};
}

TrainingMetadata metadata_from_json(const json& j) {
  TrainingMetadata meta;
  meta.origin = j.at("origin").get<std::string>();
  meta.corpus_ids = j.at("corpus_ids").get<std::vector<std::string>>();
  meta.languages = j.at("languages").get<std::vector<std::string>>();
  meta.target_size = j.at("target_size").get<std::size_t>();
  auto& o = meta.options;
  o.lowercase = j.at("lowercase").get<bool>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.max_token_chars = j.at("max_token_chars").get<std::size_t>();
  const auto& u = j.at("unigram");
  o.unigram.seed_factor = u.at("seed_factor").get<double>();
  o.unigram.em_iters = u.at("em_iters").get<int>();
  o.unigram.prune_fraction = u.at("prune_fraction").get<double>();
  o.unigram.max_piece_chars = u.at("max_piece_chars").get<std::size_t>();
  return meta;
}

}  // namespace

std::string model_to_json(const TokenizerModel& model) {
  const Vocabulary& v = model.vocabulary();
  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kModelFormatVersion;
  doc["algorithm"] = algorithm_name(model.algorithm());
  doc["continuation_marker"] = v.continuation_marker();
  doc["tokens"] = v.tokens();
  doc["alphabet"] = v.alphabet();
  doc["special_tokens"] = v.special_tokens();
  json merges = json::array();
  for (const auto& m : model.merges()) merges.push_back({m.left, m.right});
  doc["merges"] = std::move(merges);
  doc["scores"] = model.log_probs();
  doc["metadata"] = metadata_to_json(model.metadata());
  doc["checksum"] = checksum_of(doc);
  return doc.dump(1);
}

TokenizerModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    throw ModelFormatError("model file is truncated or corrupt (checksum cannot be verified)");
  }
  try {
    if (doc.value("format", "") != kFormatName) throw ModelFormatError("not a toklab model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("model format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kModelFormatVersion) + ")");
    }
    const std::string stored = doc.at("checksum").get<std::string>();
    doc.erase("checksum");
    if (checksum_of(doc) != stored) throw ModelFormatError("model checksum mismatch");

    const Algorithm algo = parse_algorithm(doc.at("algorithm").get<std::string>());
    Vocabulary vocab(doc.at("continuation_marker").get<std::string>());
    const auto alphabet = doc.at("alphabet").get<std::set<std::string>>();
    const auto specials = doc.at("special_tokens").get<std::set<std::string>>();
    for (auto tok : doc.at("tokens").get<std::vector<std::string>>()) {
      if (specials.contains(tok)) {
        vocab.add_special(std::move(tok));
      } else if (alphabet.contains(tok)) {
        vocab.add_alphabet_char(tok);
      } else if (!vocab.add(std::move(tok))) {
        throw ModelFormatError("duplicate token in model file");
      }
    }
    TrainingMetadata meta = metadata_from_json(doc.at("metadata"));
    if (algo == Algorithm::unigram) {
      return TokenizerModel::from_lexicon(std::move(vocab),
                                          doc.at("scores").get<std::vector<double>>(),
                                          std::move(meta));
    }
    std::vector<MergeRule> merges;
    for (const auto& pair : doc.at("merges")) {
      merges.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>(),
                        merges.size()});
    }
    return TokenizerModel::from_merges(algo, std::move(vocab), std::move(merges),
                                       std::move(meta));
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TokenizerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << model_to_json(model) << '\n';
  if (!out) throw DataError("failed writing model file: " + path.string());
}

TokenizerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

// --- External vocabularies ----------------------------------------------------------

ExternalFormat parse_external_format(std::string_view name) {
  if (name == "wordpiece-list") return ExternalFormat::wordpiece_list;
  if (name == "bpe-merges") return ExternalFormat::bpe_merges;
  throw UsageError("unknown vocabulary format '" + std::string(name) +
                   "' (expected wordpiece-list or bpe-merges)");
}

namespace {

bool is_special_token(std::string_view tok) {
  return tok.size() > 2 && ((tok.front() == '[' && tok.back() == ']') ||
                            (tok.front() == '<' && tok.back() == '>'));
}

std::string line_ref(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

}  // namespace

TokenizerModel import_external_vocab(const std::filesystem::path& path, ExternalFormat format,
                                     bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocabulary file: " + path.string());

  TrainingMetadata meta;
  meta.corpus_ids = {path.filename().string()};
  meta.options.lowercase = lowercase;
  std::string line;
  std::size_t line_no = 0;

  if (format == ExternalFormat::wordpiece_list) {
    meta.origin = "imported:wordpiece-list";
    Vocabulary vocab{std::string(kWordPieceMarker)};
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || !unicode::is_valid_utf8(line) || unicode::contains_whitespace(line)) {
        throw DataError("malformed vocabulary entry at " + line_ref(path, line_no));
      }
      if (is_special_token(line)) {
        vocab.add_special(line);
      } else if (unicode::length(line) == 1) {
        vocab.add_alphabet_char(line);
      } else if (!vocab.add(line)) {
        throw DataError("duplicate vocabulary entry at " + line_ref(path, line_no));
      }
    }
    if (vocab.size() == 0) throw DataError("empty vocabulary file: " + path.string());
    meta.target_size = vocab.size();
    return TokenizerModel::from_wordpiece_vocab(std::move(vocab), std::move(meta));
  }

  meta.origin = "imported:bpe-merges";
  std::vector<MergeRule> merges;
  std::set<std::string> alphabet;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("#version")) continue;
    const auto space = line.find(' ');
    if (!unicode::is_valid_utf8(line) || space == std::string::npos || space == 0 ||
        space + 1 >= line.size() || line.find(' ', space + 1) != std::string::npos) {
      throw DataError("malformed merge at " + line_ref(path, line_no) +
                      " (expected \"left right\")");
    }
    MergeRule rule{line.substr(0, space), line.substr(space + 1), merges.size()};
    for (const auto& side : {rule.left, rule.right}) {
      for (auto& ch : unicode::chars(side)) alphabet.insert(std::move(ch));
    }
    merges.push_back(std::move(rule));
  }
  Vocabulary vocab{std::string()};
  for (const auto& ch : alphabet) vocab.add_alphabet_char(ch);
  for (const auto& m : merges) vocab.add(m.left + m.right);
  meta.target_size = vocab.size();
  return TokenizerModel::from_merges(Algorithm::bpe, std::move(vocab), std::move(merges),
                                     std::move(meta));
}

void export_vocab(const TokenizerModel& model, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path.string());
    for (const auto& tok : model.vocabulary().tokens()) out << tok << '\n';
  }
  if (model.algorithm() == Algorithm::bpe) {
    auto merges_path = path;
    merges_path += ".merges";
    std::ofstream out(merges_path, std::ios::binary);
    if (!out) throw DataError("cannot write merges file: " + merges_path.string());
    out << "#version: toklab\n";
    for (const auto& m : model.merges()) out << m.left << ' ' << m.right << '\n';
  }
}

}  // namespace toklab
