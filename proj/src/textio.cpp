#include "toklab/textio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "toklab/error.hpp"
#include "toklab/log.hpp"
#include "toklab/unicode.hpp"

namespace toklab {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  return in;
}

// getline that strips a trailing CR and a leading BOM on the first line.
bool read_line(std::istream& in, std::string& line, std::size_t line_no) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return true;
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<bool> parse_word_flag(std::string_view text) {
  std::string v = unicode::lowercase(unicode::trim(text));
  if (v == "1" || v == "true" || v == "yes" || v == "y" || v == "word" || v == "w") return true;
  if (v == "0" || v == "false" || v == "no" || v == "n" || v == "nonword" ||
      v == "non-word" || v == "nw") {
    return false;
  }
  return std::nullopt;
}

struct DelimitedHeader {
  char delimiter = ',';
  std::vector<std::string> columns;

  std::size_t index_of(std::string_view name, const std::filesystem::path& path) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
      throw DataError("missing column '" + std::string(name) + "' in " + path.string());
    }
    return static_cast<std::size_t>(it - columns.begin());
  }
};

DelimitedHeader read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!read_line(in, line, 1)) throw DataError("missing header row in " + path.string());
  DelimitedHeader header;
  header.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
  for (auto& col : split_delimited(line, header.delimiter)) {
    header.columns.push_back(unicode::trim(col));
  }
  return header;
}

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

Corpus load_corpus(const std::filesystem::path& path, std::optional<std::size_t> limit,
                   const NormalizationOptions& norm, std::string language) {
  auto in = open_input(path);
  Corpus corpus;
  corpus.source_id = path.filename().string();
  corpus.language = std::move(language);
  std::string line;
  std::size_t line_no = 0;
  while ((!limit || corpus.sentences.size() < *limit) && read_line(in, line, ++line_no)) {
    if (!unicode::is_valid_utf8(line)) {
      throw DataError("invalid UTF-8 at " + where(path, line_no));
    }
    std::string text = unicode::trim(line);
    if (text.empty()) continue;
    corpus.sentences.push_back(unicode::normalize(text, norm.lowercase));
  }
  if (corpus.sentences.empty()) throw DataError("empty corpus: " + path.string());
  return corpus;
}

LexicalDecisionData load_lexical_decision(const std::filesystem::path& path,
                                          const StimulusSchema& schema,
                                          const NormalizationOptions& norm) {
  auto in = open_input(path);
  const DelimitedHeader header = read_header(in, path);
  const std::size_t seq_col = header.index_of(schema.sequence, path);
  const std::size_t word_col = header.index_of(schema.is_word, path);
  const std::size_t rt_col = header.index_of(schema.rt, path);
  const std::size_t acc_col = header.index_of(schema.accuracy, path);
  const std::size_t needed = std::max({seq_col, word_col, rt_col, acc_col}) + 1;

  LexicalDecisionData data;
  std::string line;
  std::size_t line_no = 1;
  while (read_line(in, line, ++line_no)) {
    if (unicode::trim(line).empty()) continue;
    ++data.rows_read;
    if (!unicode::is_valid_utf8(line)) {
      ++data.rows_dropped;
      continue;
    }
    const auto fields = split_delimited(line, header.delimiter);
    if (fields.size() < needed) {
      ++data.rows_dropped;
      continue;
    }
    const std::string seq = unicode::trim(fields[seq_col]);
    const auto is_word = parse_word_flag(fields[word_col]);
    const auto rt = parse_number(fields[rt_col]);
    const auto acc = parse_number(fields[acc_col]);
    if (seq.empty() || unicode::contains_whitespace(seq) || !is_word || !rt || !acc ||
        *rt <= 0.0 || *acc < 0.0 || *acc > 1.0) {
      ++data.rows_dropped;
      continue;
    }
    data.stimuli.push_back({unicode::normalize(seq, norm.lowercase), *is_word, *rt, *acc});
  }
  if (data.stimuli.empty()) {
    throw DataError("zero surviving rows in " + path.string());
  }
  return data;
}

void save_lexical_decision(const std::filesystem::path& path,
                           const std::vector<Stimulus>& stimuli,
                           const StimulusSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << quote_csv(schema.sequence) << ',' << quote_csv(schema.is_word) << ','
      << quote_csv(schema.rt) << ',' << quote_csv(schema.accuracy) << '\n';
  out << std::setprecision(17);
  for (const auto& s : stimuli) {
    out << quote_csv(s.sequence) << ',' << (s.is_word ? 1 : 0) << ',' << s.rt_ms << ','
        << s.accuracy << '\n';
  }
}

std::vector<std::string> load_sequences(const std::filesystem::path& path,
                                        std::string_view column,
                                        const NormalizationOptions& norm) {
  auto in = open_input(path);
  const DelimitedHeader header = read_header(in, path);
  const std::size_t col = header.index_of(column, path);
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 1;
  while (read_line(in, line, ++line_no)) {
    if (unicode::trim(line).empty()) continue;
    if (!unicode::is_valid_utf8(line)) {
      throw DataError("invalid UTF-8 at " + where(path, line_no));
    }
    const auto fields = split_delimited(line, header.delimiter);
    if (fields.size() <= col) throw DataError("short row at " + where(path, line_no));
    std::string seq = unicode::trim(fields[col]);
    if (seq.empty()) throw DataError("empty sequence at " + where(path, line_no));
    out.push_back(unicode::normalize(seq, norm.lowercase));
  }
  if (out.empty()) throw DataError("zero surviving rows in " + path.string());
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw DataError("percentile of empty sample");
  if (percentile < 0.0 || percentile > 100.0) {
    throw UsageError("percentile must lie in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Guard against P*N/100 landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(percentile * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

RtBounds rt_percentile_bounds(const std::vector<Stimulus>& stimuli, double low, double high) {
  if (stimuli.empty()) throw DataError("cannot filter an empty stimulus list");
  if (!(low >= 0.0 && low < high && high <= 100.0)) {
    throw UsageError("percentile bounds must satisfy 0 <= low < high <= 100");
  }
  std::vector<double> rts;
  rts.reserve(stimuli.size());
  for (const auto& s : stimuli) rts.push_back(s.rt_ms);
  return {nearest_rank_percentile(rts, low), nearest_rank_percentile(rts, high)};
}

std::vector<Stimulus> filter_rt_range(const std::vector<Stimulus>& stimuli, RtBounds bounds) {
  std::vector<Stimulus> out;
  std::copy_if(stimuli.begin(), stimuli.end(), std::back_inserter(out), [&](const Stimulus& s) {
    return s.rt_ms >= bounds.low_ms && s.rt_ms <= bounds.high_ms;
  });
  return out;
}

std::vector<Stimulus> filter_rt_percentiles(const std::vector<Stimulus>& stimuli, double low,
                                            double high) {
  return filter_rt_range(stimuli, rt_percentile_bounds(stimuli, low, high));
}

std::optional<double> FrequencyTable::lookup(std::string_view word) const {
  const auto it = scores_.find(word);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

FrequencyTable load_frequency_table(const std::filesystem::path& path,
                                    const NormalizationOptions& norm) {
  auto in = open_input(path);
  FrequencyTable::ScoreMap scores;
  std::size_t duplicates = 0;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line, ++line_no)) {
    if (unicode::trim(line).empty()) continue;
    if (!unicode::is_valid_utf8(line)) {
      throw DataError("invalid UTF-8 at " + where(path, line_no));
    }
    const auto fields = split_delimited(line, '\t');
    if (fields.size() != 2) {
      throw DataError("expected word<TAB>score at " + where(path, line_no));
    }
    const auto score = parse_number(fields[1]);
    if (!score) throw DataError("malformed score at " + where(path, line_no));
    std::string word = unicode::normalize(unicode::trim(fields[0]), norm.lowercase);
    auto [it, inserted] = scores.insert_or_assign(std::move(word), *score);
    if (!inserted) {
      ++duplicates;
      log::warn("duplicate frequency entry '" + it->first + "' at " + where(path, line_no) +
                "; last occurrence wins");
    }
  }
  return FrequencyTable(std::move(scores), duplicates);
}

MorphemeInventory load_morpheme_inventory(const std::filesystem::path& path, double min_share,
                                          const NormalizationOptions& norm,
                                          std::string language) {
  if (!(min_share >= 0.0 && min_share <= 1.0)) throw UsageError("min_share must lie in [0, 1]");
  auto in = open_input(path);
  std::unordered_map<std::string, std::size_t> row_counts;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line, ++line_no)) {
    if (unicode::trim(line).empty()) continue;
    if (!unicode::is_valid_utf8(line)) {
      throw DataError("invalid UTF-8 at " + where(path, line_no));
    }
    const auto fields = split_delimited(line, '\t');
    if (fields.size() != 3) {
      throw DataError("expected word<TAB>morphemes<TAB>tags at " + where(path, line_no));
    }
    const auto morphs = split_delimited(fields[1], '|');
    const auto tags = split_delimited(fields[2], '|');
    if (morphs.size() != tags.size()) {
      throw DataError("morpheme count differs from tag count at " + where(path, line_no));
    }
    ++rows;
    std::set<std::string> in_row;
    for (std::size_t i = 0; i < morphs.size(); ++i) {
      const std::string tag = unicode::trim(tags[i]);
      if (tag != "prefix" && tag != "root" && tag != "suffix") {
        throw DataError("unknown morpheme tag '" + tag + "' at " + where(path, line_no));
      }
      if (tag == "root") continue;
      std::string m = unicode::normalize(unicode::trim(morphs[i]), norm.lowercase);
      if (!m.empty()) in_row.insert(std::move(m));
    }
    for (const auto& m : in_row) ++row_counts[m];
  }

  MorphemeInventory inv;
  inv.language = std::move(language);
  inv.source_row_count = rows;
  inv.min_share = min_share;
  for (const auto& [m, count] : row_counts) {
    if (static_cast<double>(count) >= min_share * static_cast<double>(rows)) {
      inv.morphemes.insert(m);
    }
  }
  return inv;
}

}  // namespace toklab

namespace toklab {

std::vector<std::pair<std::string, std::uint64_t>> count_words(std::span<const Corpus> corpora) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& corpus : corpora) {
    for (const auto& sentence : corpus.sentences) {
      for (auto& word : unicode::pretokenize(sentence)) ++counts[std::move(word)];
    }
  }
  return {counts.begin(), counts.end()};
}

}  // namespace toklab
