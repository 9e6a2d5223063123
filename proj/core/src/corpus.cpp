#include "smoothreg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "smoothreg/errors.hpp"

namespace smoothreg {

Vocabulary::Vocabulary(std::vector<std::string> symbols) {
  for (const auto& s : symbols) {
    if (contains(s)) throw InputError("duplicate vocabulary symbol '" + s + "'");
    add(s);
  }
}

SymbolId Vocabulary::add(std::string_view token) {
  if (token.empty()) throw InputError("empty token");
  if (token == kBosToken || token == kEosToken) {
    throw InputError("token '" + std::string(token) + "' is reserved for sentinels");
  }
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<SymbolId>(symbols_.size());
  symbols_.emplace_back(token);
  ids_.emplace(symbols_.back(), id);
  return id;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

SymbolId Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) throw InputError("unknown token '" + std::string(token) + "'");
  return it->second;
}

const std::string& Vocabulary::symbol(SymbolId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw ParameterError("symbol id " + std::to_string(id) + " is not a corpus symbol");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::size_t Vocabulary::outcome_of(SymbolId id) const {
  if (id == eos_id()) return eos_outcome();
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw ParameterError("id " + std::to_string(id) + " is not an outcome");
  }
  return static_cast<std::size_t>(id);
}

SymbolId Vocabulary::id_of_outcome(std::size_t outcome) const {
  if (outcome == eos_outcome()) return eos_id();
  if (outcome > eos_outcome()) throw ParameterError("outcome out of range");
  return static_cast<SymbolId>(outcome);
}

std::string Vocabulary::render(SymbolId id) const {
  if (id == bos_id()) return std::string(kBosToken);
  if (id == eos_id()) return std::string(kEosToken);
  return symbol(id);
}

std::string Vocabulary::render_outcome(std::size_t outcome) const {
  return render(id_of_outcome(outcome));
}

std::string Vocabulary::render_history(std::span<const SymbolId> history) const {
  std::string out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += ' ';
    out += render(history[i]);
  }
  return out;
}

SymbolId Vocabulary::parse_rendered(std::string_view token) const {
  if (token == kBosToken) return bos_id();
  if (token == kEosToken) return eos_id();
  return id_of(token);
}

History Vocabulary::parse_history(std::string_view text) const {
  History h;
  for (const auto& tok : tokenize(text)) h.push_back(parse_rendered(tok));
  return h;
}

std::int64_t Corpus::emission_count() const {
  std::int64_t n = 0;
  for (const auto& s : sequences) n += static_cast<std::int64_t>(s.size()) + 1;
  return n;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Vocabulary build_vocabulary(std::span<const std::string> lines) {
  Vocabulary vocab;
  for (const auto& line : lines) {
    for (const auto& tok : tokenize(line)) vocab.add(tok);
  }
  if (vocab.size() == 0) throw InputError("empty corpus");
  return vocab;
}

Corpus encode_corpus(std::span<const std::string> lines,
                     std::shared_ptr<const Vocabulary> vocab, LoadStats* stats) {
  Corpus corpus;
  corpus.vocab = std::move(vocab);
  std::size_t skipped = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    auto tokens = tokenize(lines[li]);
    if (tokens.empty()) {
      ++skipped;
      continue;
    }
    Sequence seq;
    seq.reserve(tokens.size());
    for (const auto& tok : tokens) {
      if (!corpus.vocab->contains(tok)) {
        throw InputError("unknown token '" + tok + "' on line " + std::to_string(li + 1));
      }
      seq.push_back(corpus.vocab->id_of(tok));
    }
    corpus.sequences.push_back(std::move(seq));
  }
  if (corpus.sequences.empty()) throw InputError("empty corpus");
  if (stats) stats->skipped_empty_lines = skipped;
  return corpus;
}

Corpus make_corpus(std::span<const std::string> lines, LoadStats* stats) {
  auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(lines));
  return encode_corpus(lines, std::move(vocab), stats);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::int64_t count_substrings(const Corpus& corpus, std::span<const SymbolId> query,
                              bool with_eos) {
  std::int64_t total = 0;
  const std::size_t q = query.size();
  for (const auto& seq : corpus.sequences) {
    if (with_eos) {
      if (q <= seq.size() &&
          std::equal(query.begin(), query.end(), seq.end() - static_cast<std::ptrdiff_t>(q))) {
        ++total;
      }
      continue;
    }
    if (q == 0) {
      total += static_cast<std::int64_t>(seq.size()) + 1;
      continue;
    }
    if (q > seq.size()) continue;
    for (std::size_t t = 0; t + q <= seq.size(); ++t) {
      if (std::equal(query.begin(), query.end(), seq.begin() + static_cast<std::ptrdiff_t>(t))) {
        ++total;
      }
    }
  }
  return total;
}

}  // namespace smoothreg
