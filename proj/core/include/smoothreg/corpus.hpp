#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace smoothreg {

using SymbolId = std::int32_t;
using Sequence = std::vector<SymbolId>;
using History = std::vector<SymbolId>;

inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kEosToken = "</s>";

// Symbol <-> id map. Corpus symbols take ids 0..size()-1; BOS and EOS are
// appended after them. Distributions over the extended alphabet (symbols plus
// EOS) are indexed by *outcome*: outcome i < size() is symbol i and outcome
// size() is EOS.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> symbols);

  // Adds `token` if absent and returns its id. Sentinel spellings are rejected.
  SymbolId add(std::string_view token);

  std::size_t size() const { return symbols_.size(); }
  std::size_t outcome_count() const { return symbols_.size() + 1; }

  SymbolId bos_id() const { return static_cast<SymbolId>(symbols_.size()); }
  SymbolId eos_id() const { return static_cast<SymbolId>(symbols_.size() + 1); }
  std::size_t eos_outcome() const { return symbols_.size(); }

  bool contains(std::string_view token) const;
  // Throws InputError for unknown tokens.
  SymbolId id_of(std::string_view token) const;
  const std::string& symbol(SymbolId id) const;
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::size_t outcome_of(SymbolId id) const;
  SymbolId id_of_outcome(std::size_t outcome) const;

  // Rendering used by every TSV format: sentinels print as <bos> / </s>.
  std::string render(SymbolId id) const;
  std::string render_outcome(std::size_t outcome) const;
  std::string render_history(std::span<const SymbolId> history) const;
  // Inverse of render_history; the empty string is the empty history.
  History parse_history(std::string_view text) const;
  SymbolId parse_rendered(std::string_view token) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> ids_;
};

struct Corpus {
  std::shared_ptr<const Vocabulary> vocab;
  std::vector<Sequence> sequences;

  std::size_t size() const { return sequences.size(); }
  // Number of emission events: tokens plus one EOS per sequence.
  std::int64_t emission_count() const;
};

// Splits on runs of spaces/tabs. Trailing CR is tolerated.
std::vector<std::string> tokenize(std::string_view line);

// First-appearance vocabulary over all lines. Throws InputError("empty corpus")
// when no line carries a token.
Vocabulary build_vocabulary(std::span<const std::string> lines);

struct LoadStats {
  std::size_t skipped_empty_lines = 0;
};

// Encodes lines against `vocab`. Blank lines are skipped and counted. Unknown
// tokens raise InputError naming the token and line.
Corpus encode_corpus(std::span<const std::string> lines,
                     std::shared_ptr<const Vocabulary> vocab,
                     LoadStats* stats = nullptr);

// Builds the vocabulary from `lines` and encodes them.
Corpus make_corpus(std::span<const std::string> lines, LoadStats* stats = nullptr);

std::vector<std::string> read_lines(const std::string& path);

// Occurrence count of `query` in the dataset. With `with_eos` the query must
// end the sequence (a suffix count); the empty suffix occurs once per
// sequence. The empty query without EOS counts every emission position.
std::int64_t count_substrings(const Corpus& corpus, std::span<const SymbolId> query,
                              bool with_eos);

}  // namespace smoothreg
