#pragma once

#include <filesystem>
#include <vector>

#include "nmla/core.hpp"

namespace nmla {

struct SentencePair {
  Sentence source;
  Sentence target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

using Corpus = std::vector<SentencePair>;

// Space-separated tokens; unknown words throw std::out_of_range.
Sentence parse_sentence(std::string_view line, const Vocabulary& vocab);
std::string format_sentence(const Sentence& s, const Vocabulary& vocab);

// TSV: `source<TAB>target` per line.
Corpus read_corpus(const std::filesystem::path& path, const Vocabulary& source_vocab,
                   const Vocabulary& target_vocab);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus,
                  const Vocabulary& source_vocab, const Vocabulary& target_vocab);

// One sentence per line.
std::vector<Sentence> read_sentences(const std::filesystem::path& path, const Vocabulary& vocab);
void write_sentences(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                     const Vocabulary& vocab);

std::vector<Sentence> targets(const Corpus& corpus);
std::vector<Sentence> sources(const Corpus& corpus);

}  // namespace nmla
