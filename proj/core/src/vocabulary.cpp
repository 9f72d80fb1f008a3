#include <fstream>

#include "nmla/core.hpp"

namespace nmla {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw std::invalid_argument("Vocabulary: empty word symbol");
    if (words_[i].find_first_of(" \t\r\n") != std::string::npos) {
      throw std::invalid_argument("Vocabulary: word '" + words_[i] + "' contains whitespace");
    }
    auto [it, inserted] = index_.emplace(words_[i], static_cast<TokenId>(i));
    if (!inserted) throw std::invalid_argument("Vocabulary: duplicate word '" + words_[i] + "'");
  }
}

Vocabulary Vocabulary::synthetic(std::size_t num_words, std::string_view prefix) {
  std::vector<std::string> words;
  words.reserve(num_words);
  for (std::size_t i = 0; i < num_words; ++i) words.push_back(std::string(prefix) + std::to_string(i));
  return Vocabulary(std::move(words));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    words.push_back(line);
  }
  return Vocabulary(std::move(words));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  for (const auto& w : words_) out << w << '\n';
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw std::out_of_range("Vocabulary: token id " + std::to_string(id) + " is not a word");
  }
  return words_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view word) const {
  if (auto found = find(word)) return *found;
  throw std::out_of_range("Vocabulary: unknown word '" + std::string(word) + "'");
}

}  // namespace nmla
