#include "nmla/corpus.hpp"

#include <fstream>
#include <sstream>

namespace nmla {

Sentence parse_sentence(std::string_view line, const Vocabulary& vocab) {
  Sentence s;
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) s.tokens.push_back(vocab.id(token));
  return s;
}

std::string format_sentence(const Sentence& s, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += ' ';
    out += vocab.word(s[i]);
  }
  return out;
}

Corpus read_corpus(const std::filesystem::path& path, const Vocabulary& source_vocab,
                   const Vocabulary& target_vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": missing TAB");
    }
    corpus.push_back({parse_sentence(std::string_view(line).substr(0, tab), source_vocab),
                      parse_sentence(std::string_view(line).substr(tab + 1), target_vocab)});
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus,
                  const Vocabulary& source_vocab, const Vocabulary& target_vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file " + path.string());
  for (const auto& pair : corpus) {
    out << format_sentence(pair.source, source_vocab) << '\t'
        << format_sentence(pair.target, target_vocab) << '\n';
  }
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sentence file " + path.string());
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(parse_sentence(line, vocab));
  }
  return out;
}

void write_sentences(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                     const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sentence file " + path.string());
  for (const auto& s : sentences) out << format_sentence(s, vocab) << '\n';
}

std::vector<Sentence> targets(const Corpus& corpus) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& pair : corpus) out.push_back(pair.target);
  return out;
}

std::vector<Sentence> sources(const Corpus& corpus) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& pair : corpus) out.push_back(pair.source);
  return out;
}

}  // namespace nmla
