#ifndef SASOFTMAX_CORPUS_HPP
#define SASOFTMAX_CORPUS_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sasoftmax/error.hpp"
#include "sasoftmax/io.hpp"

namespace sasoftmax {

/// Byte-level vocabulary. Ids are assigned in ascending byte order over the
/// bytes that actually occur.
class Vocabulary {
 public:
  Vocabulary() { id_of_.fill(-1); }

  static Vocabulary from_text(std::string_view text) {
    std::array<bool, 256> seen{};
    for (unsigned char c : text) seen[c] = true;
    std::vector<unsigned char> symbols;
    for (int b = 0; b < 256; ++b) {
      if (seen[static_cast<std::size_t>(b)]) symbols.push_back(static_cast<unsigned char>(b));
    }
    return from_symbols(symbols);
  }

  static Vocabulary from_symbols(const std::vector<unsigned char>& symbols) {
    Vocabulary v;
    v.symbols_ = symbols;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (v.id_of_[symbols[i]] != -1) throw Error(ErrorCode::InvalidArgument, "duplicate symbol");
      v.id_of_[symbols[i]] = static_cast<int>(i);
    }
    return v;
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::vector<unsigned char>& symbols() const noexcept { return symbols_; }
  int id(unsigned char c) const noexcept { return id_of_[c]; }

  std::vector<int> encode(std::string_view text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      const int id = id_of_[static_cast<unsigned char>(text[i])];
      if (id < 0) {
        throw Error(ErrorCode::UnknownSymbol,
                    "byte " + std::to_string(static_cast<unsigned char>(text[i])) +
                        " at offset " + std::to_string(i) + " is not in the vocabulary");
      }
      ids.push_back(id);
    }
    return ids;
  }

  std::string decode(const std::vector<int>& ids) const {
    std::string s;
    for (int id : ids) s.push_back(static_cast<char>(symbols_.at(static_cast<std::size_t>(id))));
    return s;
  }

 private:
  std::vector<unsigned char> symbols_;
  std::array<int, 256> id_of_{};
};

struct Corpus {
  Vocabulary vocab;
  std::vector<int> tokens;
};

inline Corpus corpus_from_text(std::string_view text, std::size_t seq_len) {
  if (text.size() < seq_len + 1 || text.empty()) {
    throw Error(ErrorCode::CorpusTooSmall, "corpus has " + std::to_string(text.size()) +
                                               " bytes, need at least " +
                                               std::to_string(seq_len + 1));
  }
  Corpus c;
  c.vocab = Vocabulary::from_text(text);
  c.tokens = c.vocab.encode(text);
  return c;
}

inline Corpus load_corpus(const std::filesystem::path& path, std::size_t seq_len) {
  return corpus_from_text(read_file(path), seq_len);
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_CORPUS_HPP
