#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ajb/error.hpp"
#include "ajb/text.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

// Word-level vocabulary. Ids are positions in the word list.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i].empty()) throw ParameterError("empty vocabulary entry");
      if (!index_.emplace(words_[i], static_cast<TokenId>(i)).second) {
        throw ParameterError("duplicate vocabulary entry '" + words_[i] + "'");
      }
    }
  }

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(TokenId id) const { return words_.at(id); }

  bool contains(const std::string& w) const { return index_.count(w) != 0; }

  TokenId id(const std::string& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) throw InputError("word '" + w + "' is not in the vocabulary");
    return it->second;
  }

  TokenSequence encode(std::string_view text) const {
    TokenSequence ids;
    for (const auto& w : normalize_words(text)) ids.push_back(id(w));
    return ids;
  }

  std::string decode(std::span<const TokenId> ids) const {
    std::vector<std::string> out;
    for (TokenId t : ids) out.push_back(word(t));
    return join_words(out);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

// Row-major (steps x vocab) score matrix.
struct Logits {
  std::size_t steps = 0;
  std::size_t vocab = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t step) const {
    return std::span<const double>(values).subspan(step * vocab, vocab);
  }
};

struct DecodeMode {
  enum class Kind { Greedy, Sampled };

  Kind kind = Kind::Greedy;
  double temperature = 1.0;
  std::size_t top_k = 1;
  std::uint64_t seed = 0;

  static DecodeMode greedy() { return {}; }

  static DecodeMode sampled(double temperature, std::size_t top_k, std::uint64_t seed) {
    return {Kind::Sampled, temperature, top_k, seed};
  }

  bool is_greedy() const { return kind == Kind::Greedy; }
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d sample, same length as the input
};

// The differentiable target the attack loops optimize against.
class AudioModel {
 public:
  virtual ~AudioModel() = default;

  virtual int sample_rate() const = 0;
  virtual std::size_t vocab_size() const = 0;
  // Shortest input the model accepts (one analysis frame).
  virtual std::size_t min_input_length() const = 0;
  // Number of output steps produced for an input of n samples.
  virtual std::size_t steps_for(std::size_t n) const = 0;

  virtual Logits forward(const Waveform& w) const = 0;

  // Teacher-forced mean cross-entropy of the first |target| steps and its
  // exact gradient w.r.t. every input sample.
  virtual LossAndGrad loss_and_grad(const Waveform& w, const TokenSequence& target) const = 0;

  virtual TokenSequence decode(const Waveform& w, const DecodeMode& mode) const = 0;
};

}  // namespace ajb
