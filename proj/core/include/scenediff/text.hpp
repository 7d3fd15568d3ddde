#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scenediff/scene.hpp"

namespace scenediff {

// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize_prompt(const std::string& text);

// Training prompts are templated from ground truth.
std::string prompt_for_room(const Room& room);

// Phrases that cover everything prompt_for_room can emit for a corpus with
// the given room types and categories, used to build the closed vocabulary.
std::vector<std::string> prompt_phrases(const std::vector<std::string>& room_types,
                                        const std::vector<std::string>& categories,
                                        int max_count);

// Closed token vocabulary. Id 0 is the learned null token (unconditional
// mode), id 1 the reserved unknown token; the rest are the sorted unique
// tokens of the corpus phrases.
class TextVocab {
 public:
  TextVocab() = default;

  static TextVocab build(const std::vector<std::string>& phrases);
  static TextVocab from_tokens(std::vector<std::string> tokens);

  int null_id() const { return 0; }
  int unk_id() const { return 1; }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int id(const std::string& token) const;  // unk_id for unknown tokens

  // Token ids of a prompt; the empty prompt is the single null token.
  std::vector<int> encode(const std::string& prompt) const;

  bool operator==(const TextVocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace scenediff
