#include "scenediff/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "scenediff/common.hpp"

namespace scenediff {

std::vector<std::string> tokenize_prompt(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string prompt_for_room(const Room& room) {
  return "a " + room.room_type + " with " + std::to_string(room.size()) + " objects";
}

std::vector<std::string> prompt_phrases(const std::vector<std::string>& room_types,
                                        const std::vector<std::string>& categories,
                                        int max_count) {
  check(max_count >= 0, "prompt_phrases: negative max_count");
  std::vector<std::string> phrases = {"a with objects"};
  phrases.insert(phrases.end(), room_types.begin(), room_types.end());
  phrases.insert(phrases.end(), categories.begin(), categories.end());
  for (int i = 0; i <= max_count; ++i) phrases.push_back(std::to_string(i));
  return phrases;
}

TextVocab TextVocab::build(const std::vector<std::string>& phrases) {
  std::set<std::string> unique;
  for (const auto& phrase : phrases)
    for (auto& tok : tokenize_prompt(phrase)) unique.insert(std::move(tok));
  std::vector<std::string> tokens = {"<null>", "<unk>"};
  tokens.insert(tokens.end(), unique.begin(), unique.end());
  return from_tokens(std::move(tokens));
}

TextVocab TextVocab::from_tokens(std::vector<std::string> tokens) {
  check(tokens.size() >= 2 && tokens[0] == "<null>" && tokens[1] == "<unk>",
        "TextVocab: token list must start with <null>, <unk>");
  TextVocab v;
  v.tokens_ = std::move(tokens);
  for (int i = 0; i < static_cast<int>(v.tokens_.size()); ++i) {
    const auto [it, inserted] = v.index_.emplace(v.tokens_[i], i);
    check(inserted, "TextVocab: duplicate token " + v.tokens_[i]);
  }
  return v;
}

int TextVocab::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? unk_id() : it->second;
}

std::vector<int> TextVocab::encode(const std::string& prompt) const {
  check(!tokens_.empty(), "TextVocab: encode on an empty vocabulary");
  const auto words = tokenize_prompt(prompt);
  if (words.empty()) return {null_id()};
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

}  // namespace scenediff
