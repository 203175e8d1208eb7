#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace g2s {

// Token <-> id map. Ids are dense from 0; the four specials always occupy
// ids 0..3.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kEnd = 3;
  static constexpr int kSpecials = 4;

  Vocab();

  // Tokens with count >= min_count, ordered by descending count then
  // lexicographically. Throws on an empty corpus.
  static Vocab build(const std::vector<std::vector<std::string>>& streams, int min_count = 1);
  static Vocab from_tokens(const std::vector<std::string>& non_special);

  int id(std::string_view token) const;  // kUnk when absent
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Non-special tokens, in id order.
  std::vector<std::string> non_special() const;

  // One token per line; line k holds id kSpecials + k.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  int push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace g2s
