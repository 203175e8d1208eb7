#include "g2s/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "g2s/corpus.hpp"

namespace g2s {

Vocab::Vocab() {
  push("<pad>");
  push("<unk>");
  push("<s>");
  push("</s>");
}

int Vocab::push(std::string token) {
  if (ids_.count(token)) throw std::invalid_argument("duplicate vocabulary token '" + token + "'");
  const int id = static_cast<int>(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(std::move(token));
  return id;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& streams, int min_count) {
  std::map<std::string, long> counts;
  for (const auto& s : streams)
    for (const auto& t : s) ++counts[t];
  if (counts.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, c] : counts)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [tok, c] : kept)
    if (!v.ids_.count(tok)) v.push(tok);
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& non_special) {
  Vocab v;
  for (const auto& t : non_special) v.push(t);
  return v;
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

std::optional<int> Vocab::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocab id " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocab::non_special() const {
  return {tokens_.begin() + kSpecials, tokens_.end()};
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (std::size_t i = kSpecials; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

Vocab Vocab::load(const std::string& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return from_tokens(lines);
}

}  // namespace g2s
