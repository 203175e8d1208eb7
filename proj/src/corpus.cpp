#include "g2s/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace g2s {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<CorpusEntry> parse_corpus(std::string_view text) {
  std::vector<CorpusEntry> out;
  CorpusEntry cur;
  std::string body;

  auto flush = [&] {
    if (trim(body).empty()) {
      body.clear();
      cur = CorpusEntry{};
      return;
    }
    cur.amr_text = std::string(trim(body));
    cur.graph = parse_penman(cur.amr_text);
    if (cur.id.empty()) cur.id = std::to_string(out.size());
    out.push_back(std::move(cur));
    cur = CorpusEntry{};
    body.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      flush();
    } else if (line.front() == '#') {
      // A metadata line after graph text starts a new block.
      if (!trim(body).empty()) flush();
      if (starts_with(line, "# ::snt ")) cur.sentence = std::string(trim(line.substr(8)));
      else if (starts_with(line, "# ::id ")) {
        const auto rest = trim(line.substr(7));
        cur.id = std::string(rest.substr(0, rest.find(' ')));
      }
    } else {
      body.append(raw);
      body.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return out;
}

std::vector<CorpusEntry> read_corpus(const std::string& path) {
  return parse_corpus(read_file(path));
}

void attach_sentences(std::vector<CorpusEntry>& corpus, const std::string& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() != corpus.size())
    throw std::runtime_error("sentence file '" + path + "' has " + std::to_string(lines.size()) +
                             " lines for " + std::to_string(corpus.size()) + " graphs");
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].sentence = std::string(trim(lines[i]));
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : sentence) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace g2s
