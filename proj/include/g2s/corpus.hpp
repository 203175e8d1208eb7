#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/amr.hpp"

namespace g2s {

struct CorpusEntry {
  std::string id;
  std::string amr_text;
  AmrGraph graph;
  std::optional<std::string> sentence;
};

// Blocks of one PENMAN graph separated by blank lines. Lines starting with
// '#' are metadata; "# ::snt <sentence>" and "# ::id <id>" are recognized.
std::vector<CorpusEntry> parse_corpus(std::string_view text);
std::vector<CorpusEntry> read_corpus(const std::string& path);

// Attaches one sentence per line to entries, aligned by index.
void attach_sentences(std::vector<CorpusEntry>& corpus, const std::string& path);

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);

// Lowercase, whitespace-separated tokens.
std::vector<std::string> tokenize(std::string_view sentence);

}  // namespace g2s
