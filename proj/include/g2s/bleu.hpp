#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace g2s {

inline constexpr int kBleuOrder = 4;

// Clipped n-gram matches and hypothesis n-gram totals, summed over a corpus.
struct BleuStats {
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

// 100 * BP * exp(mean log p_n); 0 when any p_n is 0. No smoothing.
double bleu_score(const BleuStats& stats);

// Lists must have equal length.
double corpus_bleu(const std::vector<std::vector<std::string>>& hyps,
                   const std::vector<std::vector<std::string>>& refs);
// Sentences are lowercased and split on whitespace first.
double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);

}  // namespace g2s
