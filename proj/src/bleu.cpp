#include "g2s/bleu.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "g2s/corpus.hpp"

namespace g2s {

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int n = 0; n < kBleuOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

namespace {

using Ngrams = std::map<std::vector<std::string>, std::size_t>;

Ngrams count_ngrams(const std::vector<std::string>& toks, std::size_t n) {
  Ngrams out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

BleuStats bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  BleuStats s;
  s.hyp_length = hyp.size();
  s.ref_length = ref.size();
  for (int n = 1; n <= kBleuOrder; ++n) {
    const Ngrams h = count_ngrams(hyp, static_cast<std::size_t>(n));
    const Ngrams r = count_ngrams(ref, static_cast<std::size_t>(n));
    for (const auto& [gram, count] : h) {
      s.totals[n - 1] += count;
      if (auto it = r.find(gram); it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

double bleu_score(const BleuStats& s) {
  if (s.hyp_length == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    if (s.matches[n] == 0 || s.totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
  }
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum / kBleuOrder);
}

double corpus_bleu(const std::vector<std::vector<std::string>>& hyps,
                   const std::vector<std::vector<std::string>>& refs) {
  if (hyps.size() != refs.size())
    throw std::invalid_argument("corpus_bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                                std::to_string(refs.size()) + " references");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(hyps[i], refs[i]);
  return bleu_score(total);
}

double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size())
    throw std::invalid_argument("corpus_bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                                std::to_string(refs.size()) + " references");
  std::vector<std::vector<std::string>> h, r;
  for (const auto& s : hyps) h.push_back(tokenize(s));
  for (const auto& s : refs) r.push_back(tokenize(s));
  return corpus_bleu(h, r);
}

}  // namespace g2s
