#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. Deliberately naive: no shared code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// Docs and query are already lowercase, space separated.
inline std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline double bm25(const std::vector<std::string>& docs, const std::string& query, std::size_t d, double k1 = 1.2,
                   double b = 0.75) {
  const double n = static_cast<double>(docs.size());
  double total_len = 0;
  for (const auto& doc : docs) total_len += static_cast<double>(words(doc).size());
  const double avgdl = total_len / n;
  const auto target = words(docs[d]);
  double score = 0;
  for (const auto& q : words(query)) {
    double df = 0;
    for (const auto& doc : docs) {
      const auto w = words(doc);
      if (std::find(w.begin(), w.end(), q) != w.end()) df += 1;
    }
    const double tf = static_cast<double>(std::count(target.begin(), target.end(), q));
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * static_cast<double>(target.size()) / avgdl));
  }
  return score;
}

inline double mrr(const std::vector<std::size_t>& ranks) {
  double s = 0;
  for (auto r : ranks) s += 1.0 / static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

}  // namespace oracle
