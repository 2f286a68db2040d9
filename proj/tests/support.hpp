#pragma once

// Shared helpers for the test suites: scratch directories and the
// independent reference implementations ("oracles") the library is checked
// against. Oracles trade speed for obviousness and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace hgec::testing {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("hgec-" + tag + "-" + std::to_string(rng() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// A loopback port with nothing listening on it: bound to port 0, read
/// back, then closed.
inline int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  int port = 0;
  if (fd >= 0 && ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
    port = ntohs(addr.sin_port);
  }
  if (fd >= 0) ::close(fd);
  return port;
}

namespace oracle {

using Sentence = std::vector<std::string>;

inline Sentence words(const std::string& line) {
  Sentence out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

/// Occurrences of `gram` in `s`, by direct scanning.
inline std::uint64_t occurrences(const Sentence& s, const Sentence& gram) {
  if (gram.size() > s.size()) return 0;
  std::uint64_t c = 0;
  for (std::size_t i = 0; i + gram.size() <= s.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), s.begin() + static_cast<std::ptrdiff_t>(i))) ++c;
  }
  return c;
}

/// Corpus BLEU from first principles: for each order, every distinct
/// hypothesis n-gram contributes min(count in hyp, count in ref). An order
/// with no hypothesis n-grams anywhere has precision 1.
inline double bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  double log_sum = 0.0;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += hyps[i].size();
    ref_len += refs[i].size();
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    std::uint64_t matched = 0;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const Sentence& h = hyps[i];
      if (h.size() < n) continue;
      total += h.size() - n + 1;
      std::vector<Sentence> seen;
      for (std::size_t k = 0; k + n <= h.size(); ++k) {
        Sentence gram(h.begin() + static_cast<std::ptrdiff_t>(k), h.begin() + static_cast<std::ptrdiff_t>(k + n));
        if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
        seen.push_back(gram);
        matched += std::min(occurrences(h, gram), occurrences(refs[i], gram));
      }
    }
    if (total == 0) continue;
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  if (hyp_len == 0) return 0.0;
  const double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

/// Rounds to one decimal, halves away from zero, via exact decimal text.
inline double round1(std::uint64_t count, std::uint64_t total) {
  // 100 * count / total in tenths, with the remainder decided by comparing
  // twice the remainder against the divisor.
  const std::uint64_t num = 1000 * count;
  std::uint64_t tenths = num / total;
  if (2 * (num % total) >= total) ++tenths;
  return static_cast<double>(tenths) / 10.0;
}

/// Smallest n in [1, max_n] admitting integer numerators that reproduce every
/// target percentage at two decimals; 0 when none does.
inline std::uint64_t smallest_denominator(const std::vector<double>& rates, std::uint64_t max_n = 1000) {
  for (std::uint64_t n = 1; n <= max_n; ++n) {
    bool all = true;
    for (const double r : rates) {
      bool found = false;
      for (std::uint64_t k = 0; k <= n && !found; ++k) {
        const double pct = std::round(100.0 * 100.0 * static_cast<double>(k) / static_cast<double>(n)) / 100.0;
        found = std::fabs(pct - r) < 1e-9;
      }
      all = all && found;
    }
    if (all) return n;
  }
  return 0;
}

/// All count vectors over `total` occurrences that round (one decimal) to
/// `percentages`, for a fixed total. Each cell is independent, so the search
/// is a product of per-cell candidate lists filtered by the sum.
inline std::vector<std::vector<std::uint64_t>> counts_for(const std::vector<double>& percentages, std::uint64_t total) {
  std::vector<std::vector<std::uint64_t>> cand(percentages.size());
  for (std::size_t i = 0; i < percentages.size(); ++i) {
    for (std::uint64_t c = 0; c <= total; ++c) {
      if (std::fabs(round1(c, total) - percentages[i]) < 1e-9) cand[i].push_back(c);
    }
  }
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur;
  const auto rec = [&](auto&& self, std::size_t i, std::uint64_t sum) -> void {
    if (sum > total) return;
    if (i == cand.size()) {
      if (sum == total) out.push_back(cur);
      return;
    }
    for (const auto c : cand[i]) {
      cur.push_back(c);
      self(self, i + 1, sum + c);
      cur.pop_back();
    }
  };
  rec(rec, 0, 0);
  return out;
}

}  // namespace oracle

}  // namespace hgec::testing
