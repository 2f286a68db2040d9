#include "hgec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hgec/error.hpp"

namespace hgec::corpus {

using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string make_id(Source source, std::size_t line) {
  std::string digits = std::to_string(line);
  if (digits.size() < 8) digits.insert(0, 8 - digits.size(), '0');
  return std::string(to_string(source)) + "-" + digits;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return fields;
}

// Uniform draw in [0, bound) from raw 64-bit outputs (multiply-shift with
// rejection), independent of std::uniform_int_distribution.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  std::uint64_t x = rng();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

struct RowDecision {
  std::optional<DropReason> reason;
  std::string original;
  std::string corrected;
};

RowDecision decide(const SentencePair& pair, const Rules& rules) {
  using hangul::ContentClass;
  RowDecision d;
  if (rules.drop_asr && pair.section == kAsrSection) {
    d.reason = DropReason::asr_correction;
    return d;
  }
  const auto& emoji = rules.emoji != nullptr ? *rules.emoji : hangul::EmojiRanges::defaults();
  d.original = rules.strip_emoji ? hangul::strip_emoji(pair.original, emoji) : pair.original;
  d.corrected = rules.strip_emoji ? hangul::strip_emoji(pair.corrected, emoji) : pair.corrected;
  const ContentClass orig = hangul::classify_content(hangul::to_canonical(d.original));
  const ContentClass corr = hangul::classify_content(hangul::to_canonical(d.corrected));
  if (rules.drop_empty && (orig == ContentClass::empty || corr == ContentClass::empty)) {
    d.reason = DropReason::empty_after_clean;
  } else if (rules.drop_english_only && orig == ContentClass::english_only &&
             corr == ContentClass::english_only) {
    d.reason = DropReason::english_only;
  } else if (rules.drop_jamo_only && corr == ContentClass::jamo_only) {
    d.reason = DropReason::jamo_only_test;
  }
  return d;
}

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::nikl: return "nikl";
    case Source::aihub: return "aihub";
    case Source::other: return "other";
  }
  return "other";
}

Source parse_source(std::string_view s) {
  const std::string l = lower(s);
  if (l == "nikl") return Source::nikl;
  if (l == "aihub") return Source::aihub;
  if (l == "other") return Source::other;
  throw InvalidArgument("unknown corpus source '" + std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  const std::string l = lower(s);
  if (l == "jsonl") return Format::jsonl;
  if (l == "tsv") return Format::tsv;
  throw InvalidArgument("unknown input format '" + std::string(s) + "' (expected jsonl or tsv)");
}

IngestResult ingest(std::istream& in, Format format, const IngestOptions& options) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (is_blank(line)) continue;
    const bool first_content = !seen_content;
    seen_content = true;

    SentencePair pair;
    pair.source = options.source;
    pair.section = options.section;
    if (format == Format::jsonl) {
      json row;
      try {
        row = json::parse(line);
      } catch (const json::parse_error& e) {
        if (first_content) {
          throw FormatError("line " + std::to_string(line_no) + " is not JSON: " + e.what());
        }
        result.errors.push_back({line_no, std::string("invalid JSON: ") + e.what()});
        continue;
      }
      if (!row.is_object()) {
        if (first_content) throw FormatError("line " + std::to_string(line_no) + " is not a JSON object");
        result.errors.push_back({line_no, "row is not a JSON object"});
        continue;
      }
      const auto text_field = [&](const char* key) -> const std::string* {
        const auto it = row.find(key);
        return it != row.end() && it->is_string() ? it->get_ptr<const std::string*>() : nullptr;
      };
      const std::string* original = text_field("original");
      const std::string* corrected = text_field("corrected");
      if (original == nullptr || corrected == nullptr) {
        result.errors.push_back({line_no, original == nullptr ? "missing string field 'original'"
                                                               : "missing string field 'corrected'"});
        continue;
      }
      pair.original = *original;
      pair.corrected = *corrected;
      try {
        if (const auto* src = text_field("source")) pair.source = parse_source(*src);
      } catch (const InvalidArgument& e) {
        result.errors.push_back({line_no, e.what()});
        continue;
      }
      if (const auto* section = text_field("section")) pair.section = *section;
      if (const auto it = row.find("id"); it != row.end() && it->is_string()) {
        pair.id = it->get<std::string>();
      } else if (it != row.end() && it->is_number_integer()) {
        pair.id = std::to_string(it->get<long long>());
      } else {
        pair.id = make_id(pair.source, line_no);
      }
    } else {
      const auto fields = split_tabs(line);
      if (first_content && fields.size() >= 2 &&
          std::find(fields.begin(), fields.end(), "original") != fields.end() &&
          std::find(fields.begin(), fields.end(), "corrected") != fields.end()) {
        continue;  // header
      }
      if (fields.size() == 2) {
        pair.id = make_id(pair.source, line_no);
        pair.original = fields[0];
        pair.corrected = fields[1];
      } else if (fields.size() == 3) {
        pair.id = fields[0].empty() ? make_id(pair.source, line_no) : std::string(fields[0]);
        pair.original = fields[1];
        pair.corrected = fields[2];
      } else {
        result.errors.push_back({line_no, "expected 2 or 3 tab-separated fields, got " +
                                              std::to_string(fields.size())});
        continue;
      }
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, Format format, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return ingest(in, format, options);
}

void write_jsonl(std::ostream& out, std::span<const SentencePair> pairs) {
  for (const auto& p : pairs) {
    json row = {{"id", p.id},
                {"source", to_string(p.source)},
                {"original", p.original},
                {"corrected", p.corrected}};
    if (!p.section.empty()) row["section"] = p.section;
    out << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const SentencePair> pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, pairs);
}

// --- preprocess ----------------------------------------------------------

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::english_only: return "english_only";
    case DropReason::empty_after_clean: return "empty_after_clean";
    case DropReason::jamo_only_test: return "jamo_only_test";
    case DropReason::typo_variant_duplicate: return "typo_variant_duplicate";
    case DropReason::asr_correction: return "asr_correction";
  }
  return "unknown";
}

Rules Rules::parse_list(std::string_view list) {
  Rules r;
  r.strip_emoji = r.drop_english_only = r.drop_empty = r.drop_typo_variants = false;
  r.drop_jamo_only = r.drop_asr = false;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string name = lower(list.substr(pos, comma - pos));
    std::erase_if(name, [](unsigned char c) { return std::isspace(c) != 0; });
    pos = comma + 1;
    if (name.empty()) continue;
    if (name == "strip_emoji") r.strip_emoji = true;
    else if (name == "drop_english_only") r.drop_english_only = true;
    else if (name == "drop_empty") r.drop_empty = true;
    else if (name == "drop_typo_variants") r.drop_typo_variants = true;
    else if (name == "drop_jamo_only") r.drop_jamo_only = true;
    else if (name == "drop_asr") r.drop_asr = true;
    else throw InvalidArgument("unknown preprocessing rule '" + name + "'");
  }
  return r;
}

PreprocessResult preprocess(std::span<const SentencePair> pairs, const Rules& rules) {
  std::vector<RowDecision> decisions(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    decisions[k] = decide(pairs[k], rules);
  }

  PreprocessResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (decisions[i].reason) {
      result.dropped.push_back({pairs[i], *decisions[i].reason});
      continue;
    }
    SentencePair kept = pairs[i];
    kept.original = std::move(decisions[i].original);
    kept.corrected = std::move(decisions[i].corrected);
    result.kept.push_back(std::move(kept));
  }
  if (rules.drop_typo_variants) {
    PreprocessResult dedup = dedup_typo_variants(result.kept, rules.dedup);
    result.kept = std::move(dedup.kept);
    for (auto& d : dedup.dropped) result.dropped.push_back(std::move(d));
  }
  return result;
}

PreprocessResult dedup_typo_variants(std::span<const SentencePair> pairs, DedupPolicy policy) {
  std::vector<std::string> corrected;
  corrected.reserve(pairs.size());
  for (const auto& p : pairs) corrected.push_back(p.corrected);
  const auto canon = hangul::to_canonical_batch(corrected);

  // group key -> (smallest-id member, member count)
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(canon[i].str(), i, 0);
    auto& [first, count] = it->second;
    ++count;
    if (!inserted && pairs[i].id < pairs[first].id) first = i;
  }

  PreprocessResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [first, count] = groups.at(canon[i].str());
    const bool keep = count == 1 || (policy == DedupPolicy::keep_first && first == i);
    if (keep) {
      result.kept.push_back(pairs[i]);
    } else {
      result.dropped.push_back({pairs[i], DropReason::typo_variant_duplicate});
    }
  }
  return result;
}

void write_drop_report(std::ostream& out, std::span<const Dropped> dropped) {
  for (const auto& d : dropped) {
    out << json{{"id", d.pair.id}, {"reason", to_string(d.reason)}}.dump() << '\n';
  }
}

// --- split ---------------------------------------------------------------

Fraction Fraction::parse(std::string_view s) {
  const auto fail = [&]() -> Fraction {
    throw InvalidArgument("invalid fraction '" + std::string(s) + "'");
  };
  const auto parse_uint = [&](std::string_view digits) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) fail();
    return v;
  };
  Fraction f;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    f.numerator = parse_uint(s.substr(0, slash));
    f.denominator = parse_uint(s.substr(slash + 1));
  } else {
    const auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (frac.size() > 18) fail();
    if (whole.empty()) whole = "0";
    f.denominator = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) f.denominator *= 10;
    f.numerator = parse_uint(whole) * f.denominator + (frac.empty() ? 0 : parse_uint(frac));
  }
  if (f.denominator == 0) fail();
  const std::uint64_t g = std::gcd(f.numerator, f.denominator);
  if (g > 1) {
    f.numerator /= g;
    f.denominator /= g;
  }
  return f;
}

std::size_t test_size(std::size_t n, Fraction f) {
  using u128 = unsigned __int128;
  const u128 scaled = static_cast<u128>(n) * f.numerator * 2 + f.denominator;
  return static_cast<std::size_t>(scaled / (static_cast<u128>(f.denominator) * 2));
}

Split split(std::span<const SentencePair> pairs, Fraction test_fraction, std::uint64_t seed) {
  if (test_fraction.denominator == 0 || test_fraction.numerator == 0 ||
      test_fraction.numerator >= test_fraction.denominator) {
    throw InvalidArgument("test fraction must lie strictly between 0 and 1");
  }
  if (pairs.size() < 2) throw InvalidArgument("split needs at least 2 pairs, got " + std::to_string(pairs.size()));

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].id < pairs[b].id; });

  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i + 1));
    std::swap(order[i], order[j]);
  }

  const std::size_t k = test_size(pairs.size(), test_fraction);
  std::vector<bool> in_test(pairs.size(), false);
  for (std::size_t i = 0; i < k; ++i) in_test[order[i]] = true;

  Split out;
  out.test.reserve(k);
  out.train.reserve(pairs.size() - k);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (in_test[i] ? out.test : out.train).push_back(pairs[i]);
  }
  return out;
}

// --- training manifest ---------------------------------------------------

std::string_view to_string(ModelSize s) { return s == ModelSize::m600 ? "600M" : "3.3B"; }

ModelSize parse_model_size(std::string_view s) {
  const std::string l = lower(s);
  if (l == "600m") return ModelSize::m600;
  if (l == "3.3b") return ModelSize::b3_3;
  throw InvalidArgument("unknown model size '" + std::string(s) + "' (expected 600M or 3.3B)");
}

TrainingManifest make_training_manifest(ModelSize size) {
  TrainingManifest m;
  m.model_size = size;
  if (size == ModelSize::m600) {
    m.base_model = "facebook/nllb-200-distilled-600M";
    m.batch_size = 64;
  } else {
    m.base_model = "facebook/nllb-200-3.3B";
    m.batch_size = 16;
  }
  m.notes = {
      "checkpoint selection: best score on a held-out development set (set not specified)",
      "target_lang_token is an added special token marking corrected text",
  };
  return m;
}

std::string serialize(const TrainingManifest& m) {
  std::ostringstream out;
  out << "model_size = " << to_string(m.model_size) << '\n'
      << "base_model = " << m.base_model << '\n'
      << "batch_size = " << m.batch_size << '\n'
      << "update_frequency = " << m.update_frequency << '\n'
      << "optimizer = " << m.optimizer << '\n'
      << "lr_scheduler = " << m.lr_scheduler << '\n'
      << "warmup_updates = " << m.warmup_updates << '\n'
      << "max_seq_len = " << m.max_seq_len << '\n'
      << "checkpoint_interval = " << m.checkpoint_interval << '\n'
      << "loss_log_interval = " << m.loss_log_interval << '\n'
      << "source_lang_token = " << m.source_lang_token << '\n'
      << "target_lang_token = " << m.target_lang_token << '\n';
  for (std::size_t i = 0; i < m.notes.size(); ++i) out << "note." << (i + 1) << " = " << m.notes[i] << '\n';
  return out.str();
}

void emit_training_manifest(ModelSize size, const std::filesystem::path& out) {
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + out.string());
  file << serialize(make_training_manifest(size));
}

}  // namespace hgec::corpus
