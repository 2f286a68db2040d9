#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hgec/hangul.hpp"

namespace hgec::corpus {

enum class Source { nikl, aihub, other };

std::string_view to_string(Source s);
/// Throws InvalidArgument for anything but "nikl", "aihub", "other".
Source parse_source(std::string_view s);

/// Section tag marking rows that come from a speech-recognition correction
/// sub-corpus.
inline constexpr std::string_view kAsrSection = "asr";

struct SentencePair {
  std::string id;
  Source source = Source::other;
  std::string original;
  std::string corrected;
  /// Free-form sub-corpus tag taken from the input file (e.g. "asr").
  std::string section;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

// --- ingest --------------------------------------------------------------

enum class Format { jsonl, tsv };
Format parse_format(std::string_view s);

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestOptions {
  Source source = Source::other;
  /// Applied to every row that does not carry its own "section" field.
  std::string section;
};

struct IngestResult {
  std::vector<SentencePair> pairs;
  std::vector<RowError> errors;
};

/// Reads one pair per row. Rows without an "id" get "<source>-<line>" with
/// the line number zero-padded to eight digits, so id order is file order.
/// Malformed rows land in `errors`; an unreadable file, or a JSONL file whose
/// first non-blank line is not a JSON object, throws.
IngestResult ingest(const std::filesystem::path& path, Format format, const IngestOptions& options = {});
IngestResult ingest(std::istream& in, Format format, const IngestOptions& options = {});

/// Canonical interchange: one {"id","source","original","corrected"} object
/// per line ("section" only when non-empty).
void write_jsonl(std::ostream& out, std::span<const SentencePair> pairs);
void write_jsonl(const std::filesystem::path& path, std::span<const SentencePair> pairs);

// --- preprocess ----------------------------------------------------------

enum class DropReason { english_only, empty_after_clean, jamo_only_test, typo_variant_duplicate, asr_correction };

std::string_view to_string(DropReason r);

struct Dropped {
  SentencePair pair;
  DropReason reason;
};

enum class DedupPolicy {
  keep_first,  ///< keep the smallest id of each group
  drop_group,  ///< drop every member of a group with more than one row
};

struct Rules {
  bool strip_emoji = true;
  bool drop_english_only = true;
  bool drop_empty = true;
  bool drop_typo_variants = true;
  /// Test-set rule: drop pairs whose corrected side is only compatibility jamo.
  bool drop_jamo_only = false;
  bool drop_asr = true;
  DedupPolicy dedup = DedupPolicy::keep_first;
  const hangul::EmojiRanges* emoji = nullptr;  ///< null selects the defaults

  /// Parses a comma-separated rule list such as "strip_emoji,drop_empty".
  static Rules parse_list(std::string_view list);
};

struct PreprocessResult {
  std::vector<SentencePair> kept;
  std::vector<Dropped> dropped;
};

/// Partitions `pairs`; every dropped row carries exactly one reason. The first
/// applicable rule wins, in the order asr, empty, english-only, jamo-only,
/// then typo-variant dedup over the survivors.
PreprocessResult preprocess(std::span<const SentencePair> pairs, const Rules& rules);

/// Groups by canonicalized corrected text. Kept rows stay in input order.
PreprocessResult dedup_typo_variants(std::span<const SentencePair> pairs,
                                     DedupPolicy policy = DedupPolicy::keep_first);

/// Drop report: one {"id","reason"} object per line.
void write_drop_report(std::ostream& out, std::span<const Dropped> dropped);

// --- split ---------------------------------------------------------------

/// Exact non-negative rational; split sizes are computed without rounding
/// error (5,253 / 525,268 of 525,268 rows is exactly 5,253).
struct Fraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  /// Accepts "p/q" or a plain decimal such as "0.01".
  static Fraction parse(std::string_view s);
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

struct Split {
  std::vector<SentencePair> train;
  std::vector<SentencePair> test;
};

/// round(n * fraction), halves rounded up.
std::size_t test_size(std::size_t n, Fraction test_fraction);

/// Orders rows by id, applies a seeded Fisher-Yates shuffle and takes the
/// first test_size(n) as test. Both outputs keep input order. The shuffle
/// uses mt19937_64 with a fixed bounded-draw rule, so results do not depend
/// on the standard library's distribution implementation.
Split split(std::span<const SentencePair> pairs, Fraction test_fraction, std::uint64_t seed);

// --- training manifest ---------------------------------------------------

enum class ModelSize { m600, b3_3 };
std::string_view to_string(ModelSize s);
/// "600M" or "3.3B" (case-insensitive); anything else throws InvalidArgument.
ModelSize parse_model_size(std::string_view s);

struct TrainingManifest {
  ModelSize model_size = ModelSize::m600;
  std::string base_model;
  int batch_size = 64;
  int update_frequency = 1;
  int warmup_updates = 1000;
  int max_seq_len = 128;
  int checkpoint_interval = 2000;
  int loss_log_interval = 200;
  std::string source_lang_token = "kor_Hang";
  std::string target_lang_token = "cor_Hang";
  std::string optimizer = "adafactor";
  std::string lr_scheduler = "constant_with_warmup";
  std::vector<std::string> notes;
};

TrainingManifest make_training_manifest(ModelSize size);

/// Flat "key = value" config, one entry per line, notes as note.N keys.
std::string serialize(const TrainingManifest& m);
void emit_training_manifest(ModelSize size, const std::filesystem::path& out);

}  // namespace hgec::corpus
