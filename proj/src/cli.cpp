#include "hgec/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hgec/config.hpp"
#include "hgec/corpus.hpp"
#include "hgec/engines.hpp"
#include "hgec/error.hpp"
#include "hgec/judge.hpp"
#include "hgec/metrics.hpp"
#include "hgec/service.hpp"
#include "hgec/vocab.hpp"

namespace hgec::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// A flag combination that only fails once the inputs are known.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::uint64_t seed = 42;
  std::size_t max_concurrency = 4;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  Globals globals;

  void log(const std::string& msg) const { err << "hgec: " << msg << '\n'; }
};

fs::path sibling(const fs::path& input, const std::string& suffix) {
  return input.parent_path() / (input.stem().string() + suffix);
}

corpus::Format format_for(const std::string& flag, const fs::path& path) {
  if (!flag.empty()) return corpus::parse_format(flag);
  return path.extension() == ".tsv" ? corpus::Format::tsv : corpus::Format::jsonl;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::vector<corpus::SentencePair> load_pairs(const Context& ctx, const fs::path& path) {
  auto result = corpus::ingest(path, format_for("", path));
  for (const auto& e : result.errors) ctx.log(path.string() + ":" + std::to_string(e.line) + ": " + e.message);
  return std::move(result.pairs);
}

ToolkitConfig load_toolkit(const std::string& config_path) {
  return config_path.empty() ? default_config() : load_config(config_path);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// --- preprocess ----------------------------------------------------------------

struct PreprocessArgs {
  std::string in, format, source = "other", section, out, drops, emoji_ranges, dedup = "keep-first";
  std::string rules = "strip_emoji,drop_english_only,drop_empty,drop_typo_variants,drop_asr";
  bool json = false;
};

int cmd_preprocess(const Context& ctx, const PreprocessArgs& a) {
  corpus::Rules rules;
  try {
    rules = corpus::Rules::parse_list(a.rules);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--rules: ") + e.what());
  }
  const fs::path in(a.in);
  corpus::IngestOptions opts;
  opts.source = corpus::parse_source(a.source);
  opts.section = a.section;
  auto ingested = corpus::ingest(in, format_for(a.format, in), opts);
  for (const auto& e : ingested.errors) ctx.log(a.in + ":" + std::to_string(e.line) + ": " + e.message);

  rules.dedup = a.dedup == "drop-group" ? corpus::DedupPolicy::drop_group : corpus::DedupPolicy::keep_first;
  std::optional<hangul::EmojiRanges> ranges;
  if (!a.emoji_ranges.empty()) {
    ranges = hangul::EmojiRanges::load(a.emoji_ranges);
    rules.emoji = &*ranges;
  }
  const auto result = corpus::preprocess(ingested.pairs, rules);

  const fs::path out = a.out.empty() ? sibling(in, ".clean.jsonl") : fs::path(a.out);
  corpus::write_jsonl(out, result.kept);
  if (!a.drops.empty()) {
    std::ofstream drops(a.drops, std::ios::binary | std::ios::trunc);
    if (!drops) throw IoError("cannot write " + a.drops);
    corpus::write_drop_report(drops, result.dropped);
  }

  std::map<std::string, std::size_t> by_reason;
  for (const auto& d : result.dropped) ++by_reason[std::string(corpus::to_string(d.reason))];
  if (a.json) {
    ctx.out << json{{"input_rows", ingested.pairs.size()},
                    {"row_errors", ingested.errors.size()},
                    {"kept", result.kept.size()},
                    {"dropped", by_reason},
                    {"out", out.string()}}
                   .dump()
            << '\n';
  } else {
    ctx.out << "input rows: " << ingested.pairs.size() << " (" << ingested.errors.size() << " malformed)\n"
            << "kept: " << result.kept.size() << " -> " << out.string() << '\n';
    for (const auto& [reason, n] : by_reason) ctx.out << "dropped " << reason << ": " << n << '\n';
  }
  return kOk;
}

// --- split -----------------------------------------------------------------------

struct SplitArgs {
  std::string in, fraction = "0.01", train_out, test_out;
  bool json = false;
};

int cmd_split(const Context& ctx, const SplitArgs& a) {
  const fs::path in(a.in);
  const auto pairs = load_pairs(ctx, in);
  const auto fraction = corpus::Fraction::parse(a.fraction);
  const auto s = corpus::split(pairs, fraction, ctx.globals.seed);
  const fs::path train = a.train_out.empty() ? sibling(in, ".train.jsonl") : fs::path(a.train_out);
  const fs::path test = a.test_out.empty() ? sibling(in, ".test.jsonl") : fs::path(a.test_out);
  corpus::write_jsonl(train, s.train);
  corpus::write_jsonl(test, s.test);
  if (a.json) {
    ctx.out << json{{"rows", pairs.size()},   {"train", s.train.size()},      {"test", s.test.size()},
                    {"seed", ctx.globals.seed}, {"train_out", train.string()}, {"test_out", test.string()}}
                   .dump()
            << '\n';
  } else {
    ctx.out << "train: " << s.train.size() << " -> " << train.string() << '\n'
            << "test: " << s.test.size() << " -> " << test.string() << '\n';
  }
  return kOk;
}

// --- correct ---------------------------------------------------------------------

struct CorrectArgs {
  std::string in, engine = "mock", config, out, hyp_out;
  bool json = false;
};

int cmd_correct(const Context& ctx, const CorrectArgs& a) {
  const ToolkitConfig cfg = load_toolkit(a.config);
  const auto* ec = cfg.find_engine(a.engine);
  if (ec == nullptr) throw UsageError("engine '" + a.engine + "' is not configured");
  const auto engine = engines::make_engine(*ec);

  const fs::path in(a.in);
  const auto pairs = load_pairs(ctx, in);
  const fs::path out = a.out.empty() ? sibling(in, "." + a.engine + ".records.jsonl") : fs::path(a.out);
  const fs::path progress = out.string() + ".progress";

  engines::BatchOptions opts;
  opts.max_concurrency = ctx.globals.max_concurrency;
  opts.persist_path = progress;
  const auto result = engines::batch_correct(pairs, *engine, opts);

  engines::write_records(out, result.records);
  if (!a.hyp_out.empty()) {
    std::map<std::string, const std::string*> hyp;
    for (const auto& r : result.records) hyp.emplace(r.pair_id, &r.hypothesis);
    std::string text;
    for (const auto& p : pairs) {
      const auto it = hyp.find(p.id);
      if (it != hyp.end()) text += *it->second;
      text += '\n';
    }
    write_text(a.hyp_out, text);
  }
  for (const auto& f : result.failures) ctx.log("failed " + f.pair_id + ": " + f.message);
  if (result.failures.empty()) fs::remove(progress);

  if (a.json) {
    json failures = json::array();
    for (const auto& f : result.failures) failures.push_back({{"pair_id", f.pair_id}, {"error", f.message}});
    ctx.out << json{{"engine", engines::to_json(*ec)},
                    {"records", result.records.size()},
                    {"resumed", result.resumed},
                    {"failures", failures},
                    {"out", out.string()}}
                   .dump()
            << '\n';
  } else {
    ctx.out << "corrected: " << result.records.size() << " of " << pairs.size() << " -> " << out.string() << '\n';
    if (!result.failures.empty()) ctx.out << "failed: " << result.failures.size() << '\n';
  }
  return kOk;
}

// --- eval --------------------------------------------------------------------------

struct EvalArgs {
  std::string hyp, ref, out;
  bool normalize = false, smooth = false, json = false;
};

int cmd_eval(const Context& ctx, const EvalArgs& a) {
  const auto hyps = read_lines(a.hyp);
  const auto refs = read_lines(a.ref);
  const auto bleu = metrics::corpus_bleu(hyps, refs, a.normalize, a.smooth);
  const auto match = metrics::match_rate(hyps, refs, a.normalize);
  const json report = {{"bleu", metrics::to_json(bleu)}, {"match", metrics::to_json(match)}};
  if (!a.out.empty()) write_text(a.out, report.dump(2) + "\n");
  if (a.json) {
    ctx.out << report.dump() << '\n';
  } else {
    ctx.out << "BLEU = " << fixed(bleu.score, 2) << " (";
    for (int n = 0; n < metrics::kMaxOrder; ++n) {
      ctx.out << (n ? "/" : "") << fixed(100.0 * bleu.precisions[static_cast<std::size_t>(n)], 1);
    }
    ctx.out << ", BP = " << fixed(bleu.brevity_penalty, 3) << ", hyp_len = " << bleu.hyp_length
            << ", ref_len = " << bleu.ref_length << (a.normalize ? ", normalized" : "") << ")\n";
    ctx.out << "match = " << fixed(match.rate, 2) << "% (" << match.matched << "/" << match.total << ")\n";
  }
  return kOk;
}

// --- judge -------------------------------------------------------------------------

struct JudgeArgs {
  std::string records, pairs, judge = "mock", config, run_id = "judge", out, csv, system;
  bool include_short = false, json = false;
};

int cmd_judge(const Context& ctx, const JudgeArgs& a) {
  const auto records = engines::read_records(a.records);
  if (records.empty()) throw InvalidArgument("no correction records in " + a.records);
  const auto refs = load_pairs(ctx, a.pairs);

  std::unique_ptr<engines::Engine> engine;
  std::unique_ptr<judge::MockJudgeClient> mock;
  engines::ChatClient* client = nullptr;
  if (a.judge == "mock") {
    mock = std::make_unique<judge::MockJudgeClient>();
    client = mock.get();
  } else {
    const ToolkitConfig cfg = load_toolkit(a.config);
    const auto* ec = cfg.find_engine(a.judge);
    if (ec == nullptr) throw UsageError("judge engine '" + a.judge + "' is not configured");
    if (ec->kind != engines::EngineKind::chat_llm) throw UsageError("judge engine '" + a.judge + "' is not a chat_llm engine");
    engine = engines::make_engine(*ec);
    client = dynamic_cast<engines::ChatClient*>(engine.get());
  }

  const fs::path out = a.out.empty() ? sibling(a.records, ".verdicts.jsonl") : fs::path(a.out);
  const fs::path progress = out.string() + ".progress";
  judge::JudgeOptions opts;
  opts.run_id = a.run_id;
  opts.max_concurrency = ctx.globals.max_concurrency;
  opts.persist_path = progress;
  const auto verdicts = judge::run_judgement(records, refs, *client, opts);

  {
    std::ofstream v(out, std::ios::binary | std::ios::trunc);
    if (!v) throw IoError("cannot write " + out.string());
    for (const auto& x : verdicts) v << judge::to_json(x).dump() << '\n';
  }
  const auto errors = static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const judge::JudgeVerdict& v) { return v.error.has_value(); }));
  if (errors == 0) fs::remove(progress);
  for (const auto& v : verdicts) {
    if (v.error) ctx.log("judge failed on " + v.pair_id + ": " + *v.error);
  }

  const auto match = judge::match_summary(verdicts);
  std::optional<judge::ErrorDistribution> dist;
  try {
    dist = judge::aggregate_distribution(verdicts, a.include_short);
  } catch (const InvalidArgument& e) {
    ctx.log(std::string("no error distribution: ") + e.what());
  }
  const std::string system = a.system.empty() ? records.front().system_id : a.system;
  if (dist && !a.csv.empty()) {
    const std::vector<std::pair<std::string, judge::ErrorDistribution>> cols{{system, *dist}};
    write_text(a.csv, judge::distribution_csv(cols));
  }

  if (a.json) {
    json j = {{"run_id", a.run_id}, {"system", system}, {"match", metrics::to_json(match)},
              {"judge_errors", errors}, {"out", out.string()}};
    if (dist) {
      json pct = json::object();
      for (const auto c : dist->rows()) pct[std::string(judge::to_string(c))] = dist->percentages.at(c);
      j["distribution"] = {{"percentages", pct},
                           {"total_occurrences", dist->total_occurrences},
                           {"total_unmatched", dist->total_unmatched}};
    } else {
      j["distribution"] = nullptr;
    }
    ctx.out << j.dump() << '\n';
  } else {
    ctx.out << "match = " << fixed(match.rate, 2) << "% (" << match.matched << "/" << match.total << ")\n";
    if (errors) ctx.out << "judge errors: " << errors << '\n';
    if (dist) {
      ctx.out << "error distribution over " << dist->total_occurrences << " codes in " << dist->total_unmatched
              << " unmatched outputs:\n";
      for (const auto c : dist->rows()) {
        ctx.out << "  " << judge::to_string(c) << '\t' << fixed(dist->percentages.at(c), 1) << '\n';
      }
    }
  }
  return kOk;
}

// --- vocab -------------------------------------------------------------------------

struct VocabStatsArgs {
  std::string vocab, in, required_out;
  std::uint64_t min_count = 5;
  bool json = false;
};

int cmd_vocab_stats(const Context& ctx, const VocabStatsArgs& a) {
  const auto v = vocab::load_vocab(a.vocab);
  const auto pairs = load_pairs(ctx, a.in);
  std::vector<std::string> originals;
  std::vector<std::string> corrected;
  for (const auto& p : pairs) {
    originals.push_back(p.original);
    corrected.push_back(p.corrected);
  }
  const auto report = vocab::make_vocab_report(originals, corrected, v);
  const auto required = vocab::required_chars(corrected, a.min_count);
  if (!a.required_out.empty()) {
    std::ofstream o(a.required_out, std::ios::binary | std::ios::trunc);
    if (!o) throw IoError("cannot write " + a.required_out);
    vocab::write_required_chars(o, required);
  }
  if (a.json) {
    json j = vocab::to_json(report);
    j["required_chars"] = required.size();
    j["min_count"] = a.min_count;
    ctx.out << j.dump() << '\n';
  } else {
    ctx.out << "vocab size: " << report.vocab_size << " (" << report.script_token_count << " Korean tokens)\n"
            << "tokens per word: original " << fixed(report.tokens_per_word_original, 3) << ", corrected "
            << fixed(report.tokens_per_word_corrected, 3) << " (greedy longest match)\n"
            << "rows with unknown tokens: " << report.unk_row_count << " of " << report.rows << '\n'
            << "required syllables (> " << a.min_count << "): " << required.size() << '\n';
  }
  return kOk;
}

struct VocabMergeArgs {
  std::string base, donor, out, plan_out;
  bool json = false;
};

int cmd_vocab_merge(const Context& ctx, const VocabMergeArgs& a) {
  const auto base = vocab::load_vocab(a.base);
  const auto donor = vocab::load_vocab(a.donor);
  const auto [merged, plan] = vocab::merge_vocab(base, donor);
  vocab::write_vocab(fs::path(a.out), merged);
  if (!a.plan_out.empty()) write_text(a.plan_out, vocab::to_json(plan, true).dump(2) + "\n");
  if (a.json) {
    ctx.out << vocab::to_json(plan).dump() << '\n';
  } else {
    ctx.out << "base " << plan.base_size << " + transferred " << plan.transferred << " of " << plan.donor_size
            << " donor tokens = " << plan.merged_size << " -> " << a.out << '\n';
  }
  return kOk;
}

// --- manifest / serve ------------------------------------------------------------

int cmd_manifest(const Context& ctx, const std::string& size_flag, const std::string& out_flag) {
  const auto size = corpus::parse_model_size(size_flag);
  const fs::path out = out_flag.empty() ? fs::path("training-" + std::string(corpus::to_string(size)) + ".cfg")
                                        : fs::path(out_flag);
  corpus::emit_training_manifest(size, out);
  ctx.out << "wrote " << out.string() << '\n';
  return kOk;
}

struct ServeArgs {
  std::string config, host, data_dir;
  int port = -1;
};

int cmd_serve(const Context& ctx, const ServeArgs& a) {
  ToolkitConfig cfg = load_toolkit(a.config);
  if (!a.host.empty()) cfg.service.host = a.host;
  if (a.port >= 0) cfg.service.port = a.port;
  if (!a.data_dir.empty()) cfg.service.data_dir = a.data_dir;
  cfg.service.max_concurrency = ctx.globals.max_concurrency;
  const std::string host = cfg.service.host;
  const int port = cfg.service.port;
  service::Service svc(std::move(cfg));
  service::HttpServer server(svc);
  ctx.log("serving on http://" + host + ":" + std::to_string(port));
  server.run(host, port);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Korean GEC evaluation and serving toolkit", "hgec"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "hgec 0.1.0");

  Context ctx{out, err, {}};
  app.add_option("--seed", ctx.globals.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--max-concurrency", ctx.globals.max_concurrency, "Cap on concurrent engine and judge calls")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  const auto fraction_check = CLI::Validator(
      [](std::string& s) {
        try {
          const auto f = corpus::Fraction::parse(s);
          if (f.numerator == 0 || f.numerator >= f.denominator) return std::string("must lie strictly between 0 and 1");
        } catch (const Error& e) {
          return std::string(e.what());
        }
        return std::string();
      },
      "FRACTION");

  PreprocessArgs pre;
  auto* sub_pre = app.add_subcommand("preprocess", "Clean, filter and deduplicate a raw corpus");
  sub_pre->add_option("--in", pre.in, "Input corpus (.jsonl or .tsv)")->required()->check(CLI::ExistingFile);
  sub_pre->add_option("--format", pre.format, "Input format (default: from extension)")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  sub_pre->add_option("--source", pre.source, "Corpus source tag")->check(CLI::IsMember({"nikl", "aihub", "other"}));
  sub_pre->add_option("--section", pre.section, "Section tag for rows without one (\"asr\" marks speech data)");
  sub_pre->add_option("--out", pre.out, "Cleaned JSONL (default: <in>.clean.jsonl)");
  sub_pre->add_option("--drop-report", pre.drops, "JSONL of dropped ids and reasons");
  sub_pre->add_option("--rules", pre.rules, "Comma-separated rules to apply")->capture_default_str();
  sub_pre->add_option("--dedup", pre.dedup, "Typo-variant policy")
      ->check(CLI::IsMember({"keep-first", "drop-group"}))
      ->capture_default_str();
  sub_pre->add_option("--emoji-ranges", pre.emoji_ranges, "Emoji range file overriding the defaults")
      ->check(CLI::ExistingFile);
  sub_pre->add_flag("--json", pre.json, "Machine-readable summary");

  SplitArgs sp;
  auto* sub_split = app.add_subcommand("split", "Seeded train/test split");
  sub_split->add_option("--in", sp.in, "Input pairs JSONL")->required()->check(CLI::ExistingFile);
  sub_split->add_option("--test-fraction", sp.fraction, "Test share as a decimal or p/q")
      ->check(fraction_check)
      ->capture_default_str();
  sub_split->add_option("--train-out", sp.train_out, "Default: <in>.train.jsonl");
  sub_split->add_option("--test-out", sp.test_out, "Default: <in>.test.jsonl");
  sub_split->add_flag("--json", sp.json, "Machine-readable summary");

  CorrectArgs co;
  auto* sub_correct = app.add_subcommand("correct", "Run a correction engine over a pairs file");
  sub_correct->add_option("--in", co.in, "Input pairs JSONL")->required()->check(CLI::ExistingFile);
  sub_correct->add_option("--engine", co.engine, "Engine id from the config")->capture_default_str();
  sub_correct->add_option("--config", co.config, "Toolkit INI config")->check(CLI::ExistingFile);
  sub_correct->add_option("--out", co.out, "Records JSONL (default: <in>.<engine>.records.jsonl)");
  sub_correct->add_option("--hyp-out", co.hyp_out, "Plain-text hypotheses, one per input row");
  sub_correct->add_flag("--json", co.json, "Machine-readable summary");

  EvalArgs ev;
  auto* sub_eval = app.add_subcommand("eval", "Corpus BLEU and match rate");
  sub_eval->add_option("--hyp", ev.hyp, "Hypotheses, one per line")->required()->check(CLI::ExistingFile);
  sub_eval->add_option("--ref", ev.ref, "References, one per line")->required()->check(CLI::ExistingFile);
  sub_eval->add_flag("--normalize", ev.normalize, "Canonicalize Hangul before scoring");
  sub_eval->add_flag("--smooth", ev.smooth, "Add-one smoothing for orders 2-4");
  sub_eval->add_option("--out", ev.out, "Write the JSON report here");
  sub_eval->add_flag("--json", ev.json, "Machine-readable report on stdout");

  JudgeArgs ju;
  auto* sub_judge = app.add_subcommand("judge", "Reference-guided error typing of correction records");
  sub_judge->add_option("--records", ju.records, "Correction records JSONL")->required()->check(CLI::ExistingFile);
  sub_judge->add_option("--pairs", ju.pairs, "Reference pairs JSONL")->required()->check(CLI::ExistingFile);
  sub_judge->add_option("--judge", ju.judge, "\"mock\" or a chat_llm engine id")->capture_default_str();
  sub_judge->add_option("--config", ju.config, "Toolkit INI config")->check(CLI::ExistingFile);
  sub_judge->add_option("--run-id", ju.run_id, "Verdict run id")->capture_default_str();
  sub_judge->add_option("--out", ju.out, "Verdicts JSONL (default: <records>.verdicts.jsonl)");
  sub_judge->add_option("--csv", ju.csv, "Error distribution CSV");
  sub_judge->add_option("--system", ju.system, "CSV column name (default: the records' system id)");
  sub_judge->add_flag("--include-short", ju.include_short, "Report SHORT alongside the eleven table codes");
  sub_judge->add_flag("--json", ju.json, "Machine-readable summary");

  VocabStatsArgs vs;
  auto* sub_vstats = app.add_subcommand("vocab-stats", "Tokenizer coverage statistics for a corpus");
  sub_vstats->add_option("--vocab", vs.vocab, "Vocab TSV (token<TAB>score)")->required()->check(CLI::ExistingFile);
  sub_vstats->add_option("--in", vs.in, "Pairs JSONL")->required()->check(CLI::ExistingFile);
  sub_vstats->add_option("--required-out", vs.required_out, "Required syllables, one \"char<TAB>count\" per line");
  sub_vstats->add_option("--min-count", vs.min_count, "Syllables must occur more often than this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_vstats->add_flag("--json", vs.json, "Machine-readable report");

  VocabMergeArgs vm;
  auto* sub_vmerge = app.add_subcommand("vocab-merge", "Append donor tokens missing from a base vocab");
  sub_vmerge->add_option("--base", vm.base, "Base vocab TSV")->required()->check(CLI::ExistingFile);
  sub_vmerge->add_option("--donor", vm.donor, "Donor vocab TSV")->required()->check(CLI::ExistingFile);
  sub_vmerge->add_option("--out", vm.out, "Merged vocab TSV")->required();
  sub_vmerge->add_option("--plan-out", vm.plan_out, "Merge plan JSON with the transferred tokens");
  sub_vmerge->add_flag("--json", vm.json, "Machine-readable summary");

  std::string model_size, manifest_out;
  auto* sub_manifest = app.add_subcommand("manifest", "Emit a fine-tuning configuration");
  sub_manifest->add_option("--model-size", model_size, "600M or 3.3B")
      ->required()
      ->check(CLI::IsMember({"600M", "3.3B"}, CLI::ignore_case));
  sub_manifest->add_option("--out", manifest_out, "Default: training-<size>.cfg");

  ServeArgs sv;
  auto* sub_serve = app.add_subcommand("serve", "Run the HTTP service");
  sub_serve->add_option("--config", sv.config, "Toolkit INI config")->check(CLI::ExistingFile);
  sub_serve->add_option("--host", sv.host, "Override [service] host");
  sub_serve->add_option("--port", sv.port, "Override [service] port")->check(CLI::Range(0, 65535));
  sub_serve->add_option("--data-dir", sv.data_dir, "Override [service] data_dir");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (sub_pre->parsed()) return cmd_preprocess(ctx, pre);
    if (sub_split->parsed()) return cmd_split(ctx, sp);
    if (sub_correct->parsed()) return cmd_correct(ctx, co);
    if (sub_eval->parsed()) return cmd_eval(ctx, ev);
    if (sub_judge->parsed()) return cmd_judge(ctx, ju);
    if (sub_vstats->parsed()) return cmd_vocab_stats(ctx, vs);
    if (sub_vmerge->parsed()) return cmd_vocab_merge(ctx, vm);
    if (sub_manifest->parsed()) return cmd_manifest(ctx, model_size, manifest_out);
    if (sub_serve->parsed()) return cmd_serve(ctx, sv);
  } catch (const UsageError& e) {
    ctx.log(e.what());
    return kUsage;
  } catch (const std::exception& e) {
    ctx.log(e.what());
    return kFailure;
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace hgec::cli
