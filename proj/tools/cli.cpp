/**
 * Copyright 2026 The vcrobust Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vcrobust/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vcrobust/analysis.hpp"
#include "vcrobust/audio.hpp"
#include "vcrobust/augment.hpp"
#include "vcrobust/error.hpp"
#include "vcrobust/evalsvc.hpp"
#include "vcrobust/features.hpp"
#include "vcrobust/parallel.hpp"
#include "vcrobust/rng.hpp"
#include "vcrobust/suite.hpp"

namespace vcrobust::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// key=value records on stderr. Values with spaces, quotes or '=' are quoted.
class Log {
 public:
  Log(std::ostream& err, int verbosity) : err_(err), verbosity_(verbosity) {}

  using Fields = std::vector<std::pair<std::string, std::string>>;

  void info(const std::string& event, const Fields& fields = {}) const { emit("info", event, fields); }
  void error(const std::string& event, const Fields& fields = {}) const { emit("error", event, fields); }
  void debug(const std::string& event, const Fields& fields = {}) const {
    if (verbosity_ > 0) emit("debug", event, fields);
  }
  bool verbose() const { return verbosity_ > 0; }

 private:
  static std::string quote(const std::string& v) {
    if (!v.empty() && v.find_first_of(" \t\"=\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') q += '\\';
      q += c == '\n' ? ' ' : c;
    }
    return q + '"';
  }

  void emit(const char* level, const std::string& event, const Fields& fields) const {
    std::lock_guard lock(mutex_);
    err_ << "level=" << level << " event=" << event;
    for (const auto& [k, v] : fields) err_ << ' ' << k << '=' << quote(v);
    err_ << '\n';
    err_.flush();
  }

  std::ostream& err_;
  int verbosity_;
  mutable std::mutex mutex_;
};

int exit_for(const Error& e) { return static_cast<int>(classify(e.code())); }

// Settings read from the --config file. Flags given on the command line win.
struct FileConfig {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::string> chain_config;
  std::optional<features::MelConfig> mel;
  std::optional<std::size_t> n_pairs;
  std::optional<std::vector<std::string>> models;
  std::optional<int> sample_rate;
  std::optional<double> bin_width;
  std::optional<int> ddof;
  fs::path base_dir;
};

FileConfig load_file_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, path.string() + ": expected a JSON object");
  static const std::set<std::string> known = {"seed", "jobs", "chain_config", "mel", "n_pairs",
                                              "models", "sample_rate", "bin_width", "ddof"};
  FileConfig fc;
  fc.base_dir = path.parent_path();
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, path.string() + ": unknown key '" + key + "'");
    }
    if (j.contains("seed")) fc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) fc.jobs = j.at("jobs").get<unsigned>();
    if (j.contains("chain_config")) fc.chain_config = j.at("chain_config").get<std::string>();
    if (j.contains("mel")) fc.mel = j.at("mel").get<features::MelConfig>();
    if (j.contains("n_pairs")) fc.n_pairs = j.at("n_pairs").get<std::size_t>();
    if (j.contains("models")) fc.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("sample_rate")) fc.sample_rate = j.at("sample_rate").get<int>();
    if (j.contains("bin_width")) fc.bin_width = j.at("bin_width").get<double>();
    if (j.contains("ddof")) fc.ddof = j.at("ddof").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return fc;
}

template <typename T>
void apply_default(const CLI::Option* opt, T& target, const std::optional<T>& from_file) {
  if (opt->count() == 0 && from_file) target = *from_file;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_relative() ? base / p : p; }

struct InputClip {
  std::string clip_id;
  fs::path path;
};

// A WAV file, a directory of WAVs (recursive), or a list file with one path per line.
std::vector<InputClip> collect_inputs(const fs::path& input) {
  std::vector<fs::path> paths;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::recursive_directory_iterator(input)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (entry.is_regular_file() && ext == ".wav") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
  } else if (!fs::exists(input)) {
    throw Error(ErrorCode::IoFailure, "input not found: " + input.string());
  } else if (input.extension() == ".wav" || input.extension() == ".WAV") {
    paths.push_back(input);
  } else {
    std::ifstream in(input);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open list " + input.string());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      paths.push_back(resolve(input.parent_path(), line));
    }
  }
  if (paths.empty()) throw Error(ErrorCode::EmptyManifest, "no input clips under " + input.string());
  std::vector<InputClip> clips;
  std::set<std::string> ids;
  for (const auto& p : paths) {
    auto id = p.stem().string();
    if (!ids.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate clip id '" + id + "'");
    clips.push_back({id, p});
  }
  return clips;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

fs::path manifest_path_for(const fs::path& p) { return fs::is_directory(p) ? p / "manifest.json" : p; }

// ---------------------------------------------------------------------------

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  int verbosity = 0;
  std::string config_path;
  CLI::Option* seed_opt = nullptr;
};

struct AugmentArgs {
  std::string input;
  std::string out_dir;
  std::string chain_config;
  std::string encoding = "keep";
  unsigned jobs = default_jobs();
  CLI::Option* chain_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

int cmd_augment(const Globals& g, AugmentArgs a, const FileConfig& fc, std::ostream& out, const Log& log) {
  fs::path chain_path = a.chain_config;
  if (a.chain_opt->count() == 0 && fc.chain_config) chain_path = resolve(fc.base_dir, *fc.chain_config);
  if (chain_path.empty()) throw Error(ErrorCode::InvalidArgument, "--chain-config is required");
  apply_default(a.jobs_opt, a.jobs, fc.jobs);

  const auto cfg = augment::load_chain_config(chain_path);
  const auto bank = augment::NoiseBank::from_files(cfg.noise_bank, chain_path.parent_path());
  const auto clips = collect_inputs(a.input);
  std::optional<audio::WavEncoding> forced;
  if (a.encoding != "keep") forced = audio::parse_wav_encoding(a.encoding);

  log.debug("config", {{"seed", std::to_string(g.seed)},
                       {"jobs", std::to_string(a.jobs)},
                       {"chain_config", chain_path.string()},
                       {"encoding", a.encoding},
                       {"clips", std::to_string(clips.size())},
                       {"rng", std::string(SeededRng::kAlgorithm)}});

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + a.out_dir + ": " + ec.message());

  std::vector<std::optional<json>> records(clips.size());
  std::vector<std::string> failures(clips.size());
  std::vector<int> codes(clips.size(), 0);
  parallel_for(clips.size(), a.jobs, [&](std::size_t i) {
    const auto& clip = clips[i];
    try {
      if (!fs::exists(clip.path)) throw Error(ErrorCode::IoFailure, "missing file " + clip.path.string());
      audio::WavInfo info;
      const auto buf = audio::read_wav(clip.path, &info);
      auto result = augment::augment_clip(buf, cfg, bank, g.seed, clip.clip_id);
      audio::write_wav(result.audio, fs::path(a.out_dir) / (clip.clip_id + ".wav"), forced.value_or(info.encoding));
      records[i] = json(result.record);
    } catch (const Error& e) {
      failures[i] = e.what();
      codes[i] = exit_for(e);
    } catch (const std::exception& e) {
      failures[i] = e.what();
      codes[i] = kData;
    }
  });

  std::string lines;
  std::size_t ok = 0;
  for (const auto& r : records) {
    if (!r) continue;
    lines += r->dump() + "\n";
    ++ok;
  }
  write_text(fs::path(a.out_dir) / "chains.jsonl", lines);

  int worst = kOk;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (failures[i].empty()) continue;
    log.error("clip_failed", {{"clip", clips[i].clip_id}, {"path", clips[i].path.string()}, {"error", failures[i]}});
    // Per-clip failures are data errors for the batch as a whole.
    worst = std::max(worst, static_cast<int>(kData));
  }
  out << "augmented " << ok << " of " << clips.size() << " clips into " << a.out_dir << "\n";
  log.info("augment_done", {{"ok", std::to_string(ok)}, {"failed", std::to_string(clips.size() - ok)}});
  return worst;
}

struct FeaturesArgs {
  std::string input;
  std::string out;
  std::string mel_config;
  std::string format = "bin";
  CLI::Option* mel_opt = nullptr;
};

int cmd_features(FeaturesArgs a, const FileConfig& fc, std::ostream& out, const Log& log) {
  features::MelConfig cfg;
  if (!a.mel_config.empty()) {
    std::ifstream in(a.mel_config);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + a.mel_config);
    try {
      cfg = json::parse(in).get<features::MelConfig>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, a.mel_config + ": " + e.what());
    }
  } else if (fc.mel) {
    cfg = *fc.mel;
  }
  features::validate(cfg);
  auto buf = audio::read_wav(a.input);
  if (buf.sample_rate() != cfg.sample_rate) {
    log.info("resample", {{"from", std::to_string(buf.sample_rate())}, {"to", std::to_string(cfg.sample_rate)}});
    buf = audio::resample(buf, cfg.sample_rate);
  }
  log.debug("config", {{"mel", json(cfg).dump()}});
  const auto mel = features::log_mel(buf, cfg);
  if (a.format == "json") {
    json j = {{"config", cfg}, {"frames", mel.matrix.rows}, {"n_mels", mel.matrix.cols}, {"values", mel.matrix.values}};
    write_text(a.out, j.dump() + "\n");
  } else {
    features::write_mel_binary(mel, a.out);
  }
  out << "wrote " << mel.matrix.rows << "x" << mel.matrix.cols << " log-mel matrix to " << a.out << "\n";
  return kOk;
}

struct BuildArgs {
  std::string tsv, clips_dir, vctk_root, speaker_info, mapping;
  bool anonymize = false;
  std::string target;
  std::size_t n_pairs = 64;
  std::string chain_config;
  std::string out_dir;
  std::string models;
  std::string sources;
  unsigned jobs = default_jobs();
  int sample_rate = 16000;
  std::string suite_id;
  CLI::Option *n_pairs_opt = nullptr, *chain_opt = nullptr, *models_opt = nullptr, *jobs_opt = nullptr,
              *rate_opt = nullptr;
};

int cmd_build_suite(const Globals& g, BuildArgs a, const FileConfig& fc, std::ostream& out, const Log& log) {
  apply_default(a.n_pairs_opt, a.n_pairs, fc.n_pairs);
  apply_default(a.jobs_opt, a.jobs, fc.jobs);
  apply_default(a.rate_opt, a.sample_rate, fc.sample_rate);
  fs::path chain_path = a.chain_config;
  if (a.chain_opt->count() == 0 && fc.chain_config) chain_path = resolve(fc.base_dir, *fc.chain_config);

  suite::IngestOptions ingest;
  ingest.anonymize = a.anonymize;
  if (!a.mapping.empty()) ingest.mapping = suite::GroupMapping::load(a.mapping);

  suite::IngestResult corpus;
  if (!a.tsv.empty()) {
    const fs::path clips_dir = a.clips_dir.empty() ? fs::path(a.tsv).parent_path() / "clips" : fs::path(a.clips_dir);
    corpus = suite::ingest_commonvoice(a.tsv, clips_dir, ingest);
  } else if (!a.vctk_root.empty()) {
    const fs::path info = a.speaker_info.empty() ? fs::path(a.vctk_root) / "speaker-info.txt" : fs::path(a.speaker_info);
    corpus = suite::ingest_vctk(a.vctk_root, info, ingest);
  } else {
    throw Error(ErrorCode::InvalidArgument, "one of --tsv or --vctk-root is required");
  }
  log.info("ingested", {{"clips", std::to_string(corpus.records.size())},
                        {"skipped_missing", std::to_string(corpus.skipped_missing)},
                        {"unknown_speakers", std::to_string(corpus.unknown_speakers)}});

  suite::BuildOptions opts;
  opts.n_pairs = a.n_pairs;
  opts.target_speaker_id = a.target;
  opts.seed = g.seed;
  opts.out_dir = a.out_dir;
  opts.jobs = a.jobs;
  opts.sample_rate = a.sample_rate;
  opts.suite_id = a.suite_id;
  if (!chain_path.empty()) {
    opts.chain_config = augment::load_chain_config(chain_path);
    opts.noise_base_dir = chain_path.parent_path();
  }
  if (a.models_opt->count() > 0) {
    opts.model_ids = split_csv(a.models);
  } else if (fc.models) {
    opts.model_ids = *fc.models;
  }
  opts.source_speakers = split_csv(a.sources);
  log.debug("config", {{"seed", std::to_string(g.seed)},
                       {"n_pairs", std::to_string(opts.n_pairs)},
                       {"jobs", std::to_string(opts.jobs)},
                       {"sample_rate", std::to_string(opts.sample_rate)},
                       {"chain_config", json(opts.chain_config).dump()}});

  const auto manifest = suite::build_suite(corpus.records, opts);

  std::set<std::string> speakers;
  for (const auto& p : manifest.pairs) speakers.insert(p.source_clip.speaker_id);
  out << "suite " << manifest.suite_id << ": " << manifest.pairs.size() << " pairs from " << speakers.size()
      << " speakers, target " << manifest.target_speaker_id << "\n";
  if (manifest.metadata.contains("effect_counts")) {
    out << "effects:";
    for (const auto& [name, count] : manifest.metadata.at("effect_counts").items()) out << ' ' << name << '=' << count;
    out << "\n";
  }
  out << "models: ";
  for (std::size_t i = 0; i < manifest.model_ids.size(); ++i) out << (i ? "," : "") << manifest.model_ids[i];
  out << "\nmanifest: " << (fs::path(a.out_dir) / "manifest.json").string() << "\n";
  return kOk;
}

struct AttachArgs {
  std::string suite_dir, model, outputs;
};

int cmd_attach(const AttachArgs& a, std::ostream& out, const Log& log) {
  const auto manifest_file = manifest_path_for(a.suite_dir);
  auto manifest = suite::load_manifest(manifest_file);
  suite::attach_outputs(manifest, manifest_file.parent_path(), a.model, a.outputs);
  suite::save_manifest(manifest, manifest_file);
  log.info("attached", {{"model", a.model}, {"pairs", std::to_string(manifest.pairs.size())}});
  out << "attached " << manifest.pairs.size() << " outputs for " << a.model << "\n";
  return kOk;
}

struct ServeArgs {
  std::string suite_dir, store, host = "127.0.0.1", admin_token, static_dir, port_file;
  int port = 8080;
  bool reference_clip = false;
};

int cmd_serve(const ServeArgs& a, const Log& log) {
  const auto manifest_file = manifest_path_for(a.suite_dir);
  const auto suite_dir = manifest_file.parent_path();
  const fs::path store = a.store.empty() ? suite_dir / "ratings.ndjson" : fs::path(a.store);

  evalsvc::ServiceOptions opts;
  opts.reference_clip = a.reference_clip;
  opts.admin_token = a.admin_token;
  if (opts.admin_token.empty()) {
    if (const char* env = std::getenv("VCROBUST_ADMIN_TOKEN")) opts.admin_token = env;
  }
  evalsvc::EvalService service(suite::load_manifest(manifest_file), suite_dir, store, opts);
  const auto stats = service.recover();
  log.info("recovered", {{"sessions", std::to_string(stats.sessions)},
                         {"ratings", std::to_string(stats.ratings)},
                         {"torn_lines", std::to_string(stats.torn_lines)},
                         {"foreign_events", std::to_string(stats.foreign_events)}});
  if (opts.admin_token.empty()) log.info("export_disabled", {{"reason", "no admin token"}});

  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  evalsvc::HttpServer server(service, static_dir);

  // Block termination signals before httplib starts its worker threads so
  // only the waiter below ever sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const int port = server.bind(a.host, a.port);
  if (!a.port_file.empty()) write_text(a.port_file, std::to_string(port) + "\n");
  log.info("listening", {{"host", a.host}, {"port", std::to_string(port)}, {"items", std::to_string(service.item_count())}});

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (!done) log.info("shutdown", {{"signal", std::to_string(sig)}});
    server.stop();
  });
  server.listen();
  done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  return kOk;
}

struct ExportArgs {
  std::string store, out;
};

int cmd_export(const ExportArgs& a, std::ostream& out, const Log& log) {
  const auto records = evalsvc::export_ratings(a.store);
  const auto text = evalsvc::ratings_ndjson(records);
  if (a.out.empty() || a.out == "-") {
    out << text;
  } else {
    write_text(a.out, text);
  }
  log.info("exported", {{"records", std::to_string(records.size())}});
  return kOk;
}

struct AnalyzeArgs {
  std::string ratings, suite, out_dir;
  double bin_width = 0.5;
  int ddof = 0;
  CLI::Option *bin_opt = nullptr, *ddof_opt = nullptr;
};

int cmd_analyze(AnalyzeArgs a, const FileConfig& fc, std::ostream& out, const Log& log) {
  apply_default(a.bin_opt, a.bin_width, fc.bin_width);
  apply_default(a.ddof_opt, a.ddof, fc.ddof);
  const auto manifest = suite::load_manifest(manifest_path_for(a.suite));
  const auto table = analysis::join(evalsvc::read_ratings(a.ratings), manifest);
  const auto matrix = analysis::pcc_matrix(table);
  std::vector<analysis::GroupStats> stats;
  for (auto grouping : {analysis::Grouping::All, analysis::Grouping::Gender, analysis::Grouping::Demographic}) {
    stats.push_back(analysis::group_stats(table, grouping, a.ddof));
  }
  const auto hist = analysis::speaker_histograms(table, a.bin_width);
  const auto bundle = analysis::render_report(matrix, stats, hist, a.out_dir, {a.bin_width, a.ddof});

  out << analysis::render_pcc_table(matrix) << "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) out << "A" << i + 1 << " = " << matrix.annotators[i] << "\n";
  out << "\n";
  for (const auto& gs : stats) {
    out << "[" << analysis::to_string(gs.grouping) << "]\n";
    for (const auto& r : gs.rows) {
      char line[256];
      std::snprintf(line, sizeof line, "  %-10s %-12s mean=%.3f std=%.3f n=%zu\n", r.group.c_str(), r.model_id.c_str(),
                    r.mean, r.std, r.n);
      out << line;
    }
    for (const auto& n : gs.notices) log.info("group_omitted", {{"grouping", std::string(analysis::to_string(gs.grouping))}, {"detail", n}});
  }
  log.info("report_written", {{"dir", a.out_dir}, {"files", std::to_string(bundle.files.size())}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voice-conversion robustness toolkit: noising, evaluation suites, listening tests and analysis",
               "vcrobust"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Global 64-bit seed (default " + std::to_string(kDefaultSeed) + ")");
  app.add_flag("-v,--verbose", g.verbosity, "Verbose logging; prints the effective configuration");
  app.add_option("--config", g.config_path, "JSON file with defaults (seed, jobs, chain_config, mel, n_pairs, models, "
                                            "sample_rate, bin_width, ddof); flags take precedence");

  AugmentArgs aug;
  auto* sc_aug = app.add_subcommand("augment", "Apply seeded random effect chains to clips");
  sc_aug->add_option("-i,--input", aug.input, "WAV file, directory of WAVs, or list file of paths")->required();
  sc_aug->add_option("-o,--out", aug.out_dir, "Output directory (WAVs plus chains.jsonl)")->required();
  aug.chain_opt = sc_aug->add_option("-c,--chain-config", aug.chain_config, "Effect chain config JSON");
  sc_aug->add_option("--encoding", aug.encoding, "Output encoding: keep, pcm16, pcm24, float32")
      ->check(CLI::IsMember({"keep", "pcm16", "pcm24", "float32"}));
  aug.jobs_opt = sc_aug->add_option("-j,--jobs", aug.jobs, "Worker threads (default: CPU count)")
                     ->check(CLI::PositiveNumber);

  FeaturesArgs feat;
  auto* sc_feat = app.add_subcommand("features", "Compute a log-mel matrix for one WAV");
  sc_feat->add_option("-i,--input", feat.input, "Input WAV")->required();
  sc_feat->add_option("-o,--out", feat.out, "Output path")->required();
  feat.mel_opt = sc_feat->add_option("--mel-config", feat.mel_config, "Mel config JSON");
  sc_feat->add_option("--format", feat.format, "bin (default) or json")->check(CLI::IsMember({"bin", "json"}));

  BuildArgs bld;
  auto* sc_bld = app.add_subcommand("build-suite", "Ingest a corpus and build a noised evaluation suite");
  auto* tsv = sc_bld->add_option("--tsv", bld.tsv, "CommonVoice-style TSV");
  sc_bld->add_option("--clips-dir", bld.clips_dir, "CommonVoice clip directory (default: <tsv dir>/clips)")
      ->needs(tsv);
  auto* vctk = sc_bld->add_option("--vctk-root", bld.vctk_root, "VCTK-style wav tree");
  sc_bld->add_option("--speaker-info", bld.speaker_info, "VCTK speaker-info table (default: <root>/speaker-info.txt)")
      ->needs(vctk);
  tsv->excludes(vctk);
  sc_bld->add_option("--mapping", bld.mapping, "Demographic group mapping JSON");
  sc_bld->add_flag("--anonymize", bld.anonymize, "Replace clip ids with path hashes");
  sc_bld->add_option("-t,--target", bld.target, "Target speaker id")->required();
  bld.n_pairs_opt = sc_bld->add_option("-n,--n-pairs", bld.n_pairs, "Number of evaluation pairs (default 64)")
                        ->check(CLI::PositiveNumber);
  bld.chain_opt = sc_bld->add_option("-c,--chain-config", bld.chain_config, "Effect chain config JSON");
  sc_bld->add_option("-o,--out", bld.out_dir, "Suite output directory")->required();
  bld.models_opt = sc_bld->add_option("--models", bld.models, "Comma-separated model ids (default model_1..model_4)");
  sc_bld->add_option("--sources", bld.sources, "Comma-separated source speakers (default: all but the target)");
  bld.jobs_opt = sc_bld->add_option("-j,--jobs", bld.jobs, "Worker threads (default: CPU count)")
                     ->check(CLI::PositiveNumber);
  bld.rate_opt = sc_bld->add_option("--sample-rate", bld.sample_rate, "Suite sample rate (default 16000)")
                     ->check(CLI::PositiveNumber);
  sc_bld->add_option("--suite-id", bld.suite_id, "Suite id (default suite-<seed>)");

  AttachArgs att;
  auto* sc_att = app.add_subcommand("attach-outputs", "Register converted outputs of one model with a suite");
  sc_att->add_option("-s,--suite", att.suite_dir, "Suite directory or manifest.json")->required();
  sc_att->add_option("-m,--model", att.model, "Model id")->required();
  sc_att->add_option("--outputs", att.outputs, "Directory holding <pair_id>.wav")->required();

  ServeArgs srv;
  auto* sc_srv = app.add_subcommand("serve", "Run the listening-test service");
  sc_srv->add_option("-s,--suite", srv.suite_dir, "Suite directory or manifest.json")->required();
  sc_srv->add_option("--store", srv.store, "Rating store (default <suite>/ratings.ndjson)");
  sc_srv->add_option("--host", srv.host, "Bind address (default 127.0.0.1)");
  sc_srv->add_option("-p,--port", srv.port, "Port; 0 picks a free one (default 8080)")->check(CLI::Range(0, 65535));
  sc_srv->add_option("--admin-token", srv.admin_token, "Token for /api/export (or VCROBUST_ADMIN_TOKEN)");
  sc_srv->add_flag("--reference-clip", srv.reference_clip, "Offer the noised source clip with every item");
  sc_srv->add_option("--static", srv.static_dir, "Directory served at / (web UI build)");
  sc_srv->add_option("--port-file", srv.port_file, "Write the bound port to this file");

  ExportArgs exp;
  auto* sc_exp = app.add_subcommand("export", "Export authoritative ratings from a store file");
  sc_exp->add_option("--store", exp.store, "Rating store")->required();
  sc_exp->add_option("-o,--out", exp.out, "Output NDJSON (default stdout)");

  AnalyzeArgs ana;
  auto* sc_ana = app.add_subcommand("analyze", "Agreement and score statistics report");
  sc_ana->add_option("-r,--ratings", ana.ratings, "Exported ratings NDJSON")->required();
  sc_ana->add_option("-s,--suite", ana.suite, "Suite directory or manifest.json")->required();
  sc_ana->add_option("-o,--out", ana.out_dir, "Report directory")->required();
  ana.bin_opt = sc_ana->add_option("--bin-width", ana.bin_width, "Histogram bin width (default 0.5)");
  ana.ddof_opt = sc_ana->add_option("--ddof", ana.ddof, "0 = population std (default), 1 = sample std");

  std::vector<const char*> argv{"vcrobust"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "level=error event=usage error=\"" << e.what() << "\"\n";
    for (auto* sub : app.get_subcommands()) {
      if (sub->parsed()) err << sub->help();
    }
    return kUsage;
  }

  Log log(err, g.verbosity);
  try {
    FileConfig fc;
    if (!g.config_path.empty()) fc = load_file_config(g.config_path);
    apply_default(g.seed_opt, g.seed, fc.seed);

    if (sc_aug->parsed()) return cmd_augment(g, aug, fc, out, log);
    if (sc_feat->parsed()) return cmd_features(feat, fc, out, log);
    if (sc_bld->parsed()) return cmd_build_suite(g, bld, fc, out, log);
    if (sc_att->parsed()) return cmd_attach(att, out, log);
    if (sc_srv->parsed()) return cmd_serve(srv, log);
    if (sc_exp->parsed()) return cmd_export(exp, out, log);
    if (sc_ana->parsed()) return cmd_analyze(ana, fc, out, log);
  } catch (const Error& e) {
    log.error("failed", {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}});
    return exit_for(e);
  } catch (const fs::filesystem_error& e) {
    log.error("failed", {{"code", "IoFailure"}, {"message", e.what()}});
    return kIo;
  } catch (const std::exception& e) {
    log.error("failed", {{"code", "Internal"}, {"message", e.what()}});
    return kData;
  }
  return kUsage;
}

}  // namespace vcrobust::cli
