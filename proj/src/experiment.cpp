#include "seismic_htm/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "seismic_htm/binary_io.hpp"
#include "seismic_htm/errors.hpp"
#include "seismic_htm/step_log.hpp"

namespace seismic_htm {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw FormatError("write failed for " + path.string());
}

} // namespace

Experiment::Experiment(const HtmConfig& cfg) : cfg_(cfg), gen_(cfg.synth), model_(cfg) {}

Experiment::Experiment(HtmConfig cfg, SignalGenerator gen, DetectorModel model)
    : cfg_(std::move(cfg)), gen_(std::move(gen)), model_(std::move(model)) {}

Experiment::Step Experiment::advance() {
  Step s;
  s.sample = gen_.next_sample();
  s.record = model_.step(s.sample.value, s.sample.jitter_active);
  return s;
}

std::vector<std::uint8_t> Experiment::checkpoint_bytes() const {
  BinaryWriter w;
  for (char c : kCheckpointMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.u64(cfg_.hash());
  w.str(cfg_.to_json());
  model_.save(w);
  gen_.save(w);
  auto bytes = w.bytes();
  const auto sum = fnv1a(bytes.data(), bytes.size());
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(sum >> (8 * i)));
  return bytes;
}

void Experiment::save_checkpoint(const fs::path& path) const {
  const auto bytes = checkpoint_bytes();
  // Write beside the target and rename so a crash never leaves a torn file.
  const fs::path tmp = path.string() + ".tmp";
  {
    auto out = open_out(tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    check_written(out, tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot write " + path.string() + ": " + ec.message());
}

Experiment Experiment::from_checkpoint(std::span<const std::uint8_t> bytes,
                                       const HtmConfig* expected) {
  if (bytes.size() < sizeof kCheckpointMagic + 4 + 8 ||
      !std::equal(std::begin(kCheckpointMagic), std::end(kCheckpointMagic), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  BinaryReader header(bytes.data() + sizeof kCheckpointMagic, bytes.size() - sizeof kCheckpointMagic);
  const auto version = header.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint format version " + std::to_string(version) +
                      " is not supported (this build reads version " +
                      std::to_string(kCheckpointVersion) + ")");
  }

  const std::size_t body = bytes.size() - 8;
  BinaryReader tail(bytes.data() + body, 8);
  if (tail.u64() != fnv1a(bytes.data(), body)) throw FormatError("checkpoint checksum mismatch");

  BinaryReader in(bytes.data() + sizeof kCheckpointMagic + 4, body - sizeof kCheckpointMagic - 4);
  const auto stored_hash = in.u64();
  HtmConfig cfg;
  try {
    cfg = HtmConfig::from_json(in.str());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint carries an invalid config: ") + e.what());
  }
  if (cfg.hash() != stored_hash) throw FormatError("checkpoint config hash does not match its config");
  if (expected && expected->hash() != stored_hash) {
    throw ConfigError("<config>", "checkpoint was written with config " + hex64(stored_hash) +
                                      ", refusing to resume under config " +
                                      hex64(expected->hash()));
  }
  auto model = DetectorModel::load(in, cfg);
  auto gen = SignalGenerator::load(in, cfg.synth);
  if (!in.at_end()) throw FormatError("checkpoint has trailing bytes");
  if (gen.step() != model.steps_seen()) throw FormatError("checkpoint step counters disagree");
  return Experiment(std::move(cfg), std::move(gen), std::move(model));
}

Experiment Experiment::load_checkpoint(const fs::path& path, const HtmConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_checkpoint(bytes, expected);
}

RunSummary run_experiment(Experiment& exp, const RunOptions& opts) {
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw FormatError("cannot create " + opts.out_dir.string() + ": " + ec.message());

  const auto& cfg = exp.config();
  const auto steps_path = opts.out_dir / "steps.csv";
  const auto events_path = opts.out_dir / "events.csv";
  auto steps_out = open_out(steps_path);
  auto events_out = open_out(events_path);
  events_out << "onset,duration,amplitude\n";
  StepLogWriter log(steps_out);

  RunSummary summary;
  std::vector<StepRecord> records;
  records.reserve(opts.steps);
  for (std::uint64_t i = 0; i < opts.steps; ++i) {
    const auto s = exp.advance();
    log.write(s.record);
    if (s.sample.spawned) {
      events_out << s.sample.spawned->onset << ',' << s.sample.spawned->duration << ','
                 << format_real(s.sample.spawned->amplitude) << '\n';
    }
    records.push_back(s.record);
    if (opts.on_window && records.size() % cfg.run.window_len == 0) {
      auto w = window_stats(std::span(records).last(cfg.run.window_len), cfg.run.window_len);
      w.front().window_index = records.size() / cfg.run.window_len;
      opts.on_window(w.front());
    }
    if (opts.checkpoint_every > 0 && exp.steps_done() % opts.checkpoint_every == 0) {
      const auto path = opts.out_dir / ("checkpoint-" + std::to_string(exp.steps_done()) + ".ckpt");
      exp.save_checkpoint(path);
      summary.checkpoints.push_back(path);
    }
  }
  check_written(steps_out, steps_path);
  check_written(events_out, events_path);

  const auto windows = window_stats(records, cfg.run.window_len);
  const auto windows_path = opts.out_dir / "windows.csv";
  auto windows_out = open_out(windows_path);
  write_window_stats(windows_out, windows);
  check_written(windows_out, windows_path);

  nlohmann::json manifest = {
      {"tool_version", kToolVersion},
      {"checkpoint_format", kCheckpointVersion},
      {"config_hash", hex64(cfg.hash())},
      {"seeds", {{"sp", cfg.sp.seed}, {"tm", cfg.tp.seed}, {"synth", cfg.synth.rng_seed}}},
      {"steps", opts.steps},
      {"final_step", exp.steps_done()},
      {"windows", windows.size()},
      {"config", nlohmann::json::parse(cfg.to_json())},
  };
  const auto manifest_path = opts.out_dir / "manifest.json";
  auto manifest_out = open_out(manifest_path);
  manifest_out << manifest.dump(2) << '\n';
  check_written(manifest_out, manifest_path);

  summary.steps = opts.steps;
  summary.windows = windows.size();
  return summary;
}

LearningCurve learning_curve(std::span<const WindowStats> windows, double adapted_limit) {
  LearningCurve c;
  if (windows.empty()) return c;
  c.first_window_anomaly = windows.front().mean_anomaly;
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (windows[i].mean_anomaly <= 0.5 * c.first_window_anomaly) {
      c.half_drop_window = windows[i].window_index;
      break;
    }
  }
  for (std::size_t i = windows.size(); i-- > 0;) {
    if (!(windows[i].mean_anomaly < adapted_limit)) break;
    c.adaptation_window = windows[i].window_index;
  }
  return c;
}

Analysis analyze(std::span<const StepRecord> records, const AnalysisOptions& opts) {
  Analysis a;
  a.detection = detect_events(records, opts.threshold, opts.lag, opts.event_duration);
  a.windows = window_stats(records, opts.window_len);
  a.curve = learning_curve(a.windows);
  return a;
}

void write_analysis(const Analysis& a, std::span<const StepRecord> records,
                    const AnalysisOptions& opts, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw FormatError("cannot create " + out_dir.string() + ": " + ec.message());

  const auto write_slice = [&](const fs::path& path, std::size_t first, std::size_t count) {
    auto out = open_out(path);
    StepLogWriter w(out);
    for (std::size_t i = first; i < std::min(records.size(), first + count); ++i) w.write(records[i]);
    check_written(out, path);
  };
  const std::size_t len = opts.window_len;
  const std::size_t last_full = records.size() >= len ? (records.size() / len - 1) * len : 0;
  write_slice(out_dir / "fig1_cold_start.csv", 0, len);
  write_slice(out_dir / "fig2_adapted.csv", last_full, len);
  write_slice(out_dir / "fig3_prediction.csv", last_full, std::min<std::size_t>(len, 200));
  {
    const auto path = out_dir / "fig4_learning_curve.csv";
    auto out = open_out(path);
    write_window_stats(out, a.windows);
    check_written(out, path);
  }

  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : a.detection.events) {
    events.push_back({{"start", e.start},
                      {"end", e.end},
                      {"detected", e.detected},
                      {"peak_anomaly", e.peak_anomaly}});
  }
  const auto opt = [](const std::optional<std::uint64_t>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json report = {
      {"threshold", opts.threshold},
      {"lag", opts.lag},
      {"steps", records.size()},
      {"events", a.detection.events.size()},
      {"detected", a.detection.detected},
      {"missed", a.detection.missed},
      {"detection_rate", a.detection.detection_rate()},
      {"false_positives", a.detection.false_positive_steps.size()},
      {"noise_steps", a.detection.noise_steps},
      {"false_positives_per_10k", a.detection.false_positives_per_10k},
      {"learning_curve",
       {{"windows", a.windows.size()},
        {"first_window_anomaly", a.curve.first_window_anomaly},
        {"half_drop_window", opt(a.curve.half_drop_window)},
        {"adaptation_window", opt(a.curve.adaptation_window)}}},
      {"event_outcomes", events},
  };
  const auto path = out_dir / "report.json";
  auto out = open_out(path);
  out << report.dump(2) << '\n';
  check_written(out, path);
}

} // namespace seismic_htm
