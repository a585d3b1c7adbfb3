#include "seismic_htm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

using nlohmann::json;

void RunConfig::validate() const {
  if (window_len == 0) throw ConfigError("run.window_len", "must be positive");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("run.threshold", "must be in (0, 1]");
}

void HtmConfig::validate() const {
  sensor.validate();
  sp.validate();
  tp.validate();
  classifier.validate();
  synth.validate();
  run.validate();
  if (sp.input_width != sensor.n) {
    throw ConfigError("sp.input_width", "must equal sensor.n (" + std::to_string(sensor.n) + ")");
  }
  if (tp.column_count != sp.column_count) {
    throw ConfigError("tp.column_count",
                      "must equal sp.column_count (" + std::to_string(sp.column_count) + ")");
  }
  if (classifier.input_width != tp.cell_count()) {
    throw ConfigError("classifier.input_width",
                      "must equal tp.column_count * tp.cells_per_column (" +
                          std::to_string(tp.cell_count()) + ")");
  }
  if (classifier.bucket_count != sensor.bucket_count()) {
    throw ConfigError("classifier.bucket_count",
                      "must equal sensor.n - sensor.w + 1 (" +
                          std::to_string(sensor.bucket_count()) + ")");
  }
}

namespace {

json section_sensor(const EncoderConfig& c) {
  return {{"n", c.n}, {"w", c.w}, {"min", c.min_val}, {"max", c.max_val}, {"clip", c.clip}};
}

json section_sp(const SpConfig& c) {
  return {{"boost_strength", c.boost_strength},
          {"column_count", c.column_count},
          {"global_inhibition", c.global_inhibition},
          {"input_width", c.input_width},
          {"num_active_columns", c.num_active_columns},
          {"potential_pct", c.potential_pct},
          {"seed", c.seed},
          {"syn_perm_active_inc", c.syn_perm_active_inc},
          {"syn_perm_connected", c.syn_perm_connected},
          {"syn_perm_inactive_dec", c.syn_perm_inactive_dec}};
}

json section_tp(const TmConfig& c) {
  return {{"activation_threshold", c.activation_threshold},
          {"cells_per_column", c.cells_per_column},
          {"column_count", c.column_count},
          {"initial_perm", c.initial_perm},
          {"min_threshold", c.min_threshold},
          {"new_synapse_count", c.new_synapse_count},
          {"max_segments_per_cell", c.max_segments_per_cell},
          {"max_synapses_per_segment", c.max_synapses_per_segment},
          {"permanence_inc", c.permanence_inc},
          {"permanence_dec", c.permanence_dec},
          {"predicted_segment_decrement", c.predicted_segment_decrement},
          {"seed", c.seed},
          {"connected_perm", c.connected_perm}};
}

json section_classifier(const ClassifierConfig& c) {
  return {{"alpha", c.alpha},
          {"steps", c.steps},
          {"bucket_count", c.bucket_count},
          {"input_width", c.input_width}};
}

json section_synth(const SynthConfig& c) {
  return {{"p_jitter", c.p_jitter},   {"n_sines", c.n_sines},     {"f_min", c.f_min},
          {"f_max", c.f_max},         {"duration", c.duration},   {"amp_min", c.amp_min},
          {"amp_max", c.amp_max},     {"noise_min", c.noise_min}, {"noise_max", c.noise_max},
          {"rng_seed", c.rng_seed}};
}

json section_run(const RunConfig& c) {
  return {{"total_steps", c.total_steps},
          {"window_len", c.window_len},
          {"threshold", c.threshold},
          {"lag", c.lag}};
}

/// Reads fields out of one JSON object, remembering which keys were used so
/// leftovers can be reported as unknown.
class SectionReader {
public:
  SectionReader(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    obj_ = &root.at(name_);
    if (!obj_->is_object()) throw ConfigError(name_, "must be an object");
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (v->is_boolean()) {
        out = v->get<bool>();
      } else if (v->is_number_unsigned() && v->get<std::uint64_t>() <= 1) {
        out = v->get<std::uint64_t>() == 1;
      } else {
        fail(key, "expected a boolean");
      }
    }
  }
  void read(const char* key, std::uint32_t& out) {
    std::uint64_t wide = out;
    read(key, wide);
    if (wide > 0xFFFFFFFFull) fail(key, "value too large");
    out = static_cast<std::uint32_t>(wide);
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!used_.contains(it.key())) {
        throw ConfigError(name_ + "." + it.key(), "unknown field");
      }
    }
  }

private:
  const json* find(const char* key) {
    used_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }
  [[noreturn]] void fail(const char* key, const std::string& msg) const {
    throw ConfigError(name_ + "." + key, msg);
  }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> used_;
};

} // namespace

std::string HtmConfig::to_json() const {
  json j;
  j["sensor"] = section_sensor(sensor);
  j["sp"] = section_sp(sp);
  j["tp"] = section_tp(tp);
  j["classifier"] = section_classifier(classifier);
  j["synth"] = section_synth(synth);
  j["run"] = section_run(run);
  return j.dump(2) + "\n";
}

HtmConfig HtmConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<document>", "top level must be an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    static const std::string known = "|sensor|sp|tp|classifier|synth|run|";
    if (known.find("|" + it.key() + "|") == std::string::npos) {
      throw ConfigError(it.key(), "unknown section");
    }
  }

  HtmConfig c;
  {
    SectionReader r(root, "sensor");
    r.read("n", c.sensor.n);
    r.read("w", c.sensor.w);
    r.read("min", c.sensor.min_val);
    r.read("max", c.sensor.max_val);
    r.read("clip", c.sensor.clip);
    r.finish();
  }
  {
    SectionReader r(root, "sp");
    r.read("boost_strength", c.sp.boost_strength);
    r.read("column_count", c.sp.column_count);
    r.read("global_inhibition", c.sp.global_inhibition);
    r.read("input_width", c.sp.input_width);
    r.read("num_active_columns", c.sp.num_active_columns);
    r.read("potential_pct", c.sp.potential_pct);
    r.read("seed", c.sp.seed);
    r.read("syn_perm_active_inc", c.sp.syn_perm_active_inc);
    r.read("syn_perm_connected", c.sp.syn_perm_connected);
    r.read("syn_perm_inactive_dec", c.sp.syn_perm_inactive_dec);
    r.finish();
  }
  {
    SectionReader r(root, "tp");
    r.read("activation_threshold", c.tp.activation_threshold);
    r.read("cells_per_column", c.tp.cells_per_column);
    r.read("column_count", c.tp.column_count);
    r.read("initial_perm", c.tp.initial_perm);
    r.read("min_threshold", c.tp.min_threshold);
    r.read("new_synapse_count", c.tp.new_synapse_count);
    r.read("max_segments_per_cell", c.tp.max_segments_per_cell);
    r.read("max_synapses_per_segment", c.tp.max_synapses_per_segment);
    r.read("permanence_inc", c.tp.permanence_inc);
    r.read("permanence_dec", c.tp.permanence_dec);
    r.read("predicted_segment_decrement", c.tp.predicted_segment_decrement);
    r.read("seed", c.tp.seed);
    r.read("connected_perm", c.tp.connected_perm);
    r.finish();
  }
  {
    SectionReader r(root, "classifier");
    r.read("alpha", c.classifier.alpha);
    r.read("steps", c.classifier.steps);
    r.read("bucket_count", c.classifier.bucket_count);
    r.read("input_width", c.classifier.input_width);
    r.finish();
  }
  {
    SectionReader r(root, "synth");
    r.read("p_jitter", c.synth.p_jitter);
    r.read("n_sines", c.synth.n_sines);
    r.read("f_min", c.synth.f_min);
    r.read("f_max", c.synth.f_max);
    r.read("duration", c.synth.duration);
    r.read("amp_min", c.synth.amp_min);
    r.read("amp_max", c.synth.amp_max);
    r.read("noise_min", c.synth.noise_min);
    r.read("noise_max", c.synth.noise_max);
    r.read("rng_seed", c.synth.rng_seed);
    r.finish();
  }
  {
    SectionReader r(root, "run");
    r.read("total_steps", c.run.total_steps);
    r.read("window_len", c.run.window_len);
    r.read("threshold", c.run.threshold);
    r.read("lag", c.run.lag);
    r.finish();
  }
  c.validate();
  return c;
}

HtmConfig HtmConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::uint64_t HtmConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_json()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace seismic_htm
