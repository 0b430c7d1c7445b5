#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fibertap/demod.hpp"
#include "fibertap/enhance.hpp"
#include "fibertap/error.hpp"
#include "fibertap/io/trace_file.hpp"
#include "fibertap/model.hpp"
#include "fibertap/noise.hpp"
#include "fibertap/sensitivity.hpp"

namespace fibertap {

struct SimulationSettings {
  bool noise_enabled = true;
  double flatten_below = 10.0;     // Hz, PSD held flat below this
  std::optional<double> level_db;  // rescale input audio to this dB SPL
};

struct DemodSettings {
  std::optional<double> beat_frequency;  // unset: interferometer.intermediate_frequency
  std::optional<double> lowpass_cutoff;  // unset: beat_frequency / 2
  double highpass_cutoff = 500.0;
  int filter_order = 4;
  double stopband_db = 140.0;
  double audio_rate = 40e3;

  DemodConfig resolve(double intermediate_frequency) const {
    DemodConfig c;
    c.beat_frequency = beat_frequency.value_or(intermediate_frequency);
    c.lowpass_cutoff = lowpass_cutoff.value_or(c.beat_frequency / 2.0);
    c.highpass_cutoff = highpass_cutoff;
    c.filter_order = filter_order;
    c.stopband_db = stopband_db;
    return c;
  }
};

struct EnhanceSettings {
  double frame_seconds = 0.020;
  double overlap = 0.5;
  double oversubtraction = 2.0;
  double spectral_floor = 0.02;
  double silence_threshold_db = -10.0;

  SpectralSubtractParams resolve(double sample_rate) const {
    auto p = SpectralSubtractParams::for_rate(sample_rate, frame_seconds);
    p.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(p.frame_length * (1.0 - overlap))));
    p.oversubtraction = oversubtraction;
    p.spectral_floor = spectral_floor;
    p.silence_threshold_db = silence_threshold_db;
    p.validate();
    return p;
  }
};

struct BudgetSettings {
  BudgetOptions options;
  double length_from = 10.0, length_to = 1e4;
  double mismatch_from = 1.0, mismatch_to = 1e4;
  int points = 61;
};

struct SensitivitySettings {
  double test_level_db = 70.0;
  PhotoelasticSpec photoelastic;
  StrainState strain{1e-6, -3e-7};
  MitigationScenario baseline{"PC, 3 m tail", 3.0, 1.0, 0.2};
  std::vector<MitigationScenario> variants;
};

struct RunConfig {
  InterferometerConfig interferometer;
  AcousticCoupling coupling;
  AudioBand band;
  SimulationSettings simulation;
  DemodSettings demod;
  EnhanceSettings enhance;
  BudgetSettings budget;
  SensitivitySettings sensitivity;

  void validate() const {
    interferometer.validate();
    coupling.validate();
    band.validate();
    demod.resolve(interferometer.intermediate_frequency).validate(interferometer.sample_rate);
    if (!(demod.audio_rate > 0.0)) throw ConfigError("demod.audio_rate must be > 0");
    if (!(enhance.overlap >= 0.0 && enhance.overlap < 1.0)) throw ConfigError("enhance.overlap must lie in [0, 1)");
    if (!(budget.options.snr_threshold > 0.0)) throw ConfigError("budget.snr_threshold must be > 0");
    if (budget.points < 1) throw ConfigError("budget.points must be >= 1");
    sensitivity.photoelastic.validate();
    sensitivity.strain.validate();
    sensitivity.baseline.validate();
    for (const auto& v : sensitivity.variants) v.validate();
  }
};

/// Thermal detection limit of a 3 km detecting arm sits at 30 dB SPL.
inline constexpr double calibration_anchor_length = 3000.0;
inline constexpr double calibration_anchor_db = 30.0;

inline double calibrated_sensitivity(const InterferometerConfig& ifo, const AudioBand& band, double spl_reference,
                                     double snr_threshold = 1.0) {
  return calibrate_sensitivity(ifo.detect_fiber, ifo.laser.wavelength, band, calibration_anchor_length,
                               calibration_anchor_db, ifo.sensing_length, spl_reference, snr_threshold);
}

/// Built-in defaults. config/default.json holds the same values.
inline RunConfig default_config() {
  RunConfig c;
  c.coupling.sensitivity = calibrated_sensitivity(c.interferometer, c.band, c.coupling.spl_reference);
  c.sensitivity.variants = {
      {"PC, 1 m tail", 1.0, 1.0, 0.2},
      {"PC, 3 m tail, steel-wire cable", 3.0, 10.0, 0.2},
      {"APC, 3 m tail", 3.0, 1.0, 0.0025},
      {"PC, 1 m tail, steel-wire cable", 1.0, 10.0, 0.2},
  };
  return c;
}

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::json scenario_to_json(const MitigationScenario& s) {
  return {{"label", s.label},
          {"sensing_length", s.sensing_length},
          {"bulk_modulus_scale", s.bulk_modulus_scale},
          {"reflection_amplitude", s.reflection_amplitude}};
}

inline nlohmann::json fiber_to_json(const FiberSpec& f) {
  return {{"length", f.length},
          {"refractive_index", f.refractive_index},
          {"bulk_modulus_area_product", f.bulk_modulus_area_product},
          {"loss_angle", f.loss_angle},
          {"temperature", f.temperature}};
}

inline nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  const auto& ifo = c.interferometer;
  json variants = json::array();
  for (const auto& v : c.sensitivity.variants) variants.push_back(scenario_to_json(v));
  return {
      {"laser",
       {{"wavelength", ifo.laser.wavelength},
        {"linewidth", ifo.laser.linewidth},
        {"white_freq_psd", ifo.laser.white_freq_psd},
        {"flicker_coeff", ifo.laser.flicker_coeff}}},
      {"detect_fiber", fiber_to_json(ifo.detect_fiber)},
      {"reference_fiber", fiber_to_json(ifo.reference_fiber)},
      {"interferometer",
       {{"sensing_length", ifo.sensing_length},
        {"aom_shift", ifo.aom_shift},
        {"reflection_amplitude", ifo.reflection_amplitude},
        {"intermediate_frequency", ifo.intermediate_frequency},
        {"sample_rate", ifo.sample_rate},
        {"initial_phase", ifo.initial_phase}}},
      {"coupling", {{"sensitivity", c.coupling.sensitivity}, {"spl_reference", c.coupling.spl_reference}}},
      {"band", {{"f_low", c.band.f_low}, {"f_high", c.band.f_high}}},
      {"simulation",
       {{"noise_enabled", c.simulation.noise_enabled},
        {"flatten_below", c.simulation.flatten_below},
        {"level_db", optional_json(c.simulation.level_db)}}},
      {"demod",
       {{"beat_frequency", optional_json(c.demod.beat_frequency)},
        {"lowpass_cutoff", optional_json(c.demod.lowpass_cutoff)},
        {"highpass_cutoff", c.demod.highpass_cutoff},
        {"filter_order", c.demod.filter_order},
        {"stopband_db", c.demod.stopband_db},
        {"audio_rate", c.demod.audio_rate}}},
      {"enhance",
       {{"frame_seconds", c.enhance.frame_seconds},
        {"overlap", c.enhance.overlap},
        {"oversubtraction", c.enhance.oversubtraction},
        {"spectral_floor", c.enhance.spectral_floor},
        {"silence_threshold_db", c.enhance.silence_threshold_db}}},
      {"budget",
       {{"snr_threshold", c.budget.options.snr_threshold},
        {"include_thermal", c.budget.options.include_thermal},
        {"length_from", c.budget.length_from},
        {"length_to", c.budget.length_to},
        {"mismatch_from", c.budget.mismatch_from},
        {"mismatch_to", c.budget.mismatch_to},
        {"points", c.budget.points}}},
      {"sensitivity",
       {{"test_level_db", c.sensitivity.test_level_db},
        {"photoelastic",
         {{"p11", c.sensitivity.photoelastic.p11},
          {"p12", c.sensitivity.photoelastic.p12},
          {"n", c.sensitivity.photoelastic.n}}},
        {"strain",
         {{"axial_strain", c.sensitivity.strain.axial_strain},
          {"radial_strain", c.sensitivity.strain.radial_strain}}},
        {"baseline", scenario_to_json(c.sensitivity.baseline)},
        {"variants", variants}}},
  };
}

namespace detail {

// Walks a JSON object, reporting every problem with its dotted key path.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ConfigReader child(const std::string& key) {
    mark(key);
    if (!node_.contains(key)) throw ConfigError(join(key) + ": missing");
    return ConfigReader(node_.at(key), join(key));
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  void number(const std::string& key, double& out) {
    mark(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(join(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    mark(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(key) + ": expected an integer");
    out = v.get<int>();
  }

  void boolean(const std::string& key, bool& out) {
    mark(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void text(const std::string& key, std::string& out) {
    mark(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(join(key) + ": expected a string");
    out = v.get<std::string>();
  }

  // null clears the value.
  void optional_number(const std::string& key, std::optional<double>& out) {
    mark(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number()) throw ConfigError(join(key) + ": expected a number or null");
    out = v.get<double>();
  }

  const nlohmann::json& raw(const std::string& key) {
    mark(key);
    return node_.at(key);
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  // Unknown keys are errors so misspelt constants do not pass silently.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError(join(it.key()) + ": unknown key");
    }
  }

 private:
  void mark(const std::string& key) { seen_.insert(key); }

  const nlohmann::json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_fiber(ConfigReader r, FiberSpec& f) {
  r.number("length", f.length);
  r.number("refractive_index", f.refractive_index);
  r.number("bulk_modulus_area_product", f.bulk_modulus_area_product);
  r.number("loss_angle", f.loss_angle);
  r.number("temperature", f.temperature);
  r.finish();
}

inline void read_scenario(ConfigReader r, MitigationScenario& s) {
  r.text("label", s.label);
  r.number("sensing_length", s.sensing_length);
  r.number("bulk_modulus_scale", s.bulk_modulus_scale);
  r.number("reflection_amplitude", s.reflection_amplitude);
  r.finish();
  if (!(s.sensing_length >= 0.0)) throw ConfigError(r.join("sensing_length") + ": must be >= 0");
  if (!(s.bulk_modulus_scale >= 1.0)) throw ConfigError(r.join("bulk_modulus_scale") + ": must be >= 1");
  if (!(s.reflection_amplitude >= 0.0 && s.reflection_amplitude <= 1.0)) {
    throw ConfigError(r.join("reflection_amplitude") + ": must lie in [0, 1]");
  }
}

}  // namespace detail

/// Overlays `doc` on the defaults. Sections and keys may be omitted; unknown
/// keys and wrongly typed values raise ConfigError naming the key path.
/// `laser.white_freq_psd: null` derives it from the linewidth and
/// `coupling.sensitivity: null` recalibrates against the 30 dB / 3 km anchor.
inline RunConfig config_from_json(const nlohmann::json& doc) {
  using detail::ConfigReader;
  RunConfig c = default_config();
  ConfigReader root(doc, "");
  auto& ifo = c.interferometer;

  std::optional<double> white_psd = ifo.laser.white_freq_psd;
  std::optional<double> sensitivity = c.coupling.sensitivity;

  if (root.has("laser")) {
    auto r = root.child("laser");
    r.number("wavelength", ifo.laser.wavelength);
    r.number("linewidth", ifo.laser.linewidth);
    r.optional_number("white_freq_psd", white_psd);
    r.number("flicker_coeff", ifo.laser.flicker_coeff);
    r.finish();
  }
  ifo.laser.white_freq_psd = white_psd.value_or(LaserSpec::white_psd_from_linewidth(ifo.laser.linewidth));
  if (root.has("detect_fiber")) detail::read_fiber(root.child("detect_fiber"), ifo.detect_fiber);
  if (root.has("reference_fiber")) detail::read_fiber(root.child("reference_fiber"), ifo.reference_fiber);
  if (root.has("interferometer")) {
    auto r = root.child("interferometer");
    r.number("sensing_length", ifo.sensing_length);
    r.number("aom_shift", ifo.aom_shift);
    r.number("reflection_amplitude", ifo.reflection_amplitude);
    r.number("intermediate_frequency", ifo.intermediate_frequency);
    r.number("sample_rate", ifo.sample_rate);
    r.number("initial_phase", ifo.initial_phase);
    r.finish();
  }
  if (root.has("band")) {
    auto r = root.child("band");
    r.number("f_low", c.band.f_low);
    r.number("f_high", c.band.f_high);
    r.finish();
  }
  if (root.has("budget")) {
    auto r = root.child("budget");
    r.number("snr_threshold", c.budget.options.snr_threshold);
    r.boolean("include_thermal", c.budget.options.include_thermal);
    r.number("length_from", c.budget.length_from);
    r.number("length_to", c.budget.length_to);
    r.number("mismatch_from", c.budget.mismatch_from);
    r.number("mismatch_to", c.budget.mismatch_to);
    r.integer("points", c.budget.points);
    r.finish();
  }
  if (root.has("coupling")) {
    auto r = root.child("coupling");
    r.optional_number("sensitivity", sensitivity);
    r.number("spl_reference", c.coupling.spl_reference);
    r.finish();
  }
  if (!sensitivity) {
    ifo.validate();
    c.band.validate();
    sensitivity = calibrated_sensitivity(ifo, c.band, c.coupling.spl_reference, c.budget.options.snr_threshold);
  }
  c.coupling.sensitivity = *sensitivity;
  if (root.has("simulation")) {
    auto r = root.child("simulation");
    r.boolean("noise_enabled", c.simulation.noise_enabled);
    r.number("flatten_below", c.simulation.flatten_below);
    r.optional_number("level_db", c.simulation.level_db);
    r.finish();
  }
  if (root.has("demod")) {
    auto r = root.child("demod");
    r.optional_number("beat_frequency", c.demod.beat_frequency);
    r.optional_number("lowpass_cutoff", c.demod.lowpass_cutoff);
    r.number("highpass_cutoff", c.demod.highpass_cutoff);
    r.integer("filter_order", c.demod.filter_order);
    r.number("stopband_db", c.demod.stopband_db);
    r.number("audio_rate", c.demod.audio_rate);
    r.finish();
  }
  if (root.has("enhance")) {
    auto r = root.child("enhance");
    r.number("frame_seconds", c.enhance.frame_seconds);
    r.number("overlap", c.enhance.overlap);
    r.number("oversubtraction", c.enhance.oversubtraction);
    r.number("spectral_floor", c.enhance.spectral_floor);
    r.number("silence_threshold_db", c.enhance.silence_threshold_db);
    r.finish();
  }
  if (root.has("sensitivity")) {
    auto r = root.child("sensitivity");
    auto& s = c.sensitivity;
    r.number("test_level_db", s.test_level_db);
    if (r.has("photoelastic")) {
      auto p = r.child("photoelastic");
      p.number("p11", s.photoelastic.p11);
      p.number("p12", s.photoelastic.p12);
      p.number("n", s.photoelastic.n);
      p.finish();
    }
    if (r.has("strain")) {
      auto p = r.child("strain");
      p.number("axial_strain", s.strain.axial_strain);
      p.number("radial_strain", s.strain.radial_strain);
      p.finish();
    }
    if (r.has("baseline")) {
      s.baseline = MitigationScenario{};
      detail::read_scenario(r.child("baseline"), s.baseline);
    }
    if (r.has("variants")) {
      const auto& arr = r.raw("variants");
      if (!arr.is_array()) throw ConfigError(r.join("variants") + ": expected an array");
      s.variants.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        MitigationScenario v;
        detail::read_scenario(ConfigReader(arr[i], r.join("variants") + "[" + std::to_string(i) + "]"), v);
        s.variants.push_back(v);
      }
    }
    r.finish();
  }
  root.finish();
  c.validate();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in config '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

/// FNV-1a 64 over the canonical (sorted-key, compact) JSON of the resolved
/// configuration, as 16 hex digits.
inline std::string config_digest(const RunConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fibertap
