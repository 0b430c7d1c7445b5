#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/error.hpp"
#include "fibertap/model.hpp"

namespace fibertap {

struct StrainState {
  double axial_strain = 0.0;   // epsilon_z
  double radial_strain = 0.0;  // epsilon_r

  void validate() const {
    for (double s : {axial_strain, radial_strain}) {
      if (!std::isfinite(s) || std::abs(s) > 1e-2) throw ConfigError("strain components must be finite and |e| <= 1e-2");
    }
  }
};

// Pockels coefficients of the core and its index; defaults are fused silica.
struct PhotoelasticSpec {
  double p11 = 0.121;
  double p12 = 0.270;
  double n = 1.468;

  void validate() const {
    if (!(p11 > 0.0 && p11 < 1.0)) throw ConfigError("photoelastic.p11 must lie in (0, 1)");
    if (!(p12 > 0.0 && p12 < 1.0)) throw ConfigError("photoelastic.p12 must lie in (0, 1)");
    if (!(n > 1.0)) throw ConfigError("photoelastic.n must be > 1");
  }
};

/// Relative phase change dphi/phi of a strained fiber section: the length
/// term minus the strain-optic index term.
inline double relative_phase_change(const StrainState& strain, const PhotoelasticSpec& photo) {
  strain.validate();
  photo.validate();
  const double ez = strain.axial_strain;
  const double er = strain.radial_strain;
  return ez - 0.5 * photo.n * photo.n * ((photo.p11 + photo.p12) * er + photo.p12 * ez);
}

/// Absolute phase change for a section of length L: rel * 2*pi*n*L/lambda.
inline double absolute_phase_change(double rel_change, double length, double wavelength, double n) {
  if (!(length >= 0.0)) throw InputError("absolute_phase_change: length must be >= 0");
  if (!(wavelength > 0.0)) throw InputError("absolute_phase_change: wavelength must be > 0");
  return rel_change * (constants::two_pi * n * length / wavelength);
}

struct MitigationScenario {
  std::string label;
  double sensing_length = 3.0;        // m
  double bulk_modulus_scale = 1.0;    // stiffening factor vs baseline cable
  double reflection_amplitude = 0.2;  // PC ~0.2, APC ~0.0025

  void validate() const {
    if (!(sensing_length >= 0.0)) throw ConfigError("scenario '" + label + "': sensing_length must be >= 0");
    if (!(bulk_modulus_scale >= 1.0)) throw ConfigError("scenario '" + label + "': bulk_modulus_scale must be >= 1");
    if (!(reflection_amplitude >= 0.0 && reflection_amplitude <= 1.0)) {
      throw ConfigError("scenario '" + label + "': reflection_amplitude must lie in [0, 1]");
    }
  }
};

struct MitigationRow {
  std::string label;
  double signal_rms_rad = 0.0;
  double delta_db_vs_baseline = 0.0;
  // Beat amplitude 2*alpha (E0^2 = 1) and its change; the echo sets the
  // carrier the tap has to work with, not the voice phase itself.
  double beat_amplitude = 0.0;
  double carrier_delta_db = 0.0;
};

/// Voice-induced RMS phase of a tone at test_level_db for one scenario:
/// linear in exposed length, inversely proportional to the cable's bulk modulus.
inline double scenario_signal_rms(const MitigationScenario& s, const AcousticCoupling& coupling, double test_level_db) {
  const double amplitude = spl_to_pressure(test_level_db, coupling.spl_reference);
  return coupling.sensitivity / s.bulk_modulus_scale * s.sensing_length * amplitude / std::sqrt(2.0);
}

inline double ratio_db(double value, double reference) {
  if (value == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(value / reference);
}

/// Baseline row first, then one row per variant.
inline std::vector<MitigationRow> compare_mitigations(const MitigationScenario& baseline,
                                                      const std::vector<MitigationScenario>& variants,
                                                      const AcousticCoupling& coupling, double test_level_db) {
  coupling.validate();
  baseline.validate();
  if (!(baseline.sensing_length > 0.0)) throw ConfigError("compare_mitigations: baseline sensing_length must be > 0");
  const double base_rms = scenario_signal_rms(baseline, coupling, test_level_db);
  const double base_beat = 2.0 * baseline.reflection_amplitude;

  auto row_for = [&](const MitigationScenario& s) {
    MitigationRow r;
    r.label = s.label;
    r.signal_rms_rad = scenario_signal_rms(s, coupling, test_level_db);
    r.delta_db_vs_baseline = ratio_db(r.signal_rms_rad, base_rms);
    r.beat_amplitude = 2.0 * s.reflection_amplitude;
    r.carrier_delta_db = base_beat > 0.0 ? ratio_db(r.beat_amplitude, base_beat) : 0.0;
    return r;
  };
  std::vector<MitigationRow> rows;
  rows.push_back(row_for(baseline));
  for (const auto& v : variants) {
    v.validate();
    rows.push_back(row_for(v));
  }
  return rows;
}

}  // namespace fibertap
