#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

// Gaussian-beam geometry and the effective detection waists entering the
// axial fluorescence profiles. All lengths are stored in micrometres;
// conversions happen at API boundaries only.

namespace etpa::optics {

inline constexpr double kNmToUm = 1e-3;

/// The printed effective-waist formulas carry pi^4 factors and a denominator
/// grouping that is not dimensionally consistent. `paper` evaluates them
/// verbatim for traceability; `corrected` uses pi^2 with standard precedence
/// and is the default everywhere results are compared against measurements.
enum class FormulaMode { paper, corrected };

struct GaussianBeam {
  double wavelength_um;
  double waist_w0_um;  // 1/e^2 intensity radius at focus
  double numerical_aperture;

  GaussianBeam(double wavelength_um_, double waist_w0_um_, double na)
      : wavelength_um(wavelength_um_),
        waist_w0_um(waist_w0_um_),
        numerical_aperture(na) {
    if (!(wavelength_um > 0.0))
      throw std::invalid_argument("GaussianBeam: wavelength must be > 0");
    if (!(waist_w0_um > 0.0))
      throw std::invalid_argument("GaussianBeam: waist must be > 0");
    if (!(na > 0.0 && na < 1.0))
      throw std::invalid_argument(
          "GaussianBeam: numerical aperture must be in (0, 1)");
  }

  static GaussianBeam from_nm(double wavelength_nm, double waist_w0_um,
                              double na) {
    return GaussianBeam(wavelength_nm * kNmToUm, waist_w0_um, na);
  }

  GaussianBeam with_wavelength_um(double wl_um) const {
    return GaussianBeam(wl_um, waist_w0_um, numerical_aperture);
  }
  GaussianBeam with_waist_um(double w0_um) const {
    return GaussianBeam(wavelength_um, w0_um, numerical_aperture);
  }
};

struct Detector {
  double radius_wd_um;  // detector radius (500 um diameter in the reference setup)

  explicit Detector(double radius_um) : radius_wd_um(radius_um) {
    if (!(radius_wd_um > 0.0))
      throw std::invalid_argument("Detector: radius must be > 0");
  }
};

/// z_R = pi w0^2 / lambda, in um.
inline double rayleigh_range(const GaussianBeam& beam) {
  return std::numbers::pi * beam.waist_w0_um * beam.waist_w0_um /
         beam.wavelength_um;
}

/// w(z) = w0 sqrt(1 + (z/z_R)^2); even in z and minimal at the focus.
inline double waist_at(const GaussianBeam& beam, double z_um) {
  const double zr = rayleigh_range(beam);
  const double t = z_um / zr;
  return beam.waist_w0_um * std::sqrt(1.0 + t * t);
}

/// Effective single-photon detection waist w_z.
inline double effective_waist_spa(const GaussianBeam& beam, const Detector& det,
                                  FormulaMode mode) {
  const double pi = std::numbers::pi;
  const double wl2 = beam.wavelength_um * beam.wavelength_um;
  const double w02 = beam.waist_w0_um * beam.waist_w0_um;
  const double na2 = beam.numerical_aperture * beam.numerical_aperture;
  const double wd2 = det.radius_wd_um * det.radius_wd_um;
  switch (mode) {
    case FormulaMode::corrected: {
      const double num = w02 + wl2 / (4.0 * pi * pi * na2) + 2.0 * wd2;
      const double den = wl2 / (4.0 * pi * pi * w02) + na2;
      return std::sqrt(num / den);
    }
    case FormulaMode::paper: {
      const double pi4 = pi * pi * pi * pi;
      const double num = w02 + wl2 / (4.0 * pi4 * na2) + 2.0 * wd2;
      const double den = wl2 / (4.0 * pi4 * w02 + na2);
      return std::sqrt(num / den);
    }
  }
  throw std::invalid_argument("effective_waist_spa: unknown formula mode");
}

/// Effective two-photon detection waist w_zTP (wavelength is the two-photon
/// excitation wavelength).
inline double effective_waist_tpa(const GaussianBeam& beam, const Detector& det,
                                  FormulaMode mode) {
  const double pi = std::numbers::pi;
  const double wl2 = beam.wavelength_um * beam.wavelength_um;
  const double w02 = beam.waist_w0_um * beam.waist_w0_um;
  const double na2 = beam.numerical_aperture * beam.numerical_aperture;
  const double wd2 = det.radius_wd_um * det.radius_wd_um;
  switch (mode) {
    case FormulaMode::corrected: {
      const double num = w02 + wl2 / (2.0 * pi * pi * na2) + 2.0 * wd2;
      const double den = wl2 / (4.0 * pi * pi * w02) + 2.0 * na2;
      return std::sqrt(num / den);
    }
    case FormulaMode::paper: {
      const double pi4 = pi * pi * pi * pi;
      const double num = w02 + wl2 / (2.0 * pi4 * na2) + 2.0 * wd2;
      const double den = wl2 / (4.0 * pi4 * w02 + 2.0 * na2);
      return std::sqrt(num / den);
    }
  }
  throw std::invalid_argument("effective_waist_tpa: unknown formula mode");
}

inline const char* to_string(FormulaMode mode) {
  return mode == FormulaMode::paper ? "paper" : "corrected";
}

inline FormulaMode formula_mode_from_string(const std::string& s) {
  if (s == "paper") return FormulaMode::paper;
  if (s == "corrected") return FormulaMode::corrected;
  throw std::invalid_argument("formula mode must be 'paper' or 'corrected'");
}

}  // namespace etpa::optics
