#pragma once

// Named initial-data generators for u and v.

#include <cstdint>
#include <string>

#include "lyhlab/fields.hpp"

namespace lyhlab::fields {

enum class GeneratorKind { Constant, SingleMode, Gaussian, RandomBandlimited, Proportional };

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Constant;
  /// Constant value, or the mean level of single_mode / random_bandlimited data.
  double mean = 1.0;
  /// Peak deviation from the mean (random data are rescaled to max |deviation| = amplitude).
  double amplitude = 0.0;
  /// single_mode: real axis (torus) and integer wavenumber, or degree l on CP1.
  int axis = 0;
  int mode = 1;
  /// random_bandlimited: largest wavenumber per axis (torus) or degree (CP1).
  int max_mode = 2;
  std::uint64_t seed = 1;
  /// proportional: v = ratio * u.
  double ratio = 0.0;
  /// gaussian: sampling time of the heat kernel for generate(); the flow uses the exact kernel.
  double time = 0.01;
};

/// Samples a generator on the grid. Proportional specs need `reference` (the u field).
ScalarField generate(const GridPtr& grid, const GeneratorSpec& spec, double a0 = 1.0,
                     const ScalarField* reference = nullptr);

/// Periodized flat heat kernel t^{-n} sum_images exp(-a |z - c|^2 / t), centred in the cell.
ScalarField heat_kernel(const GridPtr& grid, double a, double t);

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::uint64_t bits);

}  // namespace lyhlab::fields
