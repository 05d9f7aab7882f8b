#pragma once

#include "greenlearn/bvp.hpp"
#include "greenlearn/gp.hpp"
#include "greenlearn/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace greenlearn::catalog {

/// One synthetic experiment: a hidden operator, its constraints and the
/// forcing distribution used to probe it.
struct Entry {
  std::string id;
  std::string description;
  double a = 0.0;
  double b = 1.0;
  int dim = 1;
  int components = 1;  // forcing and response components
  gp::KernelFamily kernel = gp::KernelFamily::squared_exponential;
  double length_scale = 0.03;  // normalized (SE) or dimensionless (periodic); absolute on the disk
  bool normalize = true;       // responses scaled to unit max norm (zero homogeneous solution)
  std::vector<bvp::Constraint> constraints;
};

const std::vector<Entry>& entries();
const Entry& entry(const std::string& id);
bool known(const std::string& id);

struct GenerateOptions {
  std::size_t samples = 100;
  std::size_t forcing_points = 200;
  std::size_t response_points = 100;
  std::uint64_t seed = 1;
  std::optional<double> length_scale;  // overrides the entry default
  bool strict_resolution = false;
  std::string sampling = "uniform";      // uniform | random response locations
  std::string quadrature = "trapezoid";  // trapezoid | montecarlo response rule
  int nodes_per_piece = 512;
};

/// Samples forcings, solves for the responses and records both on the grids.
train::Dataset generate(const std::string& id, const GenerateOptions& options = {});

/// Operator of a scalar 1-D entry (not defined for systems, the propagator or the disk).
bvp::OperatorSpec scalar_operator(const std::string& id);
bvp::SystemOperatorSpec system_operator(const std::string& id);

/// Quadrature nodes used for disk datasets: the centre plus round(2 pi k)
/// equally spaced points on rings k = 1..rings of radius k / rings.
linalg::Grid disk_grid(int rings = 14);

/// Parameters of the time-propagator example.
struct PropagatorSetup {
  double a = -3.0;
  double b = 3.0;
  double dt = 2e-2;
  double damping(double x) const;   // exp(-x^6 / 20)
  double potential(double x) const;  // x^2
};

}  // namespace greenlearn::catalog
