#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flexilab/geomkit.hpp"

namespace flexilab {

enum class FamilyKind { Rational, Elliptic, Tracked, Suspension };

std::string to_string(FamilyKind kind);

// A one-parameter path u -> Polyhedron of a fixed combinatorial type.
class FlexFamily {
 public:
  using Evaluator = std::function<Polyhedron(double)>;

  FlexFamily(FamilyKind kind, std::shared_ptr<const PseudoManifold> complex, double lower,
             double upper, Evaluator eval)
      : kind_(kind), complex_(std::move(complex)), lower_(lower), upper_(upper),
        eval_(std::move(eval)) {}

  FamilyKind kind() const { return kind_; }
  const std::shared_ptr<const PseudoManifold>& complex() const { return complex_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  Polyhedron operator()(double u) const { return eval_(u); }

  // `steps` equally spaced parameters over [from, to], endpoints included.
  static std::vector<double> linspace(double from, double to, int steps);
  std::vector<double> sweep(int steps) const { return linspace(lower_, upper_, steps); }

 private:
  FamilyKind kind_;
  std::shared_ptr<const PseudoManifold> complex_;
  double lower_;
  double upper_;
  Evaluator eval_;
};

// Largest per-edge relative change of edge lengths against the first sample.
double max_relative_edge_deviation(const std::vector<Polyhedron>& samples);

}  // namespace flexilab
