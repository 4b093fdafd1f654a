#pragma once
// Finite atomic measures on the upper half-space: the discrete stand-in for
// nonnegative measures with compact support.
#include <array>
#include <string>
#include <vector>

namespace capax {

struct Atom {
  std::array<double, 2> x{0.0, 0.0};  // boundary coordinates (x[1] unused for n=1)
  double t = 1.0;                     // height, > 0
  double w = 0.0;                     // weight, >= 0
};

struct DiscreteMeasure {
  int n = 1;
  std::vector<Atom> atoms;

  double total_mass() const;
};

void validate(const DiscreteMeasure& mu);

// CSV format: header line "n=<1|2>", then rows "x1[,x2],t,w".
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

}  // namespace capax
