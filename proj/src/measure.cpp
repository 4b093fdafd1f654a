#include "capax/measure.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "capax/numerics.hpp"

namespace capax {

double DiscreteMeasure::total_mass() const {
  std::vector<double> w(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) w[i] = atoms[i].w;
  return num::pairwise_sum(w);
}

void validate(const DiscreteMeasure& mu) {
  if (mu.n != 1 && mu.n != 2)
    throw std::invalid_argument("DiscreteMeasure: n must be 1 or 2");
  for (const Atom& a : mu.atoms) {
    if (!(a.t > 0.0)) throw std::invalid_argument("DiscreteMeasure: t <= 0");
    if (a.w < 0.0)
      throw std::invalid_argument("DiscreteMeasure: negative weight");
  }
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_measure_csv: cannot open " + path);
  os.precision(17);
  os << "n=" << mu.n << "\n";
  for (const Atom& a : mu.atoms) {
    if (mu.n == 1)
      os << a.x[0] << "," << a.t << "," << a.w << "\n";
    else
      os << a.x[0] << "," << a.x[1] << "," << a.t << "," << a.w << "\n";
  }
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_measure_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("n=", 0) != 0)
    throw std::runtime_error("read_measure_csv: missing n= header");
  DiscreteMeasure mu;
  mu.n = std::stoi(line.substr(2));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> cols;
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    std::size_t want = mu.n == 1 ? 3 : 4;
    if (cols.size() != want)
      throw std::runtime_error("read_measure_csv: bad row: " + line);
    Atom a;
    a.x[0] = cols[0];
    if (mu.n == 2) a.x[1] = cols[1];
    a.t = cols[want - 2];
    a.w = cols[want - 1];
    mu.atoms.push_back(a);
  }
  validate(mu);
  return mu;
}

}  // namespace capax
