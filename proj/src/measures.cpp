#include "gachaos/measures.hpp"

#include "gachaos/fitness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gachaos {

Measure uniform_empirical(const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("uniform_empirical: empty point list");
  const auto d = points.front().size();
  Eigen::MatrixXd support(d, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) throw std::invalid_argument("uniform_empirical: dimension mismatch");
    support.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return Measure::uniform(std::move(support));
}

Measure reweight_by_fitness(const Measure& mu, const FitnessSpec& fitness) {
  return reweight_by(mu, [&](const auto& x) { return fitness(x); });
}

void write_measure(std::ostream& out, const Measure& mu) {
  char buf[32];
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", mu.weight(i));
    out << buf;
    for (Eigen::Index k = 0; k < mu.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mu.support()(k, i));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

Measure read_measure(std::istream& in) {
  std::vector<double> weights;
  std::vector<std::vector<double>> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double w;
    if (!(fields >> w)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("measure file: bad weight on line " + std::to_string(line_no));
    }
    std::vector<double> coords;
    double c;
    while (fields >> c) coords.push_back(c);
    if (!fields.eof())
      throw std::invalid_argument("measure file: bad coordinate on line " + std::to_string(line_no));
    if (coords.empty())
      throw std::invalid_argument("measure file: no coordinates on line " + std::to_string(line_no));
    if (!atoms.empty() && coords.size() != atoms.front().size())
      throw std::invalid_argument("measure file: dimension mismatch on line " + std::to_string(line_no));
    weights.push_back(w);
    atoms.push_back(std::move(coords));
  }
  if (atoms.empty()) throw std::invalid_argument("measure file: no atoms");
  const auto d = static_cast<Eigen::Index>(atoms.front().size());
  const auto n = static_cast<Eigen::Index>(atoms.size());
  Eigen::MatrixXd support(d, n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = weights[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < d; ++k) support(k, i) = atoms[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return Measure(std::move(support), std::move(w));
}

void save_measure(const std::filesystem::path& path, const Measure& mu) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_measure(out, mu);
}

Measure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return read_measure(in);
}

}  // namespace gachaos
