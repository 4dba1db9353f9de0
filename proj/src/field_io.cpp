#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sharpk/torus.hpp"

namespace sharpk {

// Line 1: compact JSON header. Line 2: CSV column names. Then one row per grid slot:
// index tuple (spectral: signed frequency, physical: point index), re, im.
void write_field(std::ostream& out, const TorusField& f) {
  const auto& g = f.grid();
  nlohmann::ordered_json header;
  header["n"] = g.dim();
  header["M"] = g.points();
  header["offset"] = g.offset();
  header["representation"] = f.is_spectral() ? "spectral" : "physical";
  header["bandlimit"] = f.bandlimit() ? nlohmann::ordered_json(*f.bandlimit()) : nlohmann::ordered_json(nullptr);
  out << header.dump() << '\n';
  for (int i = 1; i <= g.dim(); ++i) out << 'i' << i << ',';
  out << "re,im\n";
  char buf[64];
  for_each_index(g.dim(), g.points(), [&](std::span<const int> idx, std::size_t flat) {
    const Complex z = f.data()[flat];
    if (f.is_spectral() && z == Complex(0.0)) return;
    for (int s : idx) out << (f.is_spectral() ? g.frequency(s) : s) << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
    out << buf;
  });
  if (!out) throw std::runtime_error("failed writing field");
}

TorusField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("field file: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("field file: bad header: ") + e.what());
  }
  int n = 0, m = 0;
  bool offset = true;
  std::string rep;
  std::optional<int> band;
  try {
    n = header.at("n").get<int>();
    m = header.at("M").get<int>();
    offset = header.at("offset").get<bool>();
    rep = header.at("representation").get<std::string>();
    if (!header.at("bandlimit").is_null()) band = header.at("bandlimit").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("field file: bad header: ") + e.what());
  }
  TorusGrid grid(n, m, offset);
  if (rep != "spectral" && rep != "physical") throw std::invalid_argument("field file: unknown representation " + rep);
  const bool spectral = rep == "spectral";
  if (!std::getline(in, line)) throw std::invalid_argument("field file: missing column header");

  std::vector<Complex> values(grid.size());
  std::vector<int> idx(static_cast<std::size_t>(grid.dim()));
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (auto& k : idx) {
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("field file: short row " + std::to_string(row));
      k = std::stoi(cell);
    }
    double re = 0, im = 0;
    if (!std::getline(ss, cell, ',')) throw std::invalid_argument("field file: missing re in row " + std::to_string(row));
    re = std::stod(cell);
    if (!std::getline(ss, cell, ',')) throw std::invalid_argument("field file: missing im in row " + std::to_string(row));
    im = std::stod(cell);
    std::size_t flat = 0;
    if (spectral) {
      flat = grid.flat_index(idx);
    } else {
      for (int k : idx) {
        if (k < 0 || k >= grid.points()) throw std::invalid_argument("field file: index out of range in row " + std::to_string(row));
        flat = flat * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(k);
      }
    }
    values[flat] = Complex(re, im);
  }
  return TorusField(grid, spectral ? Representation::spectral : Representation::physical, std::move(values), band);
}

}  // namespace sharpk
