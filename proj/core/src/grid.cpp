#include "fbv/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fbv::grid {

UniformGrid::UniformGrid(std::vector<double> lower, std::vector<double> upper, std::vector<int> counts)
    : dim(static_cast<int>(lower.size())) {
  if (dim < 1 || dim > kMaxGridDim || upper.size() != lower.size() || counts.size() != lower.size())
    throw Error("UniformGrid: inconsistent dimensions");
  for (int a = 0; a < dim; ++a) {
    if (!(upper[a] > lower[a])) throw Error("UniformGrid: box bounds must be increasing");
    if (counts[a] < 2) throw Error("UniformGrid: need at least two nodes per axis");
    lo[a] = lower[a];
    hi[a] = upper[a];
    count[a] = counts[a];
  }
}

size_t UniformGrid::size() const {
  size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<size_t>(count[a]);
  return dim == 0 ? 0 : s;
}

size_t UniformGrid::flat(std::array<int, kMaxGridDim> idx) const {
  size_t f = 0;
  for (int a = 0; a < dim; ++a) f = f * static_cast<size_t>(count[a]) + static_cast<size_t>(idx[a]);
  return f;
}

std::array<int, kMaxGridDim> UniformGrid::unflat(size_t flat_index) const {
  std::array<int, kMaxGridDim> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat_index % static_cast<size_t>(count[a]));
    flat_index /= static_cast<size_t>(count[a]);
  }
  return idx;
}

Point UniformGrid::node(size_t flat_index) const {
  const auto idx = unflat(flat_index);
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = lo[a] + idx[a] * spacing(a);
  return p;
}

double UniformGrid::trapezoid_weight(size_t flat_index) const {
  const auto idx = unflat(flat_index);
  double w = 1.0;
  for (int a = 0; a < dim; ++a) {
    const bool end = idx[a] == 0 || idx[a] == count[a] - 1;
    w *= spacing(a) * (end ? 0.5 : 1.0);
  }
  return w;
}

GridField::GridField(UniformGrid grid, std::vector<cplx> samples)
    : grid_(std::move(grid)), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size()) throw Error("GridField: sample count does not match grid");
}

cplx GridField::interpolate(const Point& p) const {
  const int dim = grid_.dim;
  std::array<int, kMaxGridDim> base{};
  std::array<double, kMaxGridDim> frac{};
  for (int a = 0; a < dim; ++a) {
    const double h = grid_.spacing(a);
    const double s = (p[a] - grid_.lo[a]) / h;
    if (s < -1e-12 || s > grid_.count[a] - 1 + 1e-12) return 0.0;
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, grid_.count[a] - 2);
    base[a] = i;
    frac[a] = std::clamp(s - i, 0.0, 1.0);
  }
  cplx acc = 0.0;
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double w = 1.0;
    std::array<int, kMaxGridDim> idx = base;
    for (int a = 0; a < dim; ++a) {
      if (corner & (1 << a)) {
        idx[a] += 1;
        w *= frac[a];
      } else {
        w *= 1.0 - frac[a];
      }
    }
    if (w != 0.0) acc += w * samples_[grid_.flat(idx)];
  }
  return acc;
}

void write_grid(const std::filesystem::path& path, const GridField& field, Encoding encoding,
                const SupportBox& support) {
  const UniformGrid& g = field.grid();
  nlohmann::json header;
  header["format"] = "fbv-grid";
  header["version"] = 1;
  header["encoding"] = encoding == Encoding::kCsv ? "csv" : "binary";
  for (int a = 0; a < g.dim; ++a) {
    header["dims"].push_back(g.count[a]);
    header["lo"].push_back(g.lo[a]);
    header["hi"].push_back(g.hi[a]);
    header["spacing"].push_back(g.spacing(a));
  }
  if (!support.lo.empty()) header["support"] = {{"lo", support.lo}, {"hi", support.hi}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_grid: cannot open " + path.string());
  out << header.dump() << '\n';
  if (encoding == Encoding::kCsv) {
    char buf[64];
    for (size_t i = 0; i < g.size(); ++i) {
      const Point p = g.node(i);
      for (int a = 0; a < g.dim; ++a) {
        std::snprintf(buf, sizeof buf, "%.17g,", p[a]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", field[i].real(), field[i].imag());
      out << buf;
    }
  } else {
    static_assert(std::endian::native == std::endian::little, "binary grids assume little-endian hosts");
    for (size_t i = 0; i < g.size(); ++i) {
      const double pair[2] = {field[i].real(), field[i].imag()};
      out.write(reinterpret_cast<const char*>(pair), sizeof pair);
    }
  }
  if (!out) throw Error("write_grid: write failed for " + path.string());
}

GridField read_grid(const std::filesystem::path& path, SupportBox* support) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_grid: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("read_grid: malformed header in " + path.string() + ": " + e.what());
  }
  if (header.value("format", "") != "fbv-grid") throw Error("read_grid: not an fbv-grid file");
  UniformGrid g(header.at("lo").get<std::vector<double>>(), header.at("hi").get<std::vector<double>>(),
                header.at("dims").get<std::vector<int>>());
  if (support != nullptr && header.contains("support")) {
    support->lo = header["support"].at("lo").get<std::vector<double>>();
    support->hi = header["support"].at("hi").get<std::vector<double>>();
  }
  std::vector<cplx> samples(g.size());
  if (header.value("encoding", "csv") == "csv") {
    for (size_t i = 0; i < samples.size(); ++i) {
      if (!std::getline(in, line)) throw Error("read_grid: truncated CSV body");
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> values;
      while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
      if (values.size() != static_cast<size_t>(g.dim) + 2) throw Error("read_grid: bad CSV row");
      samples[i] = {values[g.dim], values[g.dim + 1]};
    }
  } else {
    for (auto& s : samples) {
      double pair[2];
      if (!in.read(reinterpret_cast<char*>(pair), sizeof pair)) throw Error("read_grid: truncated binary body");
      s = {pair[0], pair[1]};
    }
  }
  return GridField(g, std::move(samples));
}

}  // namespace fbv::grid
