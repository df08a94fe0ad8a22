#include <benchmark/benchmark.h>

#include "fbv/bmk.hpp"
#include "fbv/friedrichs.hpp"
#include "fbv/numeric.hpp"
#include "fbv/young.hpp"

using namespace fbv;

namespace {

std::vector<Point> random_points(int dim, int count, double radius, std::uint64_t seed) {
  numeric::Rng rng(seed);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < count) {
    Point p(dim);
    for (int k = 0; k < dim; ++k) p[k] = rng.uniform(-radius, radius);
    if (p.norm() < radius) pts.push_back(p);
  }
  return pts;
}

void BM_KernelEval(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int q = static_cast<int>(state.range(1));
  const bmk::Kernel kernel(n, q);
  const auto zeta = random_points(2 * n, 64, 0.9, 1);
  const auto z = random_points(2 * n, 64, 0.9, 2);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel.eval(zeta[i % 64], z[(i * 7) % 64]));
    ++i;
  }
}
BENCHMARK(BM_KernelEval)->Args({1, 0})->Args({2, 0})->Args({2, 1});

// One level of B^D on the disc for dbar of zbar, i.e. the constant (0,1)-form.
void BM_OpVolumeLevel(benchmark::State& state) {
  const auto disc = geometry::Domain::ball(2);
  const auto g = exterior::DifferentialForm::function(1, Field::zbar(1)).dbar();
  const bmk::SingularQuadratureConfig cfg;
  const Point z{0.3, -0.2};
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bmk::op_volume_level(g, 0, disc, z, level, cfg));
}
BENCHMARK(BM_OpVolumeLevel)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_OpBoundary(benchmark::State& state) {
  const auto disc = geometry::Domain::ball(2);
  const auto f = exterior::DifferentialForm::function(1, Field::parse("z1^3"));
  const auto rule = geometry::quadrature(disc, geometry::Region::kBoundary, static_cast<int>(state.range(0)));
  const Point z{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(bmk::op_boundary(f, 0, disc, z, rule));
  state.counters["nodes"] = static_cast<double>(rule.size());
}
BENCHMARK(BM_OpBoundary)->DenseRange(5, 7)->Unit(benchmark::kMicrosecond);

void BM_BoundaryMollify(benchmark::State& state) {
  const int count = (1 << state.range(0)) + 1;
  const grid::UniformGrid strip({-1.0, -1.0}, {0.0, 1.0}, {count, count});
  const grid::SupportBox support{{-0.75, -0.75}, {0.0, 0.75}};
  const Field f = Field::parse("window_4(x1/0.75)*window_4(x2/0.75)*exp(x1 + i*x2)");
  const friedrichs::HalfSpaceField field(grid::GridField::sample(strip, [&](const Point& x) { return f(x); }),
                                         support, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(friedrichs::boundary_mollify(field, 0.1, 2.0));
}
BENCHMARK(BM_BoundaryMollify)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);

void BM_EmpiricalNorm(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const auto disc = geometry::Domain::ball(2);
  const bmk::Kernel cauchy(1, 0);
  const young::KernelOperator op{geometry::quadrature(disc, geometry::Region::kBoundary, level + 2),
                                 geometry::quadrature(disc, geometry::Region::kInterior, level),
                                 [&](const Point& x, const Point& z) { return cauchy.eval(x, z)[0][1]; }};
  young::KernelSpec spec;
  spec.t = 1.0;
  spec.s = 1.5;
  spec.a = 4.0;
  spec.b = young::Exponent::infinity();
  for (auto _ : state)
    benchmark::DoNotOptimize(young::empirical_norm(spec, op, young::Exponent(2.0), young::Exponent(2.0), 8));
}
BENCHMARK(BM_EmpiricalNorm)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_LogBoundFit(benchmark::State& state) {
  const auto disc = geometry::Domain::ball(2);
  for (auto _ : state) benchmark::DoNotOptimize(young::log_bound_fit(disc, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_LogBoundFit)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
