#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "momentctl/ocp/problem_io.hpp"
#include "momentctl/relax/conic_form.hpp"
#include "momentctl/sdp/schur_kernels.hpp"

namespace {

using namespace momentctl;

const char* kProblem = R"J({"n":2,"m":1,"lambda":0.1,
  "dynamics":["x2 + 0.1*x1^3","-0.3*u1"],"cost":"x1^2 + x2^2",
  "constraints":["1 - x1^2 - x2^2","(1 - u1)*(1 + u1)"],
  "initial":{"kind":"dirac","x0":[0,0.7]}})J";

struct Fixture {
  sdp::BlockOperator op;
  Eigen::MatrixXd X, Sinv;
};

// Moment-matrix block of the order-r moment program with random SPD iterates.
Fixture make_fixture(int r) {
  const auto p = ocp::parse_problem(kProblem);
  const auto conic = relax::to_conic(relax::assemble_primal(p, r));
  const auto& blk = conic.layout.blocks.front();
  Fixture f;
  f.op = sdp::make_block_operator(conic.problem.A, blk.offset, blk.side);
  std::srand(7);
  const Eigen::MatrixXd G = Eigen::MatrixXd::Random(blk.side, blk.side);
  const Eigen::MatrixXd H = Eigen::MatrixXd::Random(blk.side, blk.side);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(blk.side, blk.side);
  f.X = G * G.transpose() + I;
  f.Sinv = (H * H.transpose() + I).inverse();
  return f;
}

void BM_SchurReference(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)));
  Eigen::MatrixXd M(f.op.rows, f.op.rows);
  for (auto _ : state) {
    M.setZero();
    sdp::schur_psd_reference(f.op, f.X, f.Sinv, M);
    benchmark::DoNotOptimize(M.data());
  }
  state.counters["side"] = f.op.side;
  state.counters["rows"] = f.op.rows;
}

void BM_SchurParallel(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)));
  Eigen::MatrixXd M(f.op.rows, f.op.rows);
  for (auto _ : state) {
    M.setZero();
    sdp::schur_psd_parallel(f.op, f.X, f.Sinv, M);
    benchmark::DoNotOptimize(M.data());
  }
  state.counters["side"] = f.op.side;
  state.counters["rows"] = f.op.rows;
}

}  // namespace

BENCHMARK(BM_SchurReference)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurParallel)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
