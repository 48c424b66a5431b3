// Serial reference vs OpenMP version of each hot kernel. Run with
// OMP_NUM_THREADS to vary the thread count.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "dap/bm25.hpp"
#include "dap/kernels.hpp"
#include "dap/tuning.hpp"

using namespace dap;

namespace {

std::vector<Vector> random_vectors(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) x = g(rng);
    out.emplace_back(std::move(v));
  }
  return out;
}

struct PairFixture {
  std::vector<Vector> pool;
  std::vector<const Vector*> left, right;
  Vector goal;

  PairFixture(std::size_t premises, std::size_t dim) : pool(random_vectors(premises + 1, dim, 1)) {
    goal = pool.back();
    for (std::size_t i = 0; i < premises; ++i)
      for (std::size_t j = i + 1; j < premises; ++j) {
        left.push_back(&pool[i]);
        right.push_back(&pool[j]);
      }
  }
};

template <bool Parallel>
void BM_AdditiveScores(benchmark::State& state) {
  const PairFixture f(static_cast<std::size_t>(state.range(0)), 1536);
  for (auto _ : state) {
    auto s = Parallel ? kernels::additive_scores(f.left, f.right, f.goal)
                      : kernels::additive_scores_serial(f.left, f.right, f.goal);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.left.size()));
}

kernels::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  kernels::Matrix m(r, c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (auto& x : m.data) x = g(rng);
  return m;
}

template <bool Parallel>
void BM_ScaledGram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 1536, 2), b = random_matrix(n, 1536, 3);
  for (auto _ : state) {
    auto m = Parallel ? kernels::scaled_gram(a, b, 10.0) : kernels::scaled_gram_serial(a, b, 10.0);
    benchmark::DoNotOptimize(m.data.data());
  }
}

Bm25Index random_index(std::size_t docs) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> word(0, 5000), len(5, 25);
  std::vector<std::string> corpus(docs);
  for (auto& d : corpus)
    for (int k = len(rng); k > 0; --k) d += "w" + std::to_string(word(rng)) + " ";
  return Bm25Index::from_documents(corpus);
}

template <bool Parallel>
void BM_Bm25ScoreAll(benchmark::State& state) {
  const auto index = random_index(static_cast<std::size_t>(state.range(0)));
  const TokenStream q = tokenize("w1 w20 w300 w4000 w17 w99 w2500");
  for (auto _ : state) {
    auto s = Parallel ? index.score_all(q) : index.score_all_serial(q);
    benchmark::DoNotOptimize(s.data());
  }
}

template <bool Parallel>
void BM_LossGradients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128;
  const auto vecs = random_vectors(3 * n, d, 5);
  std::vector<Triplet> batch(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch[i].e_a = vecs[3 * i];
    batch[i].e_b = vecs[3 * i + 1];
    batch[i].e_d = vecs[3 * i + 2];
  }
  const auto head = ProjectionHead::identity_init(d, 6, 0.1);
  for (auto _ : state) {
    auto g = Parallel ? loss_gradients(batch, head, 0.1) : loss_gradients_serial(batch, head, 0.1);
    benchmark::DoNotOptimize(g.grad.data());
  }
}

}  // namespace

BENCHMARK(BM_AdditiveScores<false>)->Name("additive_scores/serial")->Arg(25)->Arg(100);
BENCHMARK(BM_AdditiveScores<true>)->Name("additive_scores/parallel")->Arg(25)->Arg(100);
BENCHMARK(BM_ScaledGram<false>)->Name("scaled_gram/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_ScaledGram<true>)->Name("scaled_gram/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_Bm25ScoreAll<false>)->Name("bm25_score_all/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_Bm25ScoreAll<true>)->Name("bm25_score_all/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_LossGradients<false>)->Name("loss_gradients/serial")->Arg(32)->Arg(128);
BENCHMARK(BM_LossGradients<true>)->Name("loss_gradients/parallel")->Arg(32)->Arg(128);

BENCHMARK_MAIN();
