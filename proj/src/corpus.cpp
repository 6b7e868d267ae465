#include "hardy/corpus.hpp"

#include <random>

#include "hardy/error.hpp"

namespace hardy {

namespace {

int log2_floor(int n) {
  int j = 0;
  while ((2 << j) <= n) ++j;
  return j;
}

int min_side(const Grid& g) { return g.dim() == 2 ? std::min(g.size(0), g.size(1)) : g.size(0); }

CVector finish(const Semigroup& sg, CVector v) {
  const Grid& g = sg.grid();
  v = sg.require_range(v - sg.kernel_part(v));
  const double n = lp_norm(v, g, 2.0);
  if (!(n > 0.0)) throw NumericalError("corpus generator produced a zero field");
  return v / n;
}

CVector gaussian(const Semigroup& sg, std::mt19937_64& rng) {
  const Grid& g = sg.grid();
  std::normal_distribution<double> normal;
  CVector v(g.node_count());
  for (auto& x : v) x = normal(rng);
  const double t = 2.0 * g.spacing();
  return finish(sg, sg.heat(t * t, v - sg.kernel_part(v)));
}

CVector bump(const Semigroup& sg, std::mt19937_64& rng) {
  const Grid& g = sg.grid();
  std::normal_distribution<double> normal;
  const int top = std::max(1, log2_floor(min_side(g)) - 2);
  const int count = 1 << std::uniform_int_distribution<int>(1, top)(rng);
  std::array<int, 2> corner{0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const int span = g.periodic() ? g.size(a) - 1 : g.size(a) - count;
    corner[a] = std::uniform_int_distribution<int>(0, span)(rng);
  }
  const Cube q(g, corner, count);
  CVector v = CVector::Zero(g.node_count());
  for (Index x : q.nodes()) v[x] = normal(rng);
  const double s = q.sidelength() * q.sidelength();
  return finish(sg, sg.heat_power_family({s}, 1, v)[0]);
}

CVector dyadic(const Semigroup& sg, std::mt19937_64& rng) {
  const Grid& g = sg.grid();
  std::normal_distribution<double> normal;
  std::bernoulli_distribution keep(0.5);
  const int top = log2_floor(min_side(g));
  CVector v = CVector::Zero(g.node_count());
  for (int pick = 0; pick < 3; ++pick) {
    const int j = std::uniform_int_distribution<int>(1, top)(rng);
    const int c = 1 << j;
    const int ny = g.dim() == 2 ? g.size(1) : 1;
    const int cy = g.dim() == 2 ? c : 1;
    for (int y0 = 0; y0 + cy <= ny; y0 += cy)
      for (int x0 = 0; x0 + c <= g.size(0); x0 += c) {
        if (!keep(rng)) continue;
        const double a = normal(rng);
        const bool along_y = g.dim() == 2 && keep(rng);
        for (int dy = 0; dy < cy; ++dy)
          for (int dx = 0; dx < c; ++dx) {
            const int half = along_y ? dy : dx;
            v[g.index({x0 + dx, y0 + dy})] += half < c / 2 ? a : -a;
          }
      }
  }
  const double t = g.spacing();
  return finish(sg, sg.heat(t * t, v));
}

}  // namespace

std::string to_string(CorpusKind k) {
  switch (k) {
    case CorpusKind::smoothed_gaussian: return "smoothed_gaussian";
    case CorpusKind::bumps: return "bumps";
    case CorpusKind::dyadic: return "dyadic";
    case CorpusKind::mixed: return "mixed";
  }
  return "?";
}

CorpusKind corpus_kind_from_string(const std::string& s) {
  for (CorpusKind k : {CorpusKind::smoothed_gaussian, CorpusKind::bumps, CorpusKind::dyadic, CorpusKind::mixed})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown corpus generator: " + s);
}

ScalarField corpus_element(const Semigroup& sg, std::uint64_t seed, int index, CorpusKind kind) {
  if (kind == CorpusKind::mixed) kind = static_cast<CorpusKind>(index % 3);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(kind)};
  std::mt19937_64 rng(seq);
  switch (kind) {
    case CorpusKind::smoothed_gaussian: return {sg.grid(), gaussian(sg, rng)};
    case CorpusKind::bumps: return {sg.grid(), bump(sg, rng)};
    default: return {sg.grid(), dyadic(sg, rng)};
  }
}

std::vector<ScalarField> make_corpus(const Semigroup& sg, int count, std::uint64_t seed, CorpusKind kind) {
  if (count < 0) throw InvalidArgument("corpus count must be nonnegative");
  std::vector<ScalarField> out;
  for (int i = 0; i < count; ++i) out.push_back(corpus_element(sg, seed, i, kind));
  return out;
}

}  // namespace hardy
