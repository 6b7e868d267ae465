#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hardy/semigroup.hpp"

namespace hardy {

enum class CorpusKind {
  smoothed_gaussian,  // white noise, mean removed, one heat step of time (2h)^2
  bumps,              // (l^2 L) e^{-l^2 L} of noise on a random dyadic cube
  dyadic,             // random Haar coefficients on a few dyadic scales, one heat step of time h^2
  mixed,              // cycles through the three above
};
std::string to_string(CorpusKind k);
CorpusKind corpus_kind_from_string(const std::string& s);

/// Mean-zero fields of unit L^2 norm. Deterministic for a fixed seed; element
/// i depends only on (seed, i, kind), not on count.
std::vector<ScalarField> make_corpus(const Semigroup& sg, int count, std::uint64_t seed, CorpusKind kind);
ScalarField corpus_element(const Semigroup& sg, std::uint64_t seed, int index, CorpusKind kind);

}  // namespace hardy
