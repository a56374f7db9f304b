#pragma once

#include <cstdint>
#include <random>

#include "qsm/common.hpp"
#include "qsm/layout.hpp"
#include "qsm/state.hpp"

namespace qsm {

// Seeded stream with deterministic child splitting. Normal variates use an
// explicit Box-Muller transform so results do not depend on the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Independent stream derived from (root seed, index); stable under calls to
  // the parent generator.
  Rng child(uint64_t index) const;

  uint64_t root_seed() const { return root_; }

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  cxd cnormal();     // independent N(0,1) real and imaginary parts

 private:
  uint64_t root_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Haar-measure sample: complex Gaussian matrix, QR factorization, columns
// rescaled by the phases of the R diagonal.
Mat haar_unitary(int dim, Rng& rng);

PureState haar_state(const SystemLayout& layout, Rng& rng);

DensityOperator random_density(const SystemLayout& layout, Rng& rng, int rank = 0);

// Random CPTP map with `n_kraus` Kraus operators from in_dim to out_dim.
KrausChannel random_channel(int in_dim, int out_dim, int n_kraus, Rng& rng);

}  // namespace qsm
