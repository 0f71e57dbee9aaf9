#pragma once

#include <cstddef>
#include <cstdint>

#include "famstream/dataset.hpp"

namespace famstream {

// Gaussian families with low intrinsic dimension: family f draws
//   mean_f + A_f z + noise,  z ~ N(0, I_latent),  noise ~ N(0, noise_sd^2 I)
// where A_f has latent_sd-scaled orthonormal columns and ||mean_f|| equals
// `separation`. Known families appear before the cutoff and again in the
// stream; emerging families only in the stream.
struct SyntheticSpec {
    std::size_t dim = 100;
    std::size_t latent_dims = 3;
    std::size_t known_families = 4;
    std::size_t emerging_families = 3;
    std::size_t corpus_per_family = 1000;
    std::size_t stream_known_per_family = 375;
    std::size_t stream_emerging_per_family = 500;
    double separation = 3.5;
    double latent_sd = 1.0;
    double noise_sd = 0.05;
    std::uint64_t seed = 7;
    // Corpus samples are dated across the ten months before the cutoff, the
    // stream across the two months from it on.
    YearMonth cutoff{2018, 11};
};

// One dataset holding corpus and stream samples (shuffled within their
// period), families named "known-<i>" and "new-<i>".
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace famstream
