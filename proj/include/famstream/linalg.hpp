#pragma once

#include "famstream/matrix.hpp"

namespace famstream {

struct EigenDecomposition {
    Vector values;   // descending
    Matrix vectors;  // row i is the unit eigenvector for values[i]
    int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric matrix. Deterministic: the same input
// yields bit-identical output. Each eigenvector is sign-normalized so that its
// largest-magnitude entry (first one on ties) is positive.
EigenDecomposition symmetric_eigen(const Matrix& symmetric, int max_sweeps = 100);

}  // namespace famstream
