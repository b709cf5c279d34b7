#pragma once

#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

// Forward-difference gradient with Neumann boundary (last difference along
// each axis is zero) and the matching negative-adjoint divergence. These
// back the TV/TGV solvers; the operator norm of grad3 is bounded by
// sqrt(12) in 3D.
struct VecField {
    Dims dims;
    std::vector<double> x, y, z;

    static VecField zeros(Dims d);
};

// Symmetrized gradient of a vector field, six unique components with the
// off-diagonal pairs stored once; inner products and norms weight the
// off-diagonal components by 2.
struct SymField {
    Dims dims;
    std::vector<double> xx, yy, zz, xy, xz, yz;

    static SymField zeros(Dims d);
};

VecField grad3(const std::vector<double>& u, Dims dims);

// div3 = -grad3^T, so <grad3 u, p> = -<u, div3 p>.
std::vector<double> div3(const VecField& p);

SymField sym_grad(const VecField& w);

// sym_div = -sym_grad^T under the weighted inner product.
VecField sym_div(const SymField& q);

} // namespace qsm
