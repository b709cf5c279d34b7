#pragma once

#include <array>
#include <complex>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

// Complex 3D field on the same x-fastest layout as Volume.
struct Spectrum {
    Dims dims;
    std::vector<std::complex<double>> data;

    static Spectrum zeros(Dims d);
};

// k-space dipole spectrum d[k] = 1/3 - kz^2/k^2 on physical frequency
// coordinates k_i = n_i/(N_i * spacing_i) with signed integer n_i. The DC
// entry is set to 0 (reconstructed maps are zero-mean by convention).
// Entries lie in [-2/3, 1/3] and are even under k -> -k.
struct DipoleKernel {
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<double> d;
};

// Unnormalized forward DFT; the inverse carries the single 1/N factor.
Spectrum dft3(const Volume& v);
Spectrum dft3(const Spectrum& s);
Spectrum idft3(const Spectrum& s);

Volume real_part(const Spectrum& s, std::array<double, 3> spacing = {1.0, 1.0, 1.0});

DipoleKernel build_dipole_kernel(Dims dims, std::array<double, 3> spacing);

// For inspection via save_volume.
Volume dipole_to_volume(const DipoleKernel& k);

// Phi = Re F^-1 D F chi (noise-free forward model).
Volume forward_field(const Volume& chi, const DipoleKernel& k);

// Adjoint of forward_field; d is real and even so this coincides with the
// forward operator, kept as a named operation for solver code.
Volume adjoint_field(const Volume& y, const DipoleKernel& k);

} // namespace qsm
