#pragma once

// Euler-Maruyama time stepping for unit-diffusion SDEs.

#include "mmclab/linalg.hpp"

namespace mmclab {

// One explicit step: x + drift*dt + noise, with noise ~ N(0, dt*I)
// supplied by the caller.
inline Vec em_step(const Vec& x, const Vec& drift_value, double dt, const Vec& noise) {
    Vec r(x.n);
    for (int i = 0; i < x.n; ++i) r[i] = x[i] + drift_value[i] * dt + noise[i];
    return r;
}

}  // namespace mmclab
