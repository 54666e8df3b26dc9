#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kadapt/types.hpp"

namespace kadapt::gen {

/// Axis-aligned voxel box, [x0,x1) x [y0,y1) on the grid.
struct Box {
    int x0 = 0, x1 = 0, y0 = 0, y1 = 1;
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

/// Synthetic radiotherapy-style phantom: beamlets travel along +x depositing a
/// plateau + Gaussian-peak depth profile; scenarios combine setup shifts
/// (pattern translation, clipped at the grid) with range factors (peak depth
/// scaled by 1+r). The scenario set is |directions| x |range_factors| and must
/// contain the nominal (no shift, 0) combination.
struct PhantomParams {
    int grid_x = 40;
    int grid_y = 1;  // 1 -> 1D phantom
    int n_beamlets = 12;

    Box target{14, 26, 0, 1};
    int rind_margin = 4;  // band width around the target
    std::optional<Box> oar_proximal;  // defaults derived from the geometry
    std::optional<Box> oar_distal;

    int shift_magnitude = 1;  // voxels
    std::vector<std::string> shift_directions = {"none", "+x", "-x"};
    std::vector<double> range_factors = {-0.03, 0.0, 0.03};

    // Bounds patterned on H&N planning constraints. The rind shares the
    // target's maximum-dose bound so that plans stay feasible under shifted
    // scenarios (hot spots translate within target+rind).
    double target_max_dose = 59.85;
    double rind_max_dose = 59.85;
    double oar_proximal_mean_dose = 26.0;
    double oar_distal_mean_dose = 40.0;
    double oar_distal_max_dose = 54.0;

    double plateau = 0.3;
    double peak = 1.0;
    double peak_sigma = 1.5;   // proximal peak width, voxels
    double distal_sigma = 0.9; // distal falloff width, voxels
    double jitter = 0.1;       // seeded relative jitter on per-beamlet profile
    std::uint64_t seed = 1;
};

Instance generate_phantom_instance(const PhantomParams& params);

/// The hitting-set reduction: T scenarios of (n+1) x n matrices with
/// D_jj = 0 iff item j is in the scenario's set, an all-ones last row,
/// objective = sum of the first n dose entries, and the single underdose
/// constraint d_{n+1} >= 1.
struct HittingSetSpec {
    int n_items = 0;
    std::vector<std::vector<int>> sets;  // items are 1-based, per the family
    int k_query = 1;
};

Instance generate_hitting_set_instance(const HittingSetSpec& spec);

/// Exhaustive check: does some subset of <= k_query items hit every set?
/// Refuses n_items > 20.
bool hitting_set_oracle(const HittingSetSpec& spec);

}  // namespace kadapt::gen
