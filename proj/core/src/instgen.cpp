#include "kadapt/instgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "kadapt/errors.hpp"
#include "kadapt/format.hpp"

namespace kadapt::gen {

namespace {

struct Dir {
    int dx = 0, dy = 0;
};

Dir parse_direction(const std::string& token, bool two_d) {
    static const std::vector<std::pair<std::string, Dir>> table = {
        {"none", {0, 0}},   {"+x", {1, 0}},    {"-x", {-1, 0}},  {"+y", {0, 1}},
        {"-y", {0, -1}},    {"+x+y", {1, 1}},  {"+x-y", {1, -1}}, {"-x+y", {-1, 1}},
        {"-x-y", {-1, -1}},
    };
    for (const auto& [name, d] : table) {
        if (name == token) {
            if (!two_d && d.dy != 0)
                throw InvalidInstance("direction '" + token + "' needs a 2D grid");
            return d;
        }
    }
    throw InvalidInstance("unknown shift direction '" + token + "'");
}

// [0,1) from the engine's raw bits; avoids distribution portability issues.
double unit_uniform(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::vector<int> box_voxels(const Box& b, int grid_x, int grid_y) {
    std::vector<int> v;
    for (int y = std::max(0, b.y0); y < std::min(grid_y, b.y1); ++y)
        for (int x = std::max(0, b.x0); x < std::min(grid_x, b.x1); ++x)
            v.push_back(y * grid_x + x);
    return v;
}

std::string range_label(double r) {
    std::ostringstream os;
    os << (r >= 0 ? "+" : "") << r * 100.0 << "%";
    return os.str();
}

}  // namespace

Instance generate_phantom_instance(const PhantomParams& p) {
    const bool two_d = p.grid_y > 1;
    if (p.grid_x < 8 || p.grid_y < 1 || p.n_beamlets < 1)
        throw InvalidInstance("phantom: grid or beamlet count too small");
    if (p.target.empty() || p.target.x0 < 0 || p.target.x1 > p.grid_x || p.target.y0 < 0 ||
        p.target.y1 > p.grid_y)
        throw InvalidInstance("phantom: target box outside the grid");

    std::vector<Dir> dirs;
    for (const std::string& t : p.shift_directions) dirs.push_back(parse_direction(t, two_d));
    if (std::none_of(dirs.begin(), dirs.end(), [](Dir d) { return d.dx == 0 && d.dy == 0; }))
        throw InvalidInstance("phantom: shift_directions must include 'none'");
    if (std::none_of(p.range_factors.begin(), p.range_factors.end(),
                     [](double r) { return r == 0.0; }))
        throw InvalidInstance("phantom: range_factors must include 0");

    // Per-beamlet geometry: row and nominal peak depth, jittered by the seed.
    std::mt19937_64 eng(p.seed);
    const int target_h = p.target.y1 - p.target.y0;
    const int depth_slots = (p.n_beamlets + target_h - 1) / target_h;
    struct Beamlet {
        int row;
        double peak_depth;
        double peak;
        double plateau;
    };
    std::vector<Beamlet> beamlets(p.n_beamlets);
    const double w = static_cast<double>(p.target.x1 - p.target.x0);
    for (int b = 0; b < p.n_beamlets; ++b) {
        Beamlet& bl = beamlets[b];
        bl.row = p.target.y0 + (b % target_h);
        const int slot = b / target_h;
        bl.peak_depth = p.target.x0 + (slot + 0.5) * w / depth_slots +
                        p.jitter * p.peak_sigma * (2.0 * unit_uniform(eng) - 1.0);
        bl.peak = p.peak * (1.0 + p.jitter * (2.0 * unit_uniform(eng) - 1.0));
        bl.plateau = p.plateau * (1.0 + p.jitter * (2.0 * unit_uniform(eng) - 1.0));
    }

    Instance inst;
    const int voxels = p.grid_x * p.grid_y;
    int id = 0;
    for (size_t di = 0; di < dirs.size(); ++di) {
        for (double r : p.range_factors) {
            const int sx = dirs[di].dx * p.shift_magnitude;
            const int sy = dirs[di].dy * p.shift_magnitude;
            std::vector<std::tuple<int, int, double>> trip;
            for (int b = 0; b < p.n_beamlets; ++b) {
                const Beamlet& bl = beamlets[b];
                const int row = bl.row + sy;
                if (row < 0 || row >= p.grid_y) continue;  // clipped
                const double zp = bl.peak_depth * (1.0 + r);
                for (int x = 0; x < p.grid_x; ++x) {
                    const double z = static_cast<double>(x - sx);
                    const double dzp = z - zp;
                    double dose;
                    if (z <= zp) {
                        dose = bl.plateau +
                               bl.peak * std::exp(-dzp * dzp / (2.0 * p.peak_sigma * p.peak_sigma));
                    } else {
                        dose = (bl.plateau + bl.peak) *
                               std::exp(-dzp * dzp / (2.0 * p.distal_sigma * p.distal_sigma));
                    }
                    if (z < 0.0) dose = 0.0;  // upstream of the entry point
                    if (dose > 1e-9) trip.emplace_back(row * p.grid_x + x, b, dose);
                }
            }
            Scenario s;
            s.id = id++;
            s.dose = CsrMatrix::from_triplets(voxels, p.n_beamlets, std::move(trip));
            s.label = "shift=" + p.shift_directions[di] + ",range=" + range_label(r);
            if (dirs[di].dx == 0 && dirs[di].dy == 0 && r == 0.0)
                inst.nominal_id = s.id;
            inst.scenarios.push_back(std::move(s));
        }
    }

    Box rind{p.target.x0 - p.rind_margin, p.target.x1 + p.rind_margin,
             two_d ? p.target.y0 - p.rind_margin : 0,
             two_d ? p.target.y1 + p.rind_margin : 1};
    std::vector<int> rind_vox;
    {
        std::set<int> tset;
        for (int v : box_voxels(p.target, p.grid_x, p.grid_y)) tset.insert(v);
        for (int v : box_voxels(rind, p.grid_x, p.grid_y))
            if (!tset.count(v)) rind_vox.push_back(v);
    }
    Box oar_prox = p.oar_proximal.value_or(
        Box{std::max(0, p.target.x0 - p.rind_margin - 6), std::max(1, p.target.x0 - p.rind_margin),
            p.target.y0, p.target.y1});
    Box oar_dist = p.oar_distal.value_or(
        Box{std::min(p.grid_x - 1, p.target.x1 + p.rind_margin),
            std::min(p.grid_x, p.target.x1 + p.rind_margin + 6), p.target.y0, p.target.y1});

    inst.structures["target"] = box_voxels(p.target, p.grid_x, p.grid_y);
    if (rind_vox.empty()) throw InvalidInstance("phantom: rind is empty");
    inst.structures["rind"] = rind_vox;
    inst.structures["oar_proximal"] = box_voxels(oar_prox, p.grid_x, p.grid_y);
    inst.structures["oar_distal"] = box_voxels(oar_dist, p.grid_x, p.grid_y);
    if (inst.structures["oar_proximal"].empty() || inst.structures["oar_distal"].empty())
        throw InvalidInstance("phantom: OAR box is empty; enlarge the grid");

    inst.objective = {ObjectiveKind::MinDoseInTarget, "target"};
    inst.constraints = {
        {"target", ConstraintKind::MaxDose, p.target_max_dose},
        {"rind", ConstraintKind::MaxDose, p.rind_max_dose},
        {"oar_proximal", ConstraintKind::MeanDose, p.oar_proximal_mean_dose},
        {"oar_distal", ConstraintKind::MeanDose, p.oar_distal_mean_dose},
        {"oar_distal", ConstraintKind::MaxDose, p.oar_distal_max_dose},
    };

    std::ostringstream meta;
    meta << "{\"family\":\"phantom\",\"grid_x\":" << p.grid_x << ",\"grid_y\":" << p.grid_y
         << ",\"n_beamlets\":" << p.n_beamlets << ",\"shift_magnitude\":" << p.shift_magnitude
         << ",\"shift_directions\":[";
    for (size_t i = 0; i < p.shift_directions.size(); ++i)
        meta << (i ? "," : "") << '"' << p.shift_directions[i] << '"';
    meta << "],\"range_factors\":[";
    for (size_t i = 0; i < p.range_factors.size(); ++i)
        meta << (i ? "," : "") << format_double(p.range_factors[i]);
    meta << "],\"seed\":" << p.seed << "}";
    inst.metadata_json = meta.str();

    inst.validate();
    return inst;
}

Instance generate_hitting_set_instance(const HittingSetSpec& spec) {
    const int n = spec.n_items;
    if (n < 1) throw InvalidInstance("hitting set: n_items must be >= 1");
    if (spec.sets.empty()) throw InvalidInstance("hitting set: no sets");
    for (const auto& s : spec.sets) {
        if (s.empty()) throw InvalidInstance("hitting set: empty set");
        for (int item : s)
            if (item < 1 || item > n) throw InvalidInstance("hitting set: item out of range");
    }

    Instance inst;
    for (size_t l = 0; l < spec.sets.size(); ++l) {
        std::set<int> members(spec.sets[l].begin(), spec.sets[l].end());
        std::vector<std::tuple<int, int, double>> trip;
        for (int j = 0; j < n; ++j)
            if (!members.count(j + 1)) trip.emplace_back(j, j, 1.0);  // D_jj = 1 iff j not in S_l
        for (int j = 0; j < n; ++j) trip.emplace_back(n, j, 1.0);     // all-one last row
        Scenario s;
        s.id = static_cast<int>(l);
        s.dose = CsrMatrix::from_triplets(n + 1, n, std::move(trip));
        std::string label = "S={";
        for (size_t i = 0; i < spec.sets[l].size(); ++i)
            label += (i ? "," : "") + std::to_string(spec.sets[l][i]);
        s.label = label + "}";
        inst.scenarios.push_back(std::move(s));
    }
    std::vector<int> items(n);
    for (int j = 0; j < n; ++j) items[j] = j;
    inst.structures["items"] = items;
    inst.structures["coverage"] = {n};
    inst.objective = {ObjectiveKind::SumDose, "items"};
    inst.constraints = {{"coverage", ConstraintKind::MinDose, 1.0}};

    std::ostringstream meta;
    meta << "{\"family\":\"hitting_set\",\"n_items\":" << n << ",\"k_query\":" << spec.k_query
         << ",\"sets\":[";
    for (size_t l = 0; l < spec.sets.size(); ++l) {
        meta << (l ? "," : "") << "[";
        for (size_t i = 0; i < spec.sets[l].size(); ++i)
            meta << (i ? "," : "") << spec.sets[l][i];
        meta << "]";
    }
    meta << "]}";
    inst.metadata_json = meta.str();

    inst.validate();
    return inst;
}

bool hitting_set_oracle(const HittingSetSpec& spec) {
    if (spec.n_items > 20)
        throw InvalidInstance("hitting_set_oracle: n_items > 20 refused");
    if (spec.n_items < 1 || spec.sets.empty())
        throw InvalidInstance("hitting_set_oracle: malformed spec");
    std::vector<std::uint32_t> masks;
    for (const auto& s : spec.sets) {
        std::uint32_t m = 0;
        for (int item : s) m |= (1u << (item - 1));
        masks.push_back(m);
    }
    const std::uint32_t all = spec.n_items == 32 ? ~0u : ((1u << spec.n_items) - 1);
    for (std::uint32_t pick = 0; pick <= all; ++pick) {
        if (std::popcount(pick) > spec.k_query) continue;
        bool hits = true;
        for (std::uint32_t m : masks)
            if (!(m & pick)) {
                hits = false;
                break;
            }
        if (hits) return true;
    }
    return false;
}

}  // namespace kadapt::gen
