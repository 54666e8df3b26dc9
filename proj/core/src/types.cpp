#include "kadapt/types.hpp"

#include <algorithm>

#include "kadapt/errors.hpp"

namespace kadapt {

const std::vector<int>& Instance::structure(const std::string& name) const {
    auto it = structures.find(name);
    if (it == structures.end()) throw InvalidInstance("unknown structure: " + name);
    return it->second;
}

bool Instance::overdose_only() const {
    return std::none_of(constraints.begin(), constraints.end(), [](const ConstraintSpec& c) {
        return c.kind == ConstraintKind::MinDose;
    });
}

void Instance::validate() const {
    if (scenarios.empty()) throw InvalidInstance("instance has no scenarios");
    const int rows = scenarios[0].dose.rows();
    const int cols = scenarios[0].dose.cols();
    for (size_t i = 0; i < scenarios.size(); ++i) {
        const Scenario& s = scenarios[i];
        if (s.id != static_cast<int>(i))
            throw InvalidInstance("scenario ids must be 0..T-1 without gaps");
        if (s.dose.rows() != rows || s.dose.cols() != cols)
            throw InvalidInstance("scenario dose matrices differ in shape");
        if (!s.dose.all_nonnegative())
            throw InvalidInstance("scenario dose matrix has negative entries");
    }
    if (nominal_id && (*nominal_id < 0 || *nominal_id >= scenario_count()))
        throw InvalidInstance("nominal_id out of range");
    for (const auto& [name, voxels] : structures) {
        if (voxels.empty()) throw InvalidInstance("structure '" + name + "' is empty");
        for (int v : voxels)
            if (v < 0 || v >= rows)
                throw InvalidInstance("structure '" + name + "' has voxel index out of range");
    }
    structure(objective.target);  // must exist
    for (const ConstraintSpec& c : constraints) {
        structure(c.structure);
        if (!(c.bound > 0.0)) throw InvalidInstance("constraint bound must be positive");
    }
}

}  // namespace kadapt
