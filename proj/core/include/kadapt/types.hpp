#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kadapt/sparse.hpp"

namespace kadapt {

/// Feasibility tolerance, relative to each constraint bound.
inline constexpr double kFeasRelTol = 1e-7;
/// Absolute tolerance for objective-value comparisons (ties, repeat detection).
inline constexpr double kValueTol = 1e-9;

/// Internally every objective is minimized.
///   MinDoseInTarget: f(d) = -min_{i in target} d_i  (maximizing the minimum
///   target dose). SumDose: f(d) = sum_{i in target} d_i, used by the
///   hitting-set reduction family.
enum class ObjectiveKind { MinDoseInTarget, SumDose };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::MinDoseInTarget;
    std::string target;
};

/// MaxDose/MeanDose are overdose constraints (upper bounds). MinDose is an
/// underdose bound admitted only for the hitting-set reduction family.
enum class ConstraintKind { MaxDose, MeanDose, MinDose };

struct ConstraintSpec {
    std::string structure;
    ConstraintKind kind = ConstraintKind::MaxDose;
    double bound = 0.0;
};

struct Scenario {
    int id = 0;
    CsrMatrix dose;  // rows = voxels (Gy per unit weight), cols = beamlets
    std::string label;
};

/// A discrete-uncertainty planning instance: the scenario set, named voxel
/// structures, the objective, and the constraint list shared by all scenarios.
struct Instance {
    std::vector<Scenario> scenarios;
    std::optional<int> nominal_id;
    std::map<std::string, std::vector<int>> structures;
    ObjectiveSpec objective;
    std::vector<ConstraintSpec> constraints;
    std::string metadata_json = "{}";  // generator parameters + seed

    int scenario_count() const { return static_cast<int>(scenarios.size()); }
    int voxel_count() const { return scenarios.empty() ? 0 : scenarios[0].dose.rows(); }
    int beamlet_count() const { return scenarios.empty() ? 0 : scenarios[0].dose.cols(); }

    const std::vector<int>& structure(const std::string& name) const;
    bool overdose_only() const;

    /// Checks all structural invariants; throws InvalidInstance on violation.
    void validate() const;
};

enum class PhaseTag { Init, Generated, External };

/// A beamlet-weight vector with provenance: the canonical scenario cluster it
/// was optimized for and the phase that produced it.
struct PlanSolution {
    int id = 0;
    std::vector<double> weights;
    std::vector<int> origin;  // sorted scenario ids
    PhaseTag phase = PhaseTag::External;
    int generated_at_k = -1;  // K value during generation, -1 otherwise
};

}  // namespace kadapt
