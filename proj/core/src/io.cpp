#include "kadapt/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kadapt/errors.hpp"

namespace kadapt::io {

using nlohmann::json;

namespace {

constexpr int kInstanceVersion = 1;
constexpr int kValueMatrixVersion = 1;

std::string objective_kind_name(ObjectiveKind k) {
    return k == ObjectiveKind::MinDoseInTarget ? "min_dose_in_target" : "sum_dose";
}

ObjectiveKind objective_kind_from(const std::string& s) {
    if (s == "min_dose_in_target") return ObjectiveKind::MinDoseInTarget;
    if (s == "sum_dose") return ObjectiveKind::SumDose;
    throw IoError("unknown objective kind: " + s);
}

std::string constraint_kind_name(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::MaxDose: return "max_dose";
        case ConstraintKind::MeanDose: return "mean_dose";
        case ConstraintKind::MinDose: return "min_dose";
    }
    return "?";
}

ConstraintKind constraint_kind_from(const std::string& s) {
    if (s == "max_dose") return ConstraintKind::MaxDose;
    if (s == "mean_dose") return ConstraintKind::MeanDose;
    if (s == "min_dose") return ConstraintKind::MinDose;
    throw IoError("unknown constraint kind: " + s);
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
    json j;
    j["format"] = "kadapt-instance";
    j["version"] = kInstanceVersion;
    j["voxels"] = instance.voxel_count();
    j["beamlets"] = instance.beamlet_count();
    j["objective"] = {{"kind", objective_kind_name(instance.objective.kind)},
                      {"target", instance.objective.target}};
    json cons = json::array();
    for (const ConstraintSpec& c : instance.constraints)
        cons.push_back({{"structure", c.structure},
                        {"kind", constraint_kind_name(c.kind)},
                        {"bound", c.bound}});
    j["constraints"] = cons;
    json structs = json::object();
    for (const auto& [name, voxels] : instance.structures) structs[name] = voxels;
    j["structures"] = structs;
    if (instance.nominal_id)
        j["nominal_id"] = *instance.nominal_id;
    else
        j["nominal_id"] = nullptr;
    json scens = json::array();
    for (const Scenario& s : instance.scenarios) {
        scens.push_back({{"id", s.id},
                         {"label", s.label},
                         {"row_ptr", s.dose.row_ptr()},
                         {"col_idx", s.dose.col_idx()},
                         {"vals", s.dose.vals()}});
    }
    j["scenarios"] = scens;
    j["metadata"] = json::parse(instance.metadata_json);
    return j.dump(1);
}

Instance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("instance parse error: ") + e.what());
    }
    if (j.value("format", "") != "kadapt-instance")
        throw IoError("not a kadapt-instance file");
    if (j.value("version", 0) != kInstanceVersion)
        throw IoError("unsupported instance version");
    Instance inst;
    const int voxels = j.at("voxels").get<int>();
    const int beamlets = j.at("beamlets").get<int>();
    inst.objective.kind = objective_kind_from(j.at("objective").at("kind").get<std::string>());
    inst.objective.target = j.at("objective").at("target").get<std::string>();
    for (const json& c : j.at("constraints")) {
        ConstraintSpec spec;
        spec.structure = c.at("structure").get<std::string>();
        spec.kind = constraint_kind_from(c.at("kind").get<std::string>());
        spec.bound = c.at("bound").get<double>();
        inst.constraints.push_back(std::move(spec));
    }
    for (auto it = j.at("structures").begin(); it != j.at("structures").end(); ++it)
        inst.structures[it.key()] = it.value().get<std::vector<int>>();
    if (!j.at("nominal_id").is_null()) inst.nominal_id = j.at("nominal_id").get<int>();
    for (const json& s : j.at("scenarios")) {
        Scenario sc;
        sc.id = s.at("id").get<int>();
        sc.label = s.value("label", "");
        sc.dose = CsrMatrix(voxels, beamlets, s.at("row_ptr").get<std::vector<std::int64_t>>(),
                            s.at("col_idx").get<std::vector<std::int32_t>>(),
                            s.at("vals").get<std::vector<double>>());
        inst.scenarios.push_back(std::move(sc));
    }
    inst.metadata_json = j.value("metadata", json::object()).dump();
    inst.validate();
    return inst;
}

void write_instance(const Instance& instance, const std::string& path) {
    write_file(path, instance_to_json(instance) + "\n");
}

Instance read_instance(const std::string& path) { return instance_from_json(read_file(path)); }

std::string value_matrix_to_json(const ValueMatrix& vm) {
    json j;
    j["format"] = "kadapt-vmcache";
    j["version"] = kValueMatrixVersion;
    j["plan_ids"] = vm.plan_ids();
    j["scenario_ids"] = vm.scenario_ids();
    json values = json::array();
    json feasible = json::array();
    for (int i = 0; i < vm.plan_count(); ++i) {
        json vrow = json::array();
        json frow = json::array();
        for (int s = 0; s < vm.scenario_count(); ++s) {
            vrow.push_back(vm.value(i, s));
            frow.push_back(vm.feasible(i, s) ? 1 : 0);
        }
        values.push_back(std::move(vrow));
        feasible.push_back(std::move(frow));
    }
    j["values"] = values;
    j["feasible"] = feasible;
    return j.dump(1);
}

class ValueMatrixIo {
public:
    static ValueMatrix from_json(const json& j) {
        ValueMatrix vm;
        vm.plan_ids_ = j.at("plan_ids").get<std::vector<int>>();
        vm.scenario_ids_ = j.at("scenario_ids").get<std::vector<int>>();
        const auto& values = j.at("values");
        const auto& feasible = j.at("feasible");
        if (values.size() != vm.plan_ids_.size() || feasible.size() != vm.plan_ids_.size())
            throw IoError("value matrix row count mismatch");
        for (size_t i = 0; i < values.size(); ++i) {
            const auto vrow = values[i].get<std::vector<double>>();
            const auto frow = feasible[i].get<std::vector<int>>();
            if (vrow.size() != vm.scenario_ids_.size() || frow.size() != vm.scenario_ids_.size())
                throw IoError("value matrix column count mismatch");
            vm.values_.insert(vm.values_.end(), vrow.begin(), vrow.end());
            for (int f : frow) vm.feasible_.push_back(f ? 1 : 0);
        }
        return vm;
    }
};

ValueMatrix value_matrix_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("value matrix parse error: ") + e.what());
    }
    if (j.value("format", "") != "kadapt-vmcache") throw IoError("not a kadapt-vmcache file");
    if (j.value("version", 0) != kValueMatrixVersion)
        throw IoError("unsupported value matrix version");
    return ValueMatrixIo::from_json(j);
}

void write_value_matrix(const ValueMatrix& vm, const std::string& path) {
    write_file(path, value_matrix_to_json(vm) + "\n");
}

ValueMatrix read_value_matrix(const std::string& path) {
    return value_matrix_from_json(read_file(path));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace kadapt::io
