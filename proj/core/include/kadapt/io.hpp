#pragma once

#include <string>

#include "kadapt/evaluate.hpp"
#include "kadapt/types.hpp"

namespace kadapt::io {

/// Versioned JSON instance schema: dimensions, CSR arrays per scenario,
/// structures as index arrays, objective/constraint specs, metadata.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

void write_instance(const Instance& instance, const std::string& path);
Instance read_instance(const std::string& path);

/// Versioned value-matrix cache (JSON; doubles round-trip bit-exactly).
std::string value_matrix_to_json(const ValueMatrix& vm);
ValueMatrix value_matrix_from_json(const std::string& text);
void write_value_matrix(const ValueMatrix& vm, const std::string& path);
ValueMatrix read_value_matrix(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace kadapt::io
