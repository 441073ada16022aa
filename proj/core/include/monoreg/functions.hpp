#pragma once

#include <array>
#include <span>
#include <string>

#include "monoreg/metrics.hpp"

namespace monoreg {

/// Benchmark regression functions on [0,1]^2. f1..f6 are coordinatewise nondecreasing,
/// f7..f12 are not.
enum class FunctionId { f1 = 1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12 };

inline constexpr std::array<FunctionId, 12> kAllFunctions{
    FunctionId::f1, FunctionId::f2, FunctionId::f3, FunctionId::f4,  FunctionId::f5,  FunctionId::f6,
    FunctionId::f7, FunctionId::f8, FunctionId::f9, FunctionId::f10, FunctionId::f11, FunctionId::f12};

/// Evaluates f_id at a point of [0,1]^2.
double evaluate(FunctionId id, std::span<const double> x);
RegressionFunction regression_function(FunctionId id);

bool is_monotone_truth(FunctionId id) noexcept;

/// "f1".."f12".
std::string to_string(FunctionId id);
/// Throws ConfigError for unknown names.
FunctionId parse_function_id(const std::string& name);

}  // namespace monoreg
