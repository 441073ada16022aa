#include "monoreg/functions.hpp"

#include <cmath>
#include <numbers>

#include "monoreg/error.hpp"

namespace monoreg {

double evaluate(FunctionId id, std::span<const double> x) {
    if (x.size() != 2) {
        throw DomainError("benchmark functions are defined on [0,1]^2");
    }
    const double x1 = x[0];
    const double x2 = x[1];
    const double s = x1 + x2;
    const double c = s - 1.0;
    switch (id) {
    case FunctionId::f1:
        return s;
    case FunctionId::f2:
        return std::exp(x1 * x2);
    case FunctionId::f3:
        return s * s;
    case FunctionId::f4:
        return std::sqrt(s);
    case FunctionId::f5:
        return 1.0 / (1.0 + std::exp(-6.0 * c));
    case FunctionId::f6:
        return 0.0;
    case FunctionId::f7:
        return c * c;
    case FunctionId::f8:
        return 2.0 * c * c * c - c;
    case FunctionId::f9:
        return c * c * c - 0.5 * c;
    case FunctionId::f10:
        return std::sin(s * std::numbers::pi);
    case FunctionId::f11:
        return x1 - x2;
    case FunctionId::f12:
        return std::exp(-10.0 * c * c) + s;
    }
    throw DomainError("unknown function id");
}

RegressionFunction regression_function(FunctionId id) {
    return [id](std::span<const double> x) { return evaluate(id, x); };
}

bool is_monotone_truth(FunctionId id) noexcept {
    return static_cast<int>(id) <= 6;
}

std::string to_string(FunctionId id) {
    return "f" + std::to_string(static_cast<int>(id));
}

FunctionId parse_function_id(const std::string& name) {
    for (auto id : kAllFunctions) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw ConfigError("unknown regression function '" + name + "' (expected f1..f12)");
}

}  // namespace monoreg
