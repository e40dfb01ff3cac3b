// Copyright 2026 The collisional-tur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctur {

enum class ErrorCode {
    InvalidArgument,
    InvalidState,
    DegenerateKernel,
    NoUniqueSteadyState,
    DegenerateSpectrum,
    ZeroMeanCurrent,
    NotSaturated,
    NumericalBreakdown,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::InvalidState: return "invalid_state";
        case ErrorCode::DegenerateKernel: return "degenerate_kernel";
        case ErrorCode::NoUniqueSteadyState: return "no_unique_steady_state";
        case ErrorCode::DegenerateSpectrum: return "degenerate_spectrum";
        case ErrorCode::ZeroMeanCurrent: return "zero_mean_current";
        case ErrorCode::NotSaturated: return "not_saturated";
        case ErrorCode::NumericalBreakdown: return "numerical_breakdown";
    }
    return "unknown";
}

// All library failures are reported through this type; `code()` is stable
// and is what the sweep driver records in result rows.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ctur
