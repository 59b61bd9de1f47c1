// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vsim {

// Base class for all errors thrown by this library.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridTooCoarse : SimError { using SimError::SimError; };
struct GridTooShort : SimError { using SimError::SimError; };
struct GridMismatch : SimError { using SimError::SimError; };
struct InvalidSpec : SimError { using SimError::SimError; };
struct WrongScenario : SimError { using SimError::SimError; };
struct OutOfGrid : SimError { using SimError::SimError; };
struct EmptyEnsemble : SimError { using SimError::SimError; };
struct ConvergenceNotReached : SimError { using SimError::SimError; };
struct EmptyWindow : SimError { using SimError::SimError; };
struct AllSentinel : SimError { using SimError::SimError; };
struct ParseError : SimError { using SimError::SimError; };

// Config validation failure; `issues` lists one "field.path: problem" per entry.
struct ValidationError : SimError {
    std::vector<std::string> issues;

    explicit ValidationError(std::vector<std::string> problems)
        : SimError(join(problems)), issues(std::move(problems)) {}

  private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) {
            msg += "\n  - ";
            msg += p;
        }
        return msg;
    }
};

}  // namespace vsim
