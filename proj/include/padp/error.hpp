// SPDX-License-Identifier: Apache-2.0
//
// padp - post-processing for gimbal-based mmWave angular channel measurements
// Copyright (C) 2026 The padp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PADP_ERROR_HPP
#define PADP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace padp
{
    // Invalid configuration or arguments (CLI exit code 2)
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Malformed or physically inconsistent data (CLI exit code 3)
    class DataError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // The calibration trace does not contain a usable hardware response
    class CalibrationError : public DataError
    {
    public:
        using DataError::DataError;
    };
}

#endif
