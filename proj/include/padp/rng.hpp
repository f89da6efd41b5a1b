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

#ifndef PADP_RNG_HPP
#define PADP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace padp
{
    // Named sub-streams derived from the single top-level seed
    enum class StreamTag : std::uint64_t
    {
        scenario = 0x5343454eULL,
        drift = 0x44524946ULL,
        noise = 0x4e4f4953ULL,
        calibration = 0x43414c49ULL,
    };

    inline std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Random stream keyed by (seed, tag, index). The engine is fully specified by the standard;
    // the variates below are computed by hand because std:: distributions differ between
    // standard library implementations and outputs must be reproducible across platforms.
    class RandomStream
    {
    public:
        RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
            : engine_(splitmix64(splitmix64(seed ^ std::uint64_t(tag)) + index))
        {
        }

        // (0, 1]
        double uniform() { return double((engine_() >> 11) + 1) * 0x1.0p-53; }

        double normal()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            const double r = std::sqrt(-2.0 * std::log(uniform()));
            const double phi = 2.0 * std::numbers::pi * uniform();
            spare_ = r * std::sin(phi);
            has_spare_ = true;
            return r * std::cos(phi);
        }

        double exponential() { return -std::log(uniform()); }

        // Uniform integer in [0, n)
        std::uint64_t below(std::uint64_t n) { return std::uint64_t(double(engine_() >> 11) * 0x1.0p-53 * double(n)); }

        double uniform(double lo, double hi) { return lo + (hi - lo) * (1.0 - uniform()); }

    private:
        std::mt19937_64 engine_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };
}

#endif
