#pragma once

#include "aoi/env.hpp"
#include "aoi/types.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace fixtures {

/// Ten sensors: L_n = 10(n+1) B, β_n = 20(n+1) ms, δ_n = 1000(N-n)/N.
inline std::vector<aoi::SensorSpec> table1_sensors()
{
    std::vector<aoi::SensorSpec> s;
    for (int n = 0; n < 10; ++n) {
        s.push_back({10.0 * (n + 1), 20.0 * (n + 1), 1000.0 * (10 - n) / 10});
    }
    return s;
}

inline aoi::EnvConfig table1_env(std::uint64_t horizon = 1000)
{
    aoi::EnvConfig c;
    c.sensors = table1_sensors();
    c.success_prob = 0.9;
    c.horizon = horizon;
    return c;
}

inline aoi::EnvConfig two_sensor_env(double p = 1.0, std::uint64_t horizon = 100)
{
    aoi::EnvConfig c;
    c.sensors = {{10.0, 20.0, 1000.0}, {20.0, 25.0, 500.0}};
    c.success_prob = p;
    c.horizon = horizon;
    c.history_len = 4;
    return c;
}

/// Random valid config with N in [2, 12], uniform or constant rates.
inline aoi::EnvConfig random_env(std::mt19937_64& g, std::uint64_t horizon)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    aoi::EnvConfig c;
    const std::size_t n = 2 + g() % 11;
    for (std::size_t i = 0; i < n; ++i) {
        c.sensors.push_back({1.0 + 99.0 * u(g), 5.0 + 195.0 * u(g), 1000.0 * u(g)});
    }
    c.success_prob = 0.3 + 0.7 * u(g);
    if (g() % 2) {
        const double lo = 1.0 + 9.0 * u(g);
        c.rate_model = aoi::RateModel::uniform(lo, lo + 1.0 + 20.0 * u(g));
    } else {
        c.rate_model = aoi::RateModel::constant(1.0 + 19.0 * u(g));
    }
    c.horizon = horizon;
    c.history_len = 1 + g() % 12;
    return c;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("aoi_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace fixtures
