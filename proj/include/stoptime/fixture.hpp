#ifndef STOPTIME_FIXTURE_HPP
#define STOPTIME_FIXTURE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stoptime/stopping_time.hpp"

namespace stoptime {

/// Declarative description of a filtration plus stopping time. Either a
/// tensor chain (block sizes, product-state diagonals) or explicit
/// generators and an explicit density matrix.
struct FixtureConfig {
    int schema_version = 1;
    std::string name;

    // Ambient construction.
    std::vector<Eigen::Index> tensor_chain;                // tensor-chain mode
    Eigen::Index ambient_dim = 0;                          // explicit mode
    std::vector<std::vector<CMatrix>> algebra_generators;  // one list per grid point

    // State.
    std::vector<std::vector<double>> product_diagonals;  // tensor-chain mode
    std::optional<CMatrix> rho;                          // explicit mode

    std::vector<double> grid;

    // Stopping time: explicit interior values keyed by grid index, or a
    // seed for the random adapted generator.
    std::map<std::size_t, CMatrix> q_explicit;
    std::optional<std::uint64_t> random_seed;

    Tolerance tol;

    nlohmann::json to_json() const;
    static FixtureConfig from_json(const nlohmann::json& j);
};

struct LoadedFixture {
    FixtureConfig config;
    std::shared_ptr<const Filtration> filtration;
    std::optional<StoppingTime> stopping_time;
    std::string fingerprint;

    const StoppingTime& tau() const { return *stopping_time; }
};

/// Parses and fully validates a fixture file. Throws ParseError on malformed
/// input, ValidationError on invariant violations.
LoadedFixture load_fixture(const std::string& path);
LoadedFixture build_fixture(const FixtureConfig& config);

/// Deterministic-in-seed adapted stopping time: each increment is a
/// projection in A_{t_{i+1}} orthogonal to the previous value, obtained by
/// compressing a seeded random Hermitian to the remaining range and
/// thresholding at the spectral midpoint.
StoppingTime random_adapted_stopping_time(std::shared_ptr<const Filtration> filtration,
                                          std::uint64_t seed);

/// Deterministic stopping time jumping from 0 to 1 at the given grid index.
StoppingTime deterministic_stopping_time(std::shared_ptr<const Filtration> filtration,
                                         std::size_t jump_index);

/// The worked example shipped with the repo: M₂⊗M₂, product state with
/// diagonals (2/3, 1/3) on each factor, grid {0,1,2}, q₁ = e₁₁⊗1.
FixtureConfig f1_config();

/// FNV-1a fingerprint of the canonical config dump plus seed.
std::string fingerprint(const FixtureConfig& config);

} // namespace stoptime

#endif
