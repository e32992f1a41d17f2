#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nots/darcy.hpp"
#include "nots/field.hpp"

namespace nots {

/// One candidate: an input field and its true operator output.
struct PoolInstance {
    ScalarField input;
    ScalarField output;

    bool operator==(const PoolInstance&) const = default;
};

struct PoolMetadata {
    std::uint64_t seed = 0;
    std::string generator = "external";
    double tau = 0.0, alpha = 0.0, a_low = 0.0, a_high = 0.0;
    double forcing = 1.0;

    bool operator==(const PoolMetadata&) const = default;
};

/// Finite search space with ground-truth outputs. Indices are stable ids.
class CandidatePool {
public:
    CandidatePool(Grid2D grid, std::vector<PoolInstance> instances, PoolMetadata meta = {});

    const Grid2D& grid() const { return grid_; }
    std::size_t size() const { return instances_.size(); }
    const PoolInstance& operator[](std::size_t i) const { return instances_.at(i); }
    const std::vector<PoolInstance>& instances() const { return instances_; }
    const PoolMetadata& metadata() const { return meta_; }

    bool operator==(const CandidatePool& o) const {
        return grid_ == o.grid_ && instances_ == o.instances_ && meta_ == o.meta_;
    }

private:
    Grid2D grid_;
    std::vector<PoolInstance> instances_;
    PoolMetadata meta_;
};

/// n independent GRF -> binarize -> solve pipelines. Instance i depends only
/// on (seed, i).
CandidatePool generate_pool(std::size_t n, const GRFConfig& cfg, double a_low, double a_high, double g,
                            std::uint64_t seed, unsigned threads = 0);

DarcyInstance generate_instance(const GRFConfig& cfg, double a_low, double a_high, double g, std::uint64_t seed,
                                std::size_t index);

inline constexpr std::uint32_t kPoolFlagIndex = 1u;
inline constexpr std::uint32_t kPoolFlagMetadata = 2u;
inline constexpr std::size_t kPoolHeaderBytes = 24;

void write_pool(const CandidatePool& pool, const std::string& path);
CandidatePool read_pool(const std::string& path);

std::string serialize_pool(const CandidatePool& pool);
CandidatePool parse_pool(const std::string& bytes);

/// FNV-1a over the serialized pool.
std::uint64_t pool_digest(const CandidatePool& pool);
std::string hex_digest(std::uint64_t d);

}  // namespace nots
