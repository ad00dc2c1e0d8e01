#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pdpha/common.hpp"

namespace pdpha {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point& o) const { return x == o.x && y == o.y; }
};

// One pickup-and-delivery instance. Node indexing: 0 is the depot, 1..n are
// pickups, n+1..2n are deliveries; pickup i pairs with delivery i+n.
struct Instance {
    Point depot;
    std::vector<Point> pickups;
    std::vector<Point> deliveries;
    double speed = 1.0;

    size_t n() const { return pickups.size(); }
    size_t num_nodes() const { return 2 * pickups.size() + 1; }

    const Point& node(size_t i) const;

    bool is_pickup(size_t i) const { return i >= 1 && i <= n(); }
    bool is_delivery(size_t i) const { return i > n() && i <= 2 * n(); }
    size_t delivery_of(size_t pickup) const { return pickup + n(); }
    size_t pickup_of(size_t delivery) const { return delivery - n(); }

    // throws std::invalid_argument on any structural violation
    void validate() const;

    bool operator==(const Instance& o) const {
        return depot == o.depot && pickups == o.pickups && deliveries == o.deliveries && speed == o.speed;
    }
};

enum class Distribution { Uniform, Gaussian };

std::string distribution_name(Distribution d);
Distribution parse_distribution(const std::string& s);

struct GeneratorConfig {
    size_t n = 0;
    Distribution distribution = Distribution::Uniform;
    double sdv = 1.0;  // gaussian only
    uint64_t seed = 0;

    void validate() const;
};

// Deterministic for a fixed config. Uniform mode draws every coordinate
// i.i.d. U[0,1]; gaussian mode draws points from N((0.5,0.5), sdv^2 I) and
// redraws any point that lands outside the unit square. Vehicle speed is 1.
Instance generate(const GeneratorConfig& config);

// `count` instances with per-index sub-seeds derived from config.seed.
std::vector<Instance> generate_many(const GeneratorConfig& config, size_t count);

// Euclidean distance between nodes i and j, 0 <= i,j <= 2n.
double distance(const Instance& inst, size_t i, size_t j);

// JSON-lines instance files (one object per line), extension .pdp.jsonl:
//   {"n":..., "speed":..., "depot":[x,y], "pickups":[[x,y],...], "deliveries":[[x,y],...]}
void save_instances(const std::vector<Instance>& instances, const std::string& path);
std::vector<Instance> load_instances(const std::string& path);

std::string instance_to_json_line(const Instance& inst);
Instance instance_from_json_line(const std::string& line);

}  // namespace pdpha
