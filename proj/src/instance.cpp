#include "pdpha/instance.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace pdpha {

using nlohmann::json;

const Point& Instance::node(size_t i) const {
    const size_t np = pickups.size();
    require(i <= 2 * np, "node index " + std::to_string(i) + " out of range (2n=" + std::to_string(2 * np) + ")");
    if (i == 0) return depot;
    if (i <= np) return pickups[i - 1];
    return deliveries[i - np - 1];
}

void Instance::validate() const {
    require(!pickups.empty(), "instance must have n >= 1 pairs");
    require(pickups.size() == deliveries.size(),
            "pickup/delivery pair count mismatch: " + std::to_string(pickups.size()) + " vs " +
                std::to_string(deliveries.size()));
    require(speed > 0, "vehicle speed must be positive");
    auto finite = [](const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
    require(finite(depot), "depot coordinates must be finite");
    for (const Point& p : pickups) require(finite(p), "pickup coordinates must be finite");
    for (const Point& p : deliveries) require(finite(p), "delivery coordinates must be finite");
}

std::string distribution_name(Distribution d) {
    return d == Distribution::Uniform ? "uniform" : "gaussian";
}

Distribution parse_distribution(const std::string& s) {
    if (s == "uniform") return Distribution::Uniform;
    if (s == "gaussian") return Distribution::Gaussian;
    throw std::invalid_argument("unknown distribution '" + s + "' (expected uniform or gaussian)");
}

void GeneratorConfig::validate() const {
    require(n >= 1, "generator config: n must be >= 1");
    if (distribution == Distribution::Gaussian) require(sdv > 0, "generator config: sdv must be > 0");
}

namespace {

Point draw_point(Rng& rng, const GeneratorConfig& cfg) {
    if (cfg.distribution == Distribution::Uniform) {
        return Point{rng.uniform(), rng.uniform()};
    }
    // truncated 2-D normal centered on the unit square: redraw until inside
    for (;;) {
        const double x = 0.5 + cfg.sdv * rng.normal();
        const double y = 0.5 + cfg.sdv * rng.normal();
        if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) return Point{x, y};
    }
}

}  // namespace

Instance generate(const GeneratorConfig& config) {
    config.validate();
    Rng rng(config.seed);
    Instance inst;
    inst.speed = 1.0;
    inst.depot = draw_point(rng, config);
    inst.pickups.reserve(config.n);
    inst.deliveries.reserve(config.n);
    for (size_t i = 0; i < config.n; ++i) inst.pickups.push_back(draw_point(rng, config));
    for (size_t i = 0; i < config.n; ++i) inst.deliveries.push_back(draw_point(rng, config));
    return inst;
}

std::vector<Instance> generate_many(const GeneratorConfig& config, size_t count) {
    config.validate();
    std::vector<Instance> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        GeneratorConfig sub = config;
        sub.seed = mix_seed(config.seed, 0x5eedu, i);
        out.push_back(generate(sub));
    }
    return out;
}

double distance(const Instance& inst, size_t i, size_t j) {
    const Point& a = inst.node(i);
    const Point& b = inst.node(j);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

std::string instance_to_json_line(const Instance& inst) {
    json j;
    j["n"] = inst.n();
    j["speed"] = inst.speed;
    j["depot"] = {inst.depot.x, inst.depot.y};
    json ps = json::array(), ds = json::array();
    for (const Point& p : inst.pickups) ps.push_back({p.x, p.y});
    for (const Point& p : inst.deliveries) ds.push_back({p.x, p.y});
    j["pickups"] = std::move(ps);
    j["deliveries"] = std::move(ds);
    return j.dump();
}

namespace {

Point point_from_json(const json& j) {
    require(j.is_array() && j.size() == 2, "point must be a [x,y] array");
    return Point{j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Instance instance_from_json_line(const std::string& line) {
    json j = json::parse(line);  // throws nlohmann::json::parse_error on bad input
    Instance inst;
    inst.speed = j.at("speed").get<double>();
    inst.depot = point_from_json(j.at("depot"));
    for (const json& p : j.at("pickups")) inst.pickups.push_back(point_from_json(p));
    for (const json& p : j.at("deliveries")) inst.deliveries.push_back(point_from_json(p));
    if (j.contains("n")) {
        require(j.at("n").get<size_t>() == inst.pickups.size(),
                "declared n=" + j.at("n").dump() + " does not match pickup count");
    }
    inst.validate();
    return inst;
}

void save_instances(const std::vector<Instance>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const Instance& inst : instances) out << instance_to_json_line(inst) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<Instance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path + " for reading");
    std::vector<Instance> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(instance_from_json_line(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace pdpha
