#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace synthbench {

/// Two interleaving half circles with Gaussian noise: columns x, y and a
/// binary label. Row order alternates between the moons.
inline Table make_moons(std::size_t n, double noise, std::uint64_t seed, const std::string& name = "moons") {
    if (n < 2) throw DatasetError(DatasetErrc::invalid_schema, "make_moons: n must be >= 2");
    if (!(noise >= 0)) throw DatasetError(DatasetErrc::invalid_schema, "make_moons: noise must be >= 0");
    Rng rng = Rng(seed).split("moons");
    Schema schema;
    schema.dataset_name = name;
    schema.task = TaskKind::binclass;
    schema.columns = {{"x", ColumnKind::numeric, false},
                      {"y", ColumnKind::numeric, false},
                      {"label", ColumnKind::categorical, true}};
    Table::Vocabularies vocab(3);
    vocab[2] = {"0", "1"};
    std::vector<double> cells;
    cells.reserve(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        const bool lower = i % 2 == 1;
        const double t = rng.uniform() * std::numbers::pi;
        double x = lower ? 1.0 - std::cos(t) : std::cos(t);
        double y = lower ? 0.5 - std::sin(t) : std::sin(t);
        x += noise * rng.normal();
        y += noise * rng.normal();
        cells.insert(cells.end(), {x, y, lower ? 1.0 : 0.0});
    }
    return Table(std::move(schema), std::move(vocab), std::move(cells));
}

}  // namespace synthbench
