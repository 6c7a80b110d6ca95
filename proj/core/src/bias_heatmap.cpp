#include <ostream>

#include "ssan/encoder.hpp"
#include "ssan/error.hpp"

namespace ssan {

BiasHeatmap export_bias_heatmap(std::span<const BiasRecord> records,
                                std::size_t layers) {
  if (records.empty()) throw Error("bias heatmap: no bias records");
  BiasHeatmap map;
  map.layers = layers;
  map.cells.resize(layers);
  std::vector<std::array<double, kDependencyCount>> totals(layers);
  for (const auto& r : records) {
    if (r.layer >= layers)
      throw Error("bias heatmap: record for layer " + std::to_string(r.layer) +
                  " in a " + std::to_string(layers) + "-layer grid");
    if (r.count == 0 || r.dependency == DependencyType::NA) continue;
    const auto d = index_of(r.dependency);
    totals[r.layer][d] += r.mean_bias * static_cast<double>(r.count);
    map.cells[r.layer][d].count += r.count;
  }
  for (std::size_t l = 0; l < layers; ++l)
    for (std::size_t d = 0; d < kDependencyCount; ++d) {
      auto& cell = map.cells[l][d];
      if (cell.count > 0)
        cell.mean_bias = totals[l][d] / static_cast<double>(cell.count);
    }
  return map;
}

void write_bias_heatmap(std::ostream& out, const BiasHeatmap& heatmap) {
  out << "layer\tdependency\tmean_bias\tcount\n";
  const auto precision = out.precision(17);
  for (std::size_t l = 0; l < heatmap.layers; ++l)
    for (auto dep : kAllDependencies) {
      const auto& cell = heatmap.cells[l][index_of(dep)];
      out << l << '\t' << dependency_name(dep) << '\t' << cell.mean_bias << '\t'
          << cell.count << '\n';
    }
  out.precision(precision);
}

}  // namespace ssan
