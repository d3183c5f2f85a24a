#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "pollnet/network.hpp"

namespace pollnet {

// Seeds the weights came from, carried inside the model document.
struct ModelProvenance {
  std::optional<std::uint64_t> init_seed;
};

// JSON document with shapes, provenance and weight arrays. Weights are
// written as C99 hexadecimal float literals, so a save/load round trip is
// bit-exact.
void save_model(std::ostream& out, const Mlp& mlp, const ModelProvenance& provenance = {});
void save_model(const std::filesystem::path& path, const Mlp& mlp,
                const ModelProvenance& provenance = {});

Mlp load_model(std::istream& in);
Mlp load_model(const std::filesystem::path& path);

}  // namespace pollnet
