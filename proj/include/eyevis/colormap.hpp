#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "eyevis/error.hpp"
#include "eyevis/image.hpp"

namespace eyevis {

struct Colormap {
  std::string_view name;
  const std::array<Rgb, 256>& ramp;

  Rgb operator()(std::uint8_t level) const noexcept { return ramp[level]; }
};

// Throws kInvalidArgument for unknown names.
const Colormap& colormap_by_name(std::string_view name);
std::vector<std::string> colormap_names();

}  // namespace eyevis
