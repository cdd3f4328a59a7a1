// Writes the synthetic annotated corpus and two lighting groups for the CLI tests.
#include <iostream>

#include "support.hpp"

int main(int argc, char** argv) {
  using namespace eyevis;
  if (argc != 3) {
    std::cerr << "usage: make_synthetic_corpus <corpus_dir> <groups_dir>\n";
    return 1;
  }
  const std::filesystem::path corpus = argv[1], groups = argv[2];
  std::filesystem::remove_all(corpus);
  std::filesystem::remove_all(groups);
  testing::write_synthetic_corpus(corpus, 5);
  for (int g = 0; g < 2; ++g) {
    const auto dir = groups / ("lamp" + std::to_string(g));
    std::filesystem::create_directories(dir);
    for (int k = 0; k < 3; ++k) {
      const std::uint8_t shift = static_cast<std::uint8_t>(10 * k + 5 * g);
      write_image(dir / ("shot_" + std::to_string(k) + ".png"),
                  testing::solid(32, 24, {static_cast<std::uint8_t>(200 - shift), 150, 120}));
    }
  }
  return 0;
}
