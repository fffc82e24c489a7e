#pragma once

#include <filesystem>

#include "kpad/dataset.hpp"
#include "kpad/image.hpp"
#include "kpad/random.hpp"

namespace kpad::synth {

/// Disc of value `inside` on `outside`, edge pixels anti-aliased by 4x4 supersampling.
GrayImage disc(int width, int height, double cx, double cy, double radius, double inside, double outside);

/// Smoothed uniform noise stretched to [0,1].
GrayImage texture(Rng& rng, int width, int height, double smoothing_sigma = 2.0);

struct BiscuitStyle {
  int size = 97;
  double background = 0.8;
  double biscuit = 0.55;
  double radius_fraction = 0.3;
  double texture_amplitude = 0.03;
};

enum class Defect { none, spots, bite, color };

/// A round "biscuit" with mild surface texture, optionally carrying a defect:
/// dark high-contrast spots, a bite out of the rim, or a discoloured patch.
GrayImage biscuit(Rng& rng, Defect defect, const BiscuitStyle& style = {});

/// Writes a `<root>/<class>/*.png` tree with `ok_count` clean biscuits and
/// `nok_count` defective ones spread over the three NOK classes.
std::vector<SampleRecord> write_dataset(const std::filesystem::path& root, std::size_t ok_count, std::size_t nok_count,
                                        std::uint64_t seed, const BiscuitStyle& style = {});

}  // namespace kpad::synth
