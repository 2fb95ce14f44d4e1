#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ndf4d/config.hpp"
#include "ndf4d/point_index.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

enum class Region : std::uint8_t { kSurface = 0, kFree = 1, kCertainFree = 2 };

/// One 4D training sample on a sensor ray. d_surf is the projective signed
/// distance to the ray endpoint: positive in front, negative behind.
struct TrainSample {
  Point3 q = Point3::Zero();
  double d_surf = 0.0;
  FrameIndex t = 0;
  Region region = Region::kSurface;
};

/// Samples grouped by region. Certain-free samples are dense free samples
/// whose own scan has no endpoint within the truncation distance.
struct SamplePool {
  std::vector<TrainSample> surface;
  std::vector<TrainSample> free;
  std::vector<TrainSample> certain;
  std::size_t skipped_rays = 0;

  std::size_t size() const { return surface.size() + free.size() + certain.size(); }
  /// Global index over surface, then free, then certain.
  const TrainSample& at(std::size_t i) const;
  std::vector<Point3> positions() const;
};

using SampleRng = std::mt19937_64;

/// Draws M_s samples with lambda in (1 - tau/R, 1 + tau/R) and M_f samples
/// with lambda in (0, 1 - tau/R) on the ray o -> s, appending them to `out`
/// (surface first). Returns false and appends nothing if R <= tau.
bool sample_ray(const Point3& origin, const Point3& endpoint, FrameIndex t, double truncation,
                int surface_samples, int free_samples, SampleRng& rng, std::vector<TrainSample>& out);

/// Exact nearest-endpoint distance within one scan.
double nearest_in_scan(const Scan& scan, const Point3& p);

/// Samples every ray of every scan and splits free samples into free and
/// certain-free. Each frame draws from its own stream seeded by
/// (seed, frame); output is concatenated in frame order.
SamplePool build_pool(const ScanSequence& seq, const MapConfig& cfg, std::uint64_t seed, int workers = 0);

SampleRng frame_rng(std::uint64_t seed, FrameIndex t);

}  // namespace ndf4d
