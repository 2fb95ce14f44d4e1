#include "ndf4d/sampling.hpp"

#include "ndf4d/errors.hpp"
#include "ndf4d/parallel.hpp"

namespace ndf4d {
namespace {

// Uniform draw from the open interval (lo, hi).
double open_uniform(double lo, double hi, SampleRng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  double x = dist(rng);
  while (x <= lo || x >= hi) x = dist(rng);
  return x;
}

}  // namespace

const TrainSample& SamplePool::at(std::size_t i) const {
  if (i < surface.size()) return surface[i];
  i -= surface.size();
  if (i < free.size()) return free[i];
  return certain.at(i - free.size());
}

std::vector<Point3> SamplePool::positions() const {
  std::vector<Point3> out;
  out.reserve(size());
  for (const auto* list : {&surface, &free, &certain}) {
    for (const auto& s : *list) out.push_back(s.q);
  }
  return out;
}

SampleRng frame_rng(std::uint64_t seed, FrameIndex t) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), 0x5A4D504Cu};
  return SampleRng(seq);
}

bool sample_ray(const Point3& origin, const Point3& endpoint, FrameIndex t, double truncation,
                int surface_samples, int free_samples, SampleRng& rng, std::vector<TrainSample>& out) {
  const Vec3 ray = endpoint - origin;
  const double range = ray.norm();
  if (!(range > truncation)) return false;
  const double band = truncation / range;
  auto emit = [&](double lambda, Region region) {
    out.push_back({origin + lambda * ray, (1.0 - lambda) * range, t, region});
  };
  for (int i = 0; i < surface_samples; ++i) emit(open_uniform(1.0 - band, 1.0 + band, rng), Region::kSurface);
  for (int i = 0; i < free_samples; ++i) emit(open_uniform(0.0, 1.0 - band, rng), Region::kFree);
  return true;
}

double nearest_in_scan(const Scan& scan, const Point3& p) {
  if (scan.points_world.empty()) throw DataError("nearest_in_scan on an empty scan");
  // A cell edge of 0.5 m matches the default truncation; any edge is exact.
  return PointIndex(scan.points_world, 0.5).nearest_distance(p);
}

SamplePool build_pool(const ScanSequence& seq, const MapConfig& cfg, std::uint64_t seed, int workers) {
  struct FrameSamples {
    std::vector<TrainSample> surface, free, certain;
    std::size_t skipped = 0;
  };
  std::vector<FrameSamples> per_frame(seq.scans().size());
  const double tau = cfg.truncation;

  parallel_for(per_frame.size(), workers, [&](std::size_t i) {
    const Scan& scan = seq.scans()[i];
    FrameSamples& fs = per_frame[i];
    SampleRng rng = frame_rng(seed, scan.frame);
    const PointIndex index(scan.points_world, tau);
    std::vector<TrainSample> ray_samples;
    for (const auto& endpoint : scan.points_world) {
      ray_samples.clear();
      if (!sample_ray(scan.origin, endpoint, scan.frame, tau, cfg.surface_samples, cfg.free_samples, rng,
                      ray_samples)) {
        ++fs.skipped;
        continue;
      }
      for (auto& s : ray_samples) {
        if (s.region == Region::kSurface) {
          fs.surface.push_back(s);
          continue;
        }
        const bool dense = (s.q - scan.origin).norm() < cfg.r_dense;
        if (dense && !index.any_within(s.q, tau)) {
          s.region = Region::kCertainFree;
          fs.certain.push_back(s);
        } else {
          fs.free.push_back(s);
        }
      }
    }
  });

  SamplePool pool;
  for (auto& fs : per_frame) {
    pool.surface.insert(pool.surface.end(), fs.surface.begin(), fs.surface.end());
    pool.free.insert(pool.free.end(), fs.free.begin(), fs.free.end());
    pool.certain.insert(pool.certain.end(), fs.certain.begin(), fs.certain.end());
    pool.skipped_rays += fs.skipped;
  }
  return pool;
}

}  // namespace ndf4d
