#pragma once

// Skin-tone measurement pipeline: HSV-threshold skin extraction, mask
// smoothing, k-means dominant-color clustering and the size-weighted
// CIELAB representative tone.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "tonepanel/common.hpp"

namespace tonepanel::color {

using Rgb8 = std::array<std::uint8_t, 3>;

/// A color in CIE 1976 L*a*b* (D65). L* is lightness on 0..100.
struct LabTone {
  double l_star = 0.0;
  double a_star = 0.0;
  double b_star = 0.0;
};

/// 8-bit RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb8> pixels;

  std::size_t size() const { return pixels.size(); }
  const Rgb8& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  Rgb8& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  static RgbImage filled(int w, int h, Rgb8 c) {
    RgbImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, c);
    return img;
  }
};

/// Boolean per-pixel skin mask with the source image's dimensions.
struct SkinMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// One k-means cluster: real-valued RGB centroid, member pixel count and the
/// centroid converted to Lab.
struct ColorCluster {
  std::array<double, 3> centroid_rgb{};
  std::size_t size = 0;
  LabTone centroid_lab;
};

/// HSV in the 8-bit convention (hue scaled to 0..179).
struct Hsv8 {
  std::uint8_t h = 0;
  std::uint8_t s = 0;
  std::uint8_t v = 0;
};

// Skin thresholds, inclusive, in 8-bit HSV.
inline constexpr Hsv8 kSkinLower{0, 48, 89};
inline constexpr Hsv8 kSkinUpper{20, 255, 255};

// Separable mask-smoothing kernel: the fixed 3-tap binomial (sigma ~ 0.85).
inline constexpr std::array<double, 3> kMaskKernel{0.25, 0.5, 0.25};

// ---------------------------------------------------------------------------
// Color space conversions
// ---------------------------------------------------------------------------

/// sRGB (real-valued channels on [0,255]) to CIELAB under D65. The white
/// point is taken as the matrix row sums so that (255,255,255) maps to
/// exactly (100, 0, 0).
inline LabTone srgb_to_lab(double r, double g, double b) {
  auto expand = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = expand(r), gl = expand(g), bl = expand(b);

  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  constexpr double xn = 0.4124564 + 0.3575761 + 0.1804375;
  constexpr double yn = 0.2126729 + 0.7151522 + 0.0721750;
  constexpr double zn = 0.0193339 + 0.1191920 + 0.9503041;

  auto f = [](double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    return t > delta3 ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(x / xn), fy = f(y / yn), fz = f(z / zn);
  return LabTone{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline LabTone srgb_to_lab(const Rgb8& c) { return srgb_to_lab(c[0], c[1], c[2]); }

/// RGB to HSV in the 8-bit convention: V = max, S = 255*(V-min)/V,
/// H = angle/2 rounded, so hue lives on 0..179.
inline Hsv8 rgb_to_hsv8(const Rgb8& c) {
  const int r = c[0], g = c[1], b = c[2];
  const int v = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int diff = v - mn;

  Hsv8 out;
  out.v = static_cast<std::uint8_t>(v);
  out.s = v == 0 ? 0 : static_cast<std::uint8_t>(std::lround(255.0 * diff / v));
  if (diff == 0) return out;

  double h;
  if (v == r)
    h = 60.0 * (g - b) / diff;
  else if (v == g)
    h = 120.0 + 60.0 * (b - r) / diff;
  else
    h = 240.0 + 60.0 * (r - g) / diff;
  if (h < 0) h += 360.0;
  long hh = std::lround(h / 2.0);
  if (hh >= 180) hh = 0;  // hue wraps
  out.h = static_cast<std::uint8_t>(hh);
  return out;
}

// ---------------------------------------------------------------------------
// Skin extraction
// ---------------------------------------------------------------------------

inline bool is_skin_hsv(const Hsv8& p) {
  return p.h >= kSkinLower.h && p.h <= kSkinUpper.h && p.s >= kSkinLower.s &&
         p.s <= kSkinUpper.s && p.v >= kSkinLower.v && p.v <= kSkinUpper.v;
}

/// Thresholds each pixel in HSV, then smooths the binary mask with the 3x3
/// kernel (replicate borders) and re-binarizes at 0.5.
inline SkinMask extract_skin_mask(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.size() != static_cast<std::size_t>(img.width) * img.height)
    throw Error("extract_skin_mask: invalid image");

  const int w = img.width, h = img.height;
  std::vector<double> raw(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    raw[i] = is_skin_hsv(rgb_to_hsv8(img.pixels[i])) ? 1.0 : 0.0;

  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };

  // horizontal then vertical pass
  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -1; k <= 1; ++k)
        acc += kMaskKernel[k + 1] * raw[static_cast<std::size_t>(y) * w + clampi(x + k, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  SkinMask mask;
  mask.width = w;
  mask.height = h;
  mask.bits.resize(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -1; k <= 1; ++k)
        acc += kMaskKernel[k + 1] * tmp[static_cast<std::size_t>(clampi(y + k, 0, h - 1)) * w + x];
      mask.bits[static_cast<std::size_t>(y) * w + x] = acc >= 0.5 ? 1 : 0;
    }
  return mask;
}

/// Keeps skin pixels, zeroes the rest.
inline RgbImage apply_mask(const RgbImage& img, const SkinMask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw Error("apply_mask: mask dimensions do not match image");
  RgbImage out = img;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.bits[i]) out.pixels[i] = {0, 0, 0};
  return out;
}

// ---------------------------------------------------------------------------
// Dominant colors (k-means over RGB)
// ---------------------------------------------------------------------------

struct KMeansDiagnostics {
  int iterations = 0;
  std::vector<double> objective_trace;  // within-cluster sum of squares per Lloyd step
};

namespace detail {

inline double sqdist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
  return dr * dr + dg * dg + db * db;
}

}  // namespace detail

/// k-means over the image's RGB triples. Duplicate colors are collapsed to
/// weighted points first, which leaves the arithmetic identical. k-means++
/// seeding from `seed`; Lloyd iterations stop when the largest centroid
/// shift drops below 1e-4 RGB units (or after 100 iterations). When the
/// image has fewer distinct colors than k, each distinct color becomes its
/// own cluster. Cluster sizes always partition the pixel count.
inline std::vector<ColorCluster> dominant_colors(const RgbImage& img, int k, std::uint64_t seed,
                                                 KMeansDiagnostics* diag = nullptr) {
  if (img.size() == 0) throw Error("dominant_colors: no pixels");
  if (k < 1) throw Error("dominant_colors: k must be >= 1");

  std::map<Rgb8, std::size_t> counts;
  for (const auto& p : img.pixels) ++counts[p];

  std::vector<std::array<double, 3>> pts;
  std::vector<double> wts;
  pts.reserve(counts.size());
  wts.reserve(counts.size());
  for (const auto& [c, n] : counts) {
    pts.push_back({double(c[0]), double(c[1]), double(c[2])});
    wts.push_back(static_cast<double>(n));
  }
  const std::size_t m = pts.size();

  auto make_cluster = [](const std::array<double, 3>& rgb, std::size_t size) {
    ColorCluster cl;
    cl.centroid_rgb = rgb;
    cl.size = size;
    cl.centroid_lab = srgb_to_lab(rgb[0], rgb[1], rgb[2]);
    return cl;
  };

  std::vector<ColorCluster> clusters;
  if (m <= static_cast<std::size_t>(k)) {
    for (std::size_t i = 0; i < m; ++i)
      clusters.push_back(make_cluster(pts[i], static_cast<std::size_t>(wts[i])));
  } else {
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };

    // k-means++: first center by weight, then weight * squared distance.
    std::vector<std::array<double, 3>> centers;
    std::vector<double> d2(m);
    {
      std::vector<double> cum(m);
      double total = 0;
      for (std::size_t i = 0; i < m; ++i) cum[i] = (total += wts[i]);
      const double u = uniform01() * total;
      std::size_t first = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
      centers.push_back(pts[std::min(first, m - 1)]);
    }
    while (centers.size() < static_cast<std::size_t>(k)) {
      double total = 0;
      std::vector<double> cum(m);
      for (std::size_t i = 0; i < m; ++i) {
        double best = detail::sqdist(pts[i], centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c)
          best = std::min(best, detail::sqdist(pts[i], centers[c]));
        d2[i] = best;
        cum[i] = (total += wts[i] * best);
      }
      if (total <= 0) break;  // all remaining points coincide with centers
      const double u = uniform01() * total;
      std::size_t pick = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
      centers.push_back(pts[std::min(pick, m - 1)]);
    }

    std::vector<int> assign(m, 0);
    std::vector<double> csize;
    double prev_obj = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < 100; ++iter) {
      double obj = 0;
      for (std::size_t i = 0; i < m; ++i) {
        int best = 0;
        double bd = detail::sqdist(pts[i], centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
          const double d = detail::sqdist(pts[i], centers[c]);
          if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
          }
        }
        assign[i] = best;
        obj += wts[i] * bd;
      }
      if (obj > prev_obj * (1 + 1e-12) + 1e-9)
        throw Error("dominant_colors: k-means objective increased");
      prev_obj = obj;
      if (diag) diag->objective_trace.push_back(obj);

      std::vector<std::array<double, 3>> sums(centers.size(), {0, 0, 0});
      csize.assign(centers.size(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (int ch = 0; ch < 3; ++ch) sums[assign[i]][ch] += wts[i] * pts[i][ch];
        csize[assign[i]] += wts[i];
      }
      // re-seed empty clusters with the worst-served point
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (csize[c] > 0) continue;
        std::size_t worst = 0;
        double wd = -1;
        for (std::size_t i = 0; i < m; ++i) {
          const double d = wts[i] * detail::sqdist(pts[i], centers[assign[i]]);
          if (d > wd && csize[assign[i]] > wts[i]) {
            wd = d;
            worst = i;
          }
        }
        for (int ch = 0; ch < 3; ++ch) {
          sums[assign[worst]][ch] -= wts[worst] * pts[worst][ch];
          sums[c][ch] = wts[worst] * pts[worst][ch];
        }
        csize[assign[worst]] -= wts[worst];
        csize[c] = wts[worst];
        assign[worst] = static_cast<int>(c);
      }

      double shift = 0;
      for (std::size_t c = 0; c < centers.size(); ++c) {
        std::array<double, 3> nc{sums[c][0] / csize[c], sums[c][1] / csize[c], sums[c][2] / csize[c]};
        for (int ch = 0; ch < 3; ++ch) shift = std::max(shift, std::abs(nc[ch] - centers[c][ch]));
        centers[c] = nc;
      }
      if (shift < 1e-4) {
        ++iter;
        break;
      }
    }
    if (diag) diag->iterations = iter;

    csize.assign(centers.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      int best = 0;
      double bd = detail::sqdist(pts[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = detail::sqdist(pts[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      assign[i] = best;
      csize[best] += wts[i];
    }
    std::vector<std::array<double, 3>> sums(centers.size(), {0, 0, 0});
    for (std::size_t i = 0; i < m; ++i)
      for (int ch = 0; ch < 3; ++ch) sums[assign[i]][ch] += wts[i] * pts[i][ch];
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (csize[c] <= 0) continue;
      clusters.push_back(make_cluster({sums[c][0] / csize[c], sums[c][1] / csize[c], sums[c][2] / csize[c]},
                                      static_cast<std::size_t>(std::llround(csize[c]))));
    }
  }

  std::sort(clusters.begin(), clusters.end(), [](const ColorCluster& a, const ColorCluster& b) {
    if (a.size != b.size) return a.size > b.size;
    return a.centroid_rgb < b.centroid_rgb;
  });
  return clusters;
}

/// Drops clusters whose centroid is (near-)black: L* below 5. These are the
/// masked-out background.
inline std::vector<ColorCluster> exclude_black_cluster(const std::vector<ColorCluster>& clusters) {
  if (clusters.empty()) throw Error("exclude_black_cluster: no clusters");
  std::vector<ColorCluster> kept;
  for (const auto& c : clusters)
    if (c.centroid_lab.l_star >= 5.0) kept.push_back(c);
  if (kept.empty()) throw Error("no skin clusters");
  return kept;
}

/// Size-weighted average of the cluster Lab centroids. Conversion to Lab
/// happens per cluster before averaging.
inline LabTone representative_tone(const std::vector<ColorCluster>& clusters) {
  if (clusters.empty()) throw Error("representative_tone: no clusters");
  double total = 0;
  for (const auto& c : clusters) total += static_cast<double>(c.size);
  if (total <= 0) throw Error("representative_tone: zero total size");
  LabTone t;
  for (const auto& c : clusters) {
    const double w = static_cast<double>(c.size) / total;
    t.l_star += w * c.centroid_lab.l_star;
    t.a_star += w * c.centroid_lab.a_star;
    t.b_star += w * c.centroid_lab.b_star;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct ToneMeasurement {
  LabTone tone;
  std::vector<ColorCluster> clusters;  // the retained (non-black) clusters
};

inline ToneMeasurement measure_image_detail(const RgbImage& img, std::uint64_t seed, int k = 5) {
  const SkinMask mask = extract_skin_mask(img);
  const RgbImage skin = apply_mask(img, mask);
  const auto clusters = dominant_colors(skin, k, seed);
  ToneMeasurement out;
  out.clusters = exclude_black_cluster(clusters);
  out.tone = representative_tone(out.clusters);
  return out;
}

/// Image to representative Lab tone. Deterministic for a fixed seed.
inline LabTone measure_image(const RgbImage& img, std::uint64_t seed) {
  return measure_image_detail(img, seed).tone;
}

}  // namespace tonepanel::color
