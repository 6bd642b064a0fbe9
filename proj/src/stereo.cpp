// SPDX-License-Identifier: Apache-2.0

#include "aggsort/stereo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aggsort::stereo {

namespace {

int next_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comments, then reads one integer.
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value;
    if (!(in >> value)) throw std::invalid_argument("pgm: truncated header");
    return value;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5") {
        throw std::invalid_argument("pgm: expected P2 or P5");
    }
    const int width = next_pgm_token(in);
    const int height = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
        throw std::invalid_argument("pgm: unsupported dimensions or depth");
    }
    GrayImage img(width, height);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(img.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
            throw std::invalid_argument("pgm: truncated pixel data");
        }
    } else {
        for (auto& px : img.pixels) {
            int v;
            if (!(in >> v)) throw std::invalid_argument("pgm: truncated pixel data");
            px = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return img;
}

void write_pgm(std::ostream& out, const GrayImage& img, bool binary) {
    out << (binary ? "P5" : "P2") << "\n" << img.width << " " << img.height << "\n255\n";
    if (binary) {
        out.write(reinterpret_cast<const char*>(img.pixels.data()),
                  static_cast<std::streamsize>(img.pixels.size()));
    } else {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                out << int(img.at(x, y)) << (x + 1 == img.width ? "" : " ");
            }
            out << "\n";
        }
    }
}

CensusImage census_transform(const GrayImage& img, int window_w, int window_h) {
    if (window_w % 2 == 0 || window_h % 2 == 0 || window_w < 1 || window_h < 1) {
        throw std::invalid_argument("census: window must be odd in both dimensions");
    }
    if (window_w > img.width || window_h > img.height) {
        throw std::invalid_argument("census: window larger than image");
    }
    if (window_w * window_h - 1 > 64) {
        throw std::invalid_argument("census: descriptor exceeds 64 bits");
    }

    CensusImage out;
    out.width = img.width;
    out.height = img.height;
    out.window_w = window_w;
    out.window_h = window_h;
    out.bits.assign(std::size_t(img.width) * img.height, 0);
    out.valid.assign(std::size_t(img.width) * img.height, 0);

    const int rx = window_w / 2;
    const int ry = window_h / 2;
    for (int y = ry; y < img.height - ry; ++y) {
        for (int x = rx; x < img.width - rx; ++x) {
            const std::uint8_t center = img.at(x, y);
            std::uint64_t bits = 0;
            for (int dy = -ry; dy <= ry; ++dy) {
                for (int dx = -rx; dx <= rx; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    bits = (bits << 1) | (img.at(x + dx, y + dy) < center ? 1u : 0u);
                }
            }
            out.bits[std::size_t(y) * img.width + x] = bits;
            out.valid[std::size_t(y) * img.width + x] = 1;
        }
    }
    return out;
}

namespace {

std::vector<float> x_gradient(const GrayImage& img) {
    // Central differences with replicated borders.
    std::vector<float> g(std::size_t(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int xm = std::max(0, x - 1);
            const int xp = std::min(img.width - 1, x + 1);
            g[std::size_t(y) * img.width + x] =
                (float(img.at(xp, y)) - float(img.at(xm, y))) / 2.0f;
        }
    }
    return g;
}

struct MatchContext {
    const GrayImage* base;
    const GrayImage* other;
    const CensusImage* base_census;
    const CensusImage* other_census;
    const std::vector<float>* base_grad;
    const std::vector<float>* other_grad;
    const MatchOptions* opt;
    int direction;  // +1: other pixel = x - d (left base); -1: other pixel = x + d
};

inline double sample_cost(const MatchContext& ctx, int x, int y, int d) {
    const int ox = x - ctx.direction * d;
    const auto& opt = *ctx.opt;
    const double ad = std::min<double>(
        std::abs(int(ctx.base->at(x, y)) - int(ctx.other->at(ox, y))), opt.tau_ad);
    const int hamming = std::popcount(ctx.base_census->at(x, y) ^ ctx.other_census->at(ox, y));
    const double grad = std::min<double>(
        std::abs((*ctx.base_grad)[std::size_t(y) * ctx.base->width + x] -
                 (*ctx.other_grad)[std::size_t(y) * ctx.other->width + ox]),
        opt.tau_grad);
    return opt.w_ad * ad + opt.w_census * hamming + opt.w_grad * grad;
}

// One-directional WTA over the cost volume.
DisparityMap match_one_direction(const MatchContext& ctx) {
    const int width = ctx.base->width;
    const int height = ctx.base->height;
    const auto& opt = *ctx.opt;

    DisparityMap map;
    map.width = width;
    map.height = height;
    map.values.assign(std::size_t(width) * height, DisparityMap::kInvalid);

    // Cost volume, row-major per disparity plane; NaN marks unevaluable.
    const int planes = opt.d_max + 1;
    std::vector<float> volume(std::size_t(planes) * width * height,
                              std::numeric_limits<float>::quiet_NaN());

    auto volume_at = [&](int d, int x, int y) -> float& {
        return volume[(std::size_t(d) * height + y) * width + x];
    };

    auto fill_rows = [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < width; ++x) {
                if (!ctx.base_census->is_valid(x, y)) continue;
                for (int d = 0; d <= opt.d_max; ++d) {
                    const int ox = x - ctx.direction * d;
                    if (ox < 0 || ox >= width || !ctx.other_census->is_valid(ox, y)) continue;
                    volume_at(d, x, y) = float(sample_cost(ctx, x, y, d));
                }
            }
        }
    };

    auto run_parallel = [&](auto&& fn) {
        const int workers = std::max(1, opt.workers);
        if (workers == 1) {
            fn(0, height);
            return;
        }
        std::vector<std::future<void>> futures;
        const int chunk = (height + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int y0 = w * chunk;
            const int y1 = std::min(height, y0 + chunk);
            if (y0 >= y1) break;
            futures.push_back(std::async(std::launch::async, fn, y0, y1));
        }
        for (auto& f : futures) f.get();
    };

    run_parallel(fill_rows);

    std::vector<float> aggregated;
    if (opt.box_aggregate) {
        aggregated.assign(volume.size(), std::numeric_limits<float>::quiet_NaN());
        const int r = opt.box_radius;
        auto aggregate_rows = [&](int y0, int y1) {
            for (int y = y0; y < y1; ++y) {
                for (int x = 0; x < width; ++x) {
                    for (int d = 0; d <= opt.d_max; ++d) {
                        if (std::isnan(volume_at(d, x, y))) continue;
                        double sum = 0.0;
                        int n = 0;
                        for (int dy = -r; dy <= r; ++dy) {
                            for (int dx = -r; dx <= r; ++dx) {
                                const int xx = x + dx, yy = y + dy;
                                if (xx < 0 || xx >= width || yy < 0 || yy >= height) continue;
                                const float c = volume_at(d, xx, yy);
                                if (std::isnan(c)) continue;
                                sum += c;
                                ++n;
                            }
                        }
                        aggregated[(std::size_t(d) * height + y) * width + x] =
                            float(sum / std::max(1, n));
                    }
                }
            }
        };
        run_parallel(aggregate_rows);
    }
    const std::vector<float>& costs = opt.box_aggregate ? aggregated : volume;

    auto wta_rows = [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < width; ++x) {
                int best_d = -1;
                double best = std::numeric_limits<double>::infinity();
                double second = std::numeric_limits<double>::infinity();
                for (int d = 0; d <= opt.d_max; ++d) {
                    const float c = costs[(std::size_t(d) * height + y) * width + x];
                    if (std::isnan(c)) continue;
                    if (c < best) {  // ties keep the smaller disparity
                        second = best;
                        best = c;
                        best_d = d;
                    } else if (c < second) {
                        second = c;
                    }
                }
                if (best_d < 0) continue;
                if (std::isfinite(second)) {
                    if (second - best < opt.uniqueness_margin) continue;
                    if (best > opt.uniqueness_ratio * second) continue;
                }
                map.values[std::size_t(y) * width + x] = std::int16_t(best_d);
            }
        }
    };
    run_parallel(wta_rows);
    return map;
}

}  // namespace

DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right,
                               const MatchOptions& options) {
    if (left.width != right.width || left.height != right.height) {
        throw std::invalid_argument("compute_disparity: image dimensions differ");
    }
    if (options.d_max >= left.width) {
        throw std::invalid_argument("compute_disparity: d_max must be below the image width");
    }
    if (options.d_max < 0 || options.d_max > 254) {
        throw std::invalid_argument("compute_disparity: d_max must be in [0, 254]");
    }

    const CensusImage census_l = census_transform(left, options.census_w, options.census_h);
    const CensusImage census_r = census_transform(right, options.census_w, options.census_h);
    const std::vector<float> grad_l = x_gradient(left);
    const std::vector<float> grad_r = x_gradient(right);

    MatchContext ctx_l{&left, &right, &census_l, &census_r, &grad_l, &grad_r, &options, +1};
    MatchContext ctx_r{&right, &left, &census_r, &census_l, &grad_r, &grad_l, &options, -1};
    DisparityMap d_left = match_one_direction(ctx_l);
    const DisparityMap d_right = match_one_direction(ctx_r);

    // Left-right consistency.
    for (int y = 0; y < left.height; ++y) {
        for (int x = 0; x < left.width; ++x) {
            const std::int16_t d = d_left.at(x, y);
            if (d == DisparityMap::kInvalid) continue;
            const int xr = x - d;
            bool consistent = false;
            if (xr >= 0) {
                const std::int16_t dr = d_right.at(xr, y);
                consistent =
                    dr != DisparityMap::kInvalid && std::abs(int(dr) - int(d)) <= options.lr_max_diff;
            }
            if (!consistent) {
                d_left.values[std::size_t(y) * left.width + x] = DisparityMap::kInvalid;
            }
        }
    }
    return d_left;
}

double disparity_to_depth(double d_px, double fx_px, double baseline_m) {
    if (!(d_px > 0.0)) {
        throw std::domain_error("disparity_to_depth: disparity must be positive");
    }
    return fx_px * baseline_m / d_px;
}

DepthMap disparity_map_to_depth(const DisparityMap& disparity, double fx_px, double baseline_m,
                                const DepthRange& range) {
    DepthMap out;
    out.width = disparity.width;
    out.height = disparity.height;
    out.meters.assign(disparity.values.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < disparity.values.size(); ++i) {
        const std::int16_t d = disparity.values[i];
        if (d <= 0) continue;
        const double z = fx_px * baseline_m / double(d);
        if (z < range.min_m || z > range.max_m) continue;
        out.meters[i] = z;
    }
    return out;
}

geom::Vec3 locate_3d(const cam::Pixel& pixel, double depth_m, const cam::Intrinsics& intr,
                     const cam::Distortion& dist, const DepthRange& range) {
    if (depth_m < range.min_m || depth_m > range.max_m) {
        std::ostringstream msg;
        msg << "locate_3d: depth " << depth_m << " outside working range [" << range.min_m
            << ", " << range.max_m << "]";
        throw std::out_of_range(msg.str());
    }
    const Eigen::Vector2d n = cam::undistort(intr, dist, pixel);
    return {n.x() * depth_m, n.y() * depth_m, depth_m};
}

void write_disparity_pgm(std::ostream& out, const DisparityMap& map) {
    out << "P2\n" << map.width << " " << map.height << "\n255\n";
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::int16_t d = map.at(x, y);
            out << (d == DisparityMap::kInvalid ? 255 : int(d))
                << (x + 1 == map.width ? "" : " ");
        }
        out << "\n";
    }
}

DisparityMap read_disparity_pgm(std::istream& in) {
    const GrayImage img = read_pgm(in);
    DisparityMap map;
    map.width = img.width;
    map.height = img.height;
    map.values.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        map.values[i] = img.pixels[i] == 255 ? DisparityMap::kInvalid
                                             : std::int16_t(img.pixels[i]);
    }
    return map;
}

void write_depth_text(std::ostream& out, const DepthMap& map) {
    out << map.width << " " << map.height << "\n";
    out.precision(9);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const double z = map.at(x, y);
            if (std::isnan(z)) {
                out << "nan";
            } else {
                out << z;
            }
            out << (x + 1 == map.width ? "" : " ");
        }
        out << "\n";
    }
}

DepthMap read_depth_text(std::istream& in) {
    DepthMap map;
    if (!(in >> map.width >> map.height) || map.width <= 0 || map.height <= 0) {
        throw std::invalid_argument("depth map: bad header");
    }
    map.meters.resize(std::size_t(map.width) * map.height);
    for (auto& z : map.meters) {
        std::string token;
        if (!(in >> token)) throw std::invalid_argument("depth map: truncated");
        z = token == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(token);
    }
    return map;
}

}  // namespace aggsort::stereo
