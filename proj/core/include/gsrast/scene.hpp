#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "gsrast/math.hpp"

namespace gsrast {

constexpr int kShCoeffCount = 16;  // degree <= 3, (d+1)^2 coefficients

/// One Gaussian primitive with activations already applied:
/// opacity through the logistic, scale through exp, rotation normalized.
struct GaussianSplat {
    Vec3 mean;
    Quat rotation;   // unit (w, x, y, z)
    Vec3 scale;      // world units, > 0
    double opacity = 0.0;  // in [0, 1]
    std::array<Vec3, kShCoeffCount> sh{};  // band 0 = DC, RGB per coefficient
};

struct Camera {
    Mat4 world_to_view = Mat4::identity();
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    double znear = 0.1, zfar = 100.0;

    Vec3 position() const;  // camera center in world space
    /// Same view scaled by an integer factor (resolution sweeps).
    Camera scaled(int factor) const;
    void validate() const;  // throws std::invalid_argument on bad fields
};

/// Binary little-endian PLY in the layout written by the reference 3DGS
/// trainer: x,y,z, f_dc_0..2, f_rest_0..44 (channel-major), opacity,
/// scale_0..2, rot_0..3. Unknown properties are skipped.
std::vector<GaussianSplat> load_ply(const std::filesystem::path& path);

/// Write splats back to the same layout with activations inverted
/// (logit opacity, log scale). Rotations are stored as-is.
void save_ply(const std::filesystem::path& path, const std::vector<GaussianSplat>& splats);

/// Plain-text camera description: "key value..." lines, '#' comments.
/// Required keys: width height fx fy cx cy znear zfar world_to_view (16
/// row-major numbers).
Camera load_camera(const std::filesystem::path& path);
void save_camera(const std::filesystem::path& path, const Camera& cam);

struct ShColor {
    Vec3 color;
    std::array<bool, 3> clamped{};  // channel hit the max(0, .) clamp
};

/// View-dependent color: max(0, sum_l Y_l(dir) * sh_l + 0.5) per channel,
/// dir = normalize(splat.mean - cam_pos). Throws on a degenerate direction.
ShColor eval_sh_color(const GaussianSplat& splat, const Vec3& cam_pos, int sh_degree = 3);

/// The 16 basis function values at a unit direction (canonical 3DGS
/// convention, constants folded). Coefficients above the degree are zero.
std::array<double, kShCoeffCount> sh_basis(const Vec3& dir, int sh_degree = 3);

/// Basis values plus their gradients w.r.t. the (unnormalized-input) unit
/// direction; used when routing color gradients back to the splat mean.
struct ShBasisDerivs {
    std::array<double, kShCoeffCount> value{};
    std::array<Vec3, kShCoeffCount> d_dir{};
};
ShBasisDerivs sh_basis_derivs(const Vec3& dir, int sh_degree = 3);

double logistic(double x);
double logit(double y);

}  // namespace gsrast
