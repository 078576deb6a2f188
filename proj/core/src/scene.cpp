#include "gsrast/scene.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gsrast {

static_assert(std::endian::native == std::endian::little,
              "binary PLY reader assumes a little-endian host");

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double y) { return std::log(y / (1.0 - y)); }

Vec3 Camera::position() const {
    // world_to_view = [R | t]; camera center = -R^T t
    const Mat3 rt = world_to_view.rotation_part().transposed();
    const Vec3 t = world_to_view.translation_part();
    return (rt * t) * -1.0;
}

Camera Camera::scaled(int factor) const {
    Camera c = *this;
    c.fx *= factor;
    c.fy *= factor;
    c.cx *= factor;
    c.cy *= factor;
    c.width *= factor;
    c.height *= factor;
    return c;
}

void Camera::validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("camera: focal lengths must be > 0");
    if (!(0.0 < znear && znear < zfar)) throw std::invalid_argument("camera: require 0 < znear < zfar");
    if (width < 4 || height < 4 || width % 2 != 0 || height % 2 != 0)
        throw std::invalid_argument("camera: width/height must be even and >= 4");
}

// ---------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------

namespace {

struct PlyProperty {
    std::string name;
    std::size_t offset = 0;  // bytes into one record
    std::size_t size = 0;
};

std::size_t ply_type_size(const std::string& type) {
    if (type == "float" || type == "float32" || type == "int" || type == "int32" ||
        type == "uint" || type == "uint32")
        return 4;
    if (type == "double" || type == "float64") return 8;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    throw std::runtime_error("ply: unsupported property type '" + type + "'");
}

struct PlyLayout {
    std::size_t vertex_count = 0;
    std::size_t stride = 0;
    std::map<std::string, PlyProperty> properties;

    const PlyProperty& require(const std::string& name) const {
        auto it = properties.find(name);
        if (it == properties.end())
            throw std::runtime_error("ply: missing required property '" + name + "'");
        return it->second;
    }
};

PlyLayout parse_ply_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw std::runtime_error("ply: missing magic line");
    PlyLayout layout;
    bool binary_le = false;
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "comment") continue;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            binary_le = (fmt == "binary_little_endian");
            continue;
        }
        if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) layout.vertex_count = count;
            continue;
        }
        if (word == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ls >> type >> name;
            if (type == "list") throw std::runtime_error("ply: list properties unsupported");
            PlyProperty p;
            p.name = name;
            p.size = ply_type_size(type);
            if (p.size != 4)
                throw std::runtime_error("ply: property '" + name + "' is not float32");
            p.offset = layout.stride;
            layout.stride += p.size;
            layout.properties.emplace(name, p);
            continue;
        }
        if (word == "end_header") {
            if (!binary_le) throw std::runtime_error("ply: format must be binary_little_endian 1.0");
            if (layout.vertex_count == 0) throw std::runtime_error("ply: missing vertex element");
            return layout;
        }
    }
    throw std::runtime_error("ply: missing end_header");
}

float read_f32(const char* record, const PlyProperty& p) {
    float v;
    std::memcpy(&v, record + p.offset, sizeof(float));
    return v;
}

}  // namespace

std::vector<GaussianSplat> load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scene file: " + path.string());
    const PlyLayout layout = parse_ply_header(in);

    const PlyProperty* pos[3] = {&layout.require("x"), &layout.require("y"), &layout.require("z")};
    const PlyProperty* dc[3] = {&layout.require("f_dc_0"), &layout.require("f_dc_1"),
                                &layout.require("f_dc_2")};
    std::vector<const PlyProperty*> rest(45);
    for (int i = 0; i < 45; ++i) rest[i] = &layout.require("f_rest_" + std::to_string(i));
    const PlyProperty* opacity = &layout.require("opacity");
    const PlyProperty* scale[3] = {&layout.require("scale_0"), &layout.require("scale_1"),
                                   &layout.require("scale_2")};
    const PlyProperty* rot[4] = {&layout.require("rot_0"), &layout.require("rot_1"),
                                 &layout.require("rot_2"), &layout.require("rot_3")};

    std::vector<GaussianSplat> splats;
    splats.reserve(layout.vertex_count);
    std::vector<char> record(layout.stride);
    for (std::size_t i = 0; i < layout.vertex_count; ++i) {
        if (!in.read(record.data(), static_cast<std::streamsize>(layout.stride)))
            throw std::runtime_error("ply: truncated vertex data at splat " + std::to_string(i));

        auto checked = [&](const PlyProperty& p) {
            const float v = read_f32(record.data(), p);
            if (!std::isfinite(v))
                throw std::runtime_error("ply: non-finite value in property '" + p.name +
                                         "' at splat " + std::to_string(i));
            return static_cast<double>(v);
        };

        GaussianSplat s;
        s.mean = {checked(*pos[0]), checked(*pos[1]), checked(*pos[2])};
        s.opacity = logistic(checked(*opacity));
        s.scale = {std::exp(checked(*scale[0])), std::exp(checked(*scale[1])),
                   std::exp(checked(*scale[2]))};
        const Quat raw{checked(*rot[0]), checked(*rot[1]), checked(*rot[2]), checked(*rot[3])};
        if (raw.norm() < 1e-12)
            throw std::runtime_error("ply: zero quaternion at splat " + std::to_string(i));
        s.rotation = raw.normalized();
        s.sh[0] = {checked(*dc[0]), checked(*dc[1]), checked(*dc[2])};
        // f_rest is channel-major: 15 coefficients for R, then G, then B.
        for (int k = 1; k < kShCoeffCount; ++k) {
            s.sh[k] = {checked(*rest[k - 1]), checked(*rest[15 + k - 1]),
                       checked(*rest[30 + k - 1])};
        }
        splats.push_back(s);
    }
    return splats;
}

void save_ply(const std::filesystem::path& path, const std::vector<GaussianSplat>& splats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << splats.size() << "\n";
    auto prop = [&](const std::string& n) { out << "property float " << n << "\n"; };
    prop("x"); prop("y"); prop("z");
    prop("nx"); prop("ny"); prop("nz");
    for (int i = 0; i < 3; ++i) prop("f_dc_" + std::to_string(i));
    for (int i = 0; i < 45; ++i) prop("f_rest_" + std::to_string(i));
    prop("opacity");
    for (int i = 0; i < 3; ++i) prop("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) prop("rot_" + std::to_string(i));
    out << "end_header\n";

    auto w = [&](double v) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(float));
    };
    for (const auto& s : splats) {
        w(s.mean.x); w(s.mean.y); w(s.mean.z);
        w(0.0); w(0.0); w(0.0);
        w(s.sh[0].x); w(s.sh[0].y); w(s.sh[0].z);
        for (int ch = 0; ch < 3; ++ch)
            for (int k = 1; k < kShCoeffCount; ++k) w(s.sh[k][ch]);
        w(logit(s.opacity));
        w(std::log(s.scale.x)); w(std::log(s.scale.y)); w(std::log(s.scale.z));
        w(s.rotation.w); w(s.rotation.x); w(s.rotation.y); w(s.rotation.z);
    }
}

// ---------------------------------------------------------------------------
// Camera text format
// ---------------------------------------------------------------------------

Camera load_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open camera file: " + path.string());
    Camera cam;
    std::map<std::string, bool> seen;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto num = [&](const char* what) {
            double v;
            if (!(ls >> v))
                throw std::runtime_error("camera: malformed value for '" + std::string(what) + "'");
            return v;
        };
        if (key == "width") cam.width = static_cast<int>(num("width"));
        else if (key == "height") cam.height = static_cast<int>(num("height"));
        else if (key == "fx") cam.fx = num("fx");
        else if (key == "fy") cam.fy = num("fy");
        else if (key == "cx") cam.cx = num("cx");
        else if (key == "cy") cam.cy = num("cy");
        else if (key == "znear") cam.znear = num("znear");
        else if (key == "zfar") cam.zfar = num("zfar");
        else if (key == "world_to_view") {
            for (int i = 0; i < 16; ++i) cam.world_to_view.m[i / 4][i % 4] = num("world_to_view");
        } else {
            throw std::runtime_error("camera: unknown key '" + key + "'");
        }
        seen[key] = true;
    }
    for (const char* key : {"width", "height", "fx", "fy", "cx", "cy", "world_to_view"}) {
        if (!seen.count(key)) throw std::runtime_error("camera: missing key '" + std::string(key) + "'");
    }
    cam.validate();
    return cam;
}

void save_camera(const std::filesystem::path& path, const Camera& cam) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out.precision(17);
    out << "width " << cam.width << "\nheight " << cam.height << "\n";
    out << "fx " << cam.fx << "\nfy " << cam.fy << "\n";
    out << "cx " << cam.cx << "\ncy " << cam.cy << "\n";
    out << "znear " << cam.znear << "\nzfar " << cam.zfar << "\n";
    out << "world_to_view";
    for (int i = 0; i < 16; ++i) out << " " << cam.world_to_view.m[i / 4][i % 4];
    out << "\n";
}

// ---------------------------------------------------------------------------
// Spherical harmonics (canonical 3DGS convention)
// ---------------------------------------------------------------------------

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

}  // namespace

std::array<double, kShCoeffCount> sh_basis(const Vec3& dir, int sh_degree) {
    std::array<double, kShCoeffCount> b{};
    const double x = dir.x, y = dir.y, z = dir.z;
    b[0] = kC0;
    if (sh_degree >= 1) {
        b[1] = -kC1 * y;
        b[2] = kC1 * z;
        b[3] = -kC1 * x;
    }
    if (sh_degree >= 2) {
        const double xx = x * x, yy = y * y, zz = z * z;
        b[4] = kC2[0] * x * y;
        b[5] = kC2[1] * y * z;
        b[6] = kC2[2] * (2.0 * zz - xx - yy);
        b[7] = kC2[3] * x * z;
        b[8] = kC2[4] * (xx - yy);
    }
    if (sh_degree >= 3) {
        const double xx = x * x, yy = y * y, zz = z * z;
        b[9] = kC3[0] * y * (3.0 * xx - yy);
        b[10] = kC3[1] * x * y * z;
        b[11] = kC3[2] * y * (4.0 * zz - xx - yy);
        b[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        b[13] = kC3[4] * x * (4.0 * zz - xx - yy);
        b[14] = kC3[5] * z * (xx - yy);
        b[15] = kC3[6] * x * (xx - 3.0 * yy);
    }
    return b;
}

ShBasisDerivs sh_basis_derivs(const Vec3& dir, int sh_degree) {
    ShBasisDerivs r;
    r.value = sh_basis(dir, sh_degree);
    const double x = dir.x, y = dir.y, z = dir.z;
    if (sh_degree >= 1) {
        r.d_dir[1] = {0.0, -kC1, 0.0};
        r.d_dir[2] = {0.0, 0.0, kC1};
        r.d_dir[3] = {-kC1, 0.0, 0.0};
    }
    if (sh_degree >= 2) {
        r.d_dir[4] = Vec3{y, x, 0.0} * kC2[0];
        r.d_dir[5] = Vec3{0.0, z, y} * kC2[1];
        r.d_dir[6] = Vec3{-2.0 * x, -2.0 * y, 4.0 * z} * kC2[2];
        r.d_dir[7] = Vec3{z, 0.0, x} * kC2[3];
        r.d_dir[8] = Vec3{2.0 * x, -2.0 * y, 0.0} * kC2[4];
    }
    if (sh_degree >= 3) {
        const double xx = x * x, yy = y * y, zz = z * z;
        r.d_dir[9] = Vec3{6.0 * x * y, 3.0 * xx - 3.0 * yy, 0.0} * kC3[0];
        r.d_dir[10] = Vec3{y * z, x * z, x * y} * kC3[1];
        r.d_dir[11] = Vec3{-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z} * kC3[2];
        r.d_dir[12] = Vec3{-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy} * kC3[3];
        r.d_dir[13] = Vec3{4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z} * kC3[4];
        r.d_dir[14] = Vec3{2.0 * x * z, -2.0 * y * z, xx - yy} * kC3[5];
        r.d_dir[15] = Vec3{3.0 * xx - 3.0 * yy, -6.0 * x * y, 0.0} * kC3[6];
    }
    return r;
}

ShColor eval_sh_color(const GaussianSplat& splat, const Vec3& cam_pos, int sh_degree) {
    const Vec3 offset = splat.mean - cam_pos;
    const double dist = offset.norm();
    if (dist < 1e-12)
        throw std::invalid_argument("eval_sh_color: splat mean coincides with camera position");
    const Vec3 dir = offset / dist;
    const auto basis = sh_basis(dir, sh_degree);
    ShColor out;
    for (int ch = 0; ch < 3; ++ch) {
        double v = 0.5;
        for (int k = 0; k < kShCoeffCount; ++k) v += basis[k] * splat.sh[k][ch];
        out.clamped[ch] = v < 0.0;
        (ch == 0 ? out.color.x : ch == 1 ? out.color.y : out.color.z) = std::max(0.0, v);
    }
    return out;
}

}  // namespace gsrast
