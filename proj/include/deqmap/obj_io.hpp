#pragma once

// Wavefront OBJ reading/writing (v, vt, f records; triangles only).

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace deqmap {

namespace detail {

// Parses "v", "v/vt", "v//vn", "v/vt/vn" face corners; returns 0-based ids.
inline void parse_face_corner(const std::string& tok, int nv, int nvt, int& v, int& vt) {
    int fields[3] = {0, 0, 0};
    bool has[3] = {false, false, false};
    size_t start = 0;
    int slot = 0;
    while (slot < 3) {
        const size_t slash = tok.find('/', start);
        const std::string part = tok.substr(start, slash == std::string::npos ? slash : slash - start);
        if (!part.empty()) {
            try {
                fields[slot] = std::stoi(part);
            } catch (...) {
                throw DeqError("obj: bad face index '" + tok + "'");
            }
            has[slot] = true;
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
        ++slot;
    }
    if (!has[0]) throw DeqError("obj: face corner missing vertex index");
    auto resolve = [](int idx, int count, const char* what) {
        const int r = idx > 0 ? idx - 1 : count + idx;  // negative = relative to end
        if (r < 0 || r >= count) throw DeqError(std::string("obj: ") + what + " index out of range");
        return r;
    };
    v = resolve(fields[0], nv, "vertex");
    vt = has[1] ? resolve(fields[1], nvt, "texture") : -1;
}

}  // namespace detail

// Loads a triangle mesh. Texture coordinates, when present on every face
// corner, are transferred per vertex (last one wins on conflicts). Throws on
// non-triangular faces and malformed records.
[[nodiscard]] inline TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DeqError("obj: cannot open '" + path + "'");
    TriangleMesh m;
    std::vector<Vec2> vts;
    std::vector<std::pair<int, int>> vertex_vt;  // (vertex, vt) assignments
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z = 0.0;
            if (!(ls >> x >> y)) throw DeqError("obj: malformed vertex line");
            ls >> z;
            m.vertices.emplace_back(x, y, z);
        } else if (tag == "vt") {
            double u, v;
            if (!(ls >> u >> v)) throw DeqError("obj: malformed texture line");
            vts.emplace_back(u, v);
        } else if (tag == "f") {
            std::vector<std::pair<int, int>> corners;
            std::string tok;
            while (ls >> tok) {
                int v = -1, vt = -1;
                detail::parse_face_corner(tok, m.vertex_count(), static_cast<int>(vts.size()), v, vt);
                corners.emplace_back(v, vt);
            }
            if (corners.size() != 3) throw DeqError("obj: non-triangular face");
            m.faces.push_back({corners[0].first, corners[1].first, corners[2].first});
            for (auto [v, vt] : corners)
                if (vt >= 0) vertex_vt.emplace_back(v, vt);
        }
        // vn, o, g, s, usemtl, mtllib are ignored.
    }
    if (!vertex_vt.empty()) {
        m.uvs.assign(m.vertices.size(), Vec2::Zero());
        for (auto [v, vt] : vertex_vt) m.uvs[static_cast<size_t>(v)] = vts[static_cast<size_t>(vt)];
    }
    // Zero-area faces are a hard load error: every downstream formula divides
    // by the face area.
    for (const auto& [i, j, k] : m.faces)
        if (!(triangle_area_3d(m.vertices[i], m.vertices[j], m.vertices[k]) > 0.0))
            throw DeqError("obj: degenerate (zero-area) face");
    return m;
}

// Writes vertices (and per-vertex UVs when present) with round-trip-exact
// formatting.
inline void save_obj(const std::string& path, const TriangleMesh& m) {
    std::ofstream out(path);
    if (!out) throw DeqError("obj: cannot write '" + path + "'");
    char buf[160];
    for (const Vec3& p : m.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    const bool with_uv = m.uvs.size() == m.vertices.size() && !m.uvs.empty();
    if (with_uv)
        for (const Vec2& t : m.uvs) {
            std::snprintf(buf, sizeof(buf), "vt %.17g %.17g\n", t.x(), t.y());
            out << buf;
        }
    for (const auto& [i, j, k] : m.faces) {
        if (with_uv)
            std::snprintf(buf, sizeof(buf), "f %d/%d %d/%d %d/%d\n", i + 1, i + 1, j + 1, j + 1,
                          k + 1, k + 1);
        else
            std::snprintf(buf, sizeof(buf), "f %d %d %d\n", i + 1, j + 1, k + 1);
        out << buf;
    }
    if (!out) throw DeqError("obj: write failed for '" + path + "'");
}

}  // namespace deqmap
