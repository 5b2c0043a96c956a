#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "blm/mesh.hpp"

namespace blm {

// Line-oriented mesh text format:
//
//   mesh2d 1
//   vertices N
//   <x> <y>            (N lines, 17 significant digits)
//   triangles M
//   <i> <j> <k>        (M lines, 0-based, counterclockwise)
//   boundary K
//   <i> <j> <tag>      (K lines, tag in {inflow, outflow, wall, obstacle})
//
// '#' starts a comment; blank lines are ignored.

inline void save_mesh(const Mesh& mesh, std::ostream& out) {
    out << "mesh2d 1\n";
    out << "vertices " << mesh.n_vertices() << "\n";
    for (const Vec2& v : mesh.vertices)
        out << format_double(v.x) << " " << format_double(v.y) << "\n";
    out << "triangles " << mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "boundary " << mesh.boundary_edges.size() << "\n";
    for (const auto& be : mesh.boundary_edges)
        out << be.a << " " << be.b << " " << tag_name(be.tag) << "\n";
}

struct MeshLoadOptions {
    // Reorient clockwise triangles instead of rejecting the file.
    bool auto_reorient = false;
};

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty, non-comment line; false at end of stream.
    bool next(std::string& line) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_no_;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const auto first = raw.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            line = raw.substr(first, raw.find_last_not_of(" \t\r") - first + 1);
            return true;
        }
        return false;
    }

    int line_no() const { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

}  // namespace detail

inline Mesh load_mesh(std::istream& in, const MeshLoadOptions& opts = {},
                      std::vector<std::string>* warnings = nullptr) {
    detail::LineReader reader(in);
    std::string line;

    const auto require_line = [&](const char* what) {
        if (!reader.next(line))
            throw ParseError(std::string("mesh: unexpected end of stream, expected ") + what,
                             reader.line_no());
    };

    require_line("header");
    if (line != "mesh2d 1") throw ParseError("mesh: malformed header '" + line + "'", reader.line_no());

    const auto read_count = [&](const char* section) {
        require_line(section);
        std::istringstream ss(line);
        std::string word;
        long n = -1;
        if (!(ss >> word >> n) || word != section || n < 0)
            throw ParseError(std::string("mesh: expected '") + section + " N'", reader.line_no());
        return static_cast<int>(n);
    };

    Mesh mesh;
    const int nv = read_count("vertices");
    mesh.vertices.reserve(nv);
    for (int i = 0; i < nv; ++i) {
        require_line("vertex coordinates");
        std::istringstream ss(line);
        Vec2 v;
        if (!(ss >> v.x >> v.y)) throw ParseError("mesh: bad vertex line", reader.line_no());
        mesh.vertices.push_back(v);
    }

    const int nt = read_count("triangles");
    mesh.triangles.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        require_line("triangle indices");
        std::istringstream ss(line);
        std::array<int, 3> tri{};
        if (!(ss >> tri[0] >> tri[1] >> tri[2]))
            throw ParseError("mesh: bad triangle line", reader.line_no());
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw ParseError("mesh: triangle vertex index " + std::to_string(v) +
                                     " out of range [0," + std::to_string(nv) + ")",
                                 reader.line_no());
        mesh.triangles.push_back(tri);
        if (mesh.tri_area(t) <= 0.0) {
            if (!opts.auto_reorient)
                throw ParseError("mesh: triangle with non-positive area (clockwise orientation?)",
                                 reader.line_no());
            std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
            if (mesh.tri_area(t) <= 0.0)
                throw ParseError("mesh: degenerate triangle", reader.line_no());
            if (warnings)
                warnings->push_back("reoriented clockwise triangle at line " +
                                    std::to_string(reader.line_no()));
        }
    }

    const int nb = read_count("boundary");
    mesh.boundary_edges.reserve(nb);
    for (int k = 0; k < nb; ++k) {
        require_line("boundary edge");
        std::istringstream ss(line);
        Mesh::BoundaryEdge be;
        std::string tag;
        if (!(ss >> be.a >> be.b >> tag)) throw ParseError("mesh: bad boundary line", reader.line_no());
        if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv)
            throw ParseError("mesh: boundary vertex index out of range", reader.line_no());
        if (!parse_tag(tag, be.tag))
            throw ParseError("mesh: unknown boundary tag '" + tag + "'", reader.line_no());
        mesh.boundary_edges.push_back(be);
    }

    try {
        detail::finalize_mesh(mesh);
    } catch (const Error& e) {
        throw ParseError(e.what(), reader.line_no());
    }
    return mesh;
}

inline std::string mesh_to_string(const Mesh& mesh) {
    std::ostringstream ss;
    save_mesh(mesh, ss);
    return ss.str();
}

inline Mesh mesh_from_string(const std::string& text, const MeshLoadOptions& opts = {},
                             std::vector<std::string>* warnings = nullptr) {
    std::istringstream ss(text);
    return load_mesh(ss, opts, warnings);
}

}  // namespace blm
