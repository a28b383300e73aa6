#include "pointwolf/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace pointwolf {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view tok, double& v) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    return ec == std::errc() && ptr == end;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

PointCloud to_cloud(const std::vector<double>& flat, const std::string& source) {
    if (flat.empty()) throw InvalidInput(source + ": no points");
    PointCloud cloud = Eigen::Map<const PointCloud>(flat.data(), static_cast<Index>(flat.size() / 3), 3);
    if (!cloud.allFinite()) throw InvalidInput(source + ": non-finite coordinate");
    return cloud;
}

PointCloud read_xyz(std::istream& in, const std::string& source) {
    std::vector<double> flat;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (toks.size() != 3)
            throw ParseError(source, lineno, "expected 3 coordinates, found " + std::to_string(toks.size()));
        for (auto t : toks) {
            double v;
            if (!parse_double(t, v)) throw ParseError(source, lineno, "bad number '" + std::string(t) + "'");
            flat.push_back(v);
        }
    }
    return to_cloud(flat, source);
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

PointCloud read_ply(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || split_ws(line) != std::vector<std::string_view>{"ply"})
        throw ParseError(source, 1, "missing 'ply' magic");

    std::vector<PlyElement> elements;
    bool ascii = false;
    bool ended = false;
    while (next_line()) {
        const auto t = split_ws(line);
        if (t.empty()) continue;
        if (t[0] == "format") {
            if (t.size() < 2 || t[1] != "ascii")
                throw ParseError(source, lineno, "only ascii PLY is supported");
            ascii = true;
        } else if (t[0] == "comment" || t[0] == "obj_info") {
        } else if (t[0] == "element") {
            std::size_t count = 0;
            if (t.size() != 3 || std::from_chars(t[2].data(), t[2].data() + t[2].size(), count).ec != std::errc())
                throw ParseError(source, lineno, "malformed element line");
            elements.push_back({std::string(t[1]), count, {}});
        } else if (t[0] == "property") {
            if (elements.empty()) throw ParseError(source, lineno, "property before element");
            if (t.size() == 3) {
                elements.back().props.push_back({std::string(t[2]), false});
            } else if (t.size() == 5 && t[1] == "list") {
                elements.back().props.push_back({std::string(t[4]), true});
            } else {
                throw ParseError(source, lineno, "malformed property line");
            }
        } else if (t[0] == "end_header") {
            ended = true;
            break;
        } else {
            throw ParseError(source, lineno, "unknown header keyword '" + std::string(t[0]) + "'");
        }
    }
    if (!ended) throw ParseError(source, lineno, "missing end_header");
    if (!ascii) throw ParseError(source, lineno, "missing format line");

    std::vector<double> flat;
    bool have_vertex = false;
    for (const auto& el : elements) {
        const bool is_vertex = el.name == "vertex";
        int ix = -1, iy = -1, iz = -1;
        if (is_vertex) {
            have_vertex = true;
            for (std::size_t p = 0; p < el.props.size(); ++p) {
                const auto& pr = el.props[p];
                if (pr.is_list) continue;
                if (pr.name == "x") ix = static_cast<int>(p);
                if (pr.name == "y") iy = static_cast<int>(p);
                if (pr.name == "z") iz = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw ParseError(source, lineno, "vertex element lacks x/y/z properties");
        }
        for (std::size_t r = 0; r < el.count; ++r) {
            do {
                if (!next_line())
                    throw ParseError(source, lineno, "unexpected end of file in element '" + el.name + "'");
            } while (split_ws(line).empty());
            if (!is_vertex) continue;
            const auto toks = split_ws(line);
            double xyz[3] = {0, 0, 0};
            std::size_t pos = 0;
            for (std::size_t p = 0; p < el.props.size(); ++p) {
                if (pos >= toks.size()) throw ParseError(source, lineno, "too few values");
                if (el.props[p].is_list) {
                    std::size_t n = 0;
                    if (std::from_chars(toks[pos].data(), toks[pos].data() + toks[pos].size(), n).ec != std::errc())
                        throw ParseError(source, lineno, "bad list length");
                    pos += 1 + n;
                    continue;
                }
                const int which = (static_cast<int>(p) == ix) ? 0 : (static_cast<int>(p) == iy) ? 1
                                : (static_cast<int>(p) == iz) ? 2 : -1;
                if (which >= 0 && !parse_double(toks[pos], xyz[which]))
                    throw ParseError(source, lineno, "bad number '" + std::string(toks[pos]) + "'");
                ++pos;
            }
            if (pos > toks.size()) throw ParseError(source, lineno, "too few values");
            flat.insert(flat.end(), xyz, xyz + 3);
        }
    }
    if (!have_vertex) throw InvalidInput(source + ": PLY has no vertex element");
    return to_cloud(flat, source);
}

}  // namespace

std::string_view to_string(CloudFormat f) {
    return f == CloudFormat::XyzText ? "xyz" : "ply";
}

CloudFormat parse_cloud_format(std::string_view name) {
    const auto n = lower(name);
    if (n == "xyz" || n == "xyz-text" || n == "txt") return CloudFormat::XyzText;
    if (n == "ply" || n == "ply-ascii") return CloudFormat::PlyAscii;
    throw std::invalid_argument("unknown cloud format '" + std::string(name) + "'");
}

CloudFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = lower(path.extension().string());
    if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::XyzText;
    if (ext == ".ply") return CloudFormat::PlyAscii;
    throw InvalidInput("cannot infer cloud format from extension of " + path.string() +
                       " (use --format)");
}

std::string_view extension_of(CloudFormat f) {
    return f == CloudFormat::XyzText ? ".xyz" : ".ply";
}

PointCloud read_cloud(std::istream& in, CloudFormat format, const std::string& source) {
    return format == CloudFormat::XyzText ? read_xyz(in, source) : read_ply(in, source);
}

PointCloud read_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format) {
    const CloudFormat f = format ? *format : format_from_extension(path);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_cloud(in, f, path.string());
}

void write_cloud(const PointCloud& cloud, std::ostream& out, CloudFormat format) {
    if (cloud.rows() < 1) throw InvalidInput("refusing to write an empty point cloud");
    validate_cloud(cloud);
    out << std::setprecision(9);
    if (format == CloudFormat::PlyAscii) {
        out << "ply\nformat ascii 1.0\nelement vertex " << cloud.rows()
            << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    }
    for (Index i = 0; i < cloud.rows(); ++i)
        out << cloud(i, 0) << ' ' << cloud(i, 1) << ' ' << cloud(i, 2) << '\n';
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 std::optional<CloudFormat> format) {
    const CloudFormat f = format ? *format : format_from_extension(path);
    std::ostringstream buf;
    write_cloud(cloud, buf, f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << buf.str();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pointwolf
