#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "pointwolf/core.hpp"

namespace pointwolf {

enum class CloudFormat {
    XyzText,   // "x y z" per line, '#' comments
    PlyAscii,  // ascii PLY, vertex element with x/y/z properties
};

std::string_view to_string(CloudFormat f);
CloudFormat parse_cloud_format(std::string_view name);

/// .xyz/.txt/.pts -> XyzText, .ply -> PlyAscii. Throws InvalidInput otherwise.
CloudFormat format_from_extension(const std::filesystem::path& path);

/// Canonical extension (with dot) for a format.
std::string_view extension_of(CloudFormat f);

/// An explicit `format` takes precedence over the extension.
PointCloud read_cloud(const std::filesystem::path& path,
                      std::optional<CloudFormat> format = std::nullopt);
PointCloud read_cloud(std::istream& in, CloudFormat format, const std::string& source = "<stream>");

/// Writes 9 significant digits per coordinate.
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 std::optional<CloudFormat> format = std::nullopt);
void write_cloud(const PointCloud& cloud, std::ostream& out, CloudFormat format);

}  // namespace pointwolf
