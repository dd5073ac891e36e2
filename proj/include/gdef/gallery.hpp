#pragma once

// Built-in example charts and curve pairs. Each entry is the text of a chart
// file; its [expected] section holds the regression fixtures.

#include <string>
#include <vector>

#include "gdef/chart_file.hpp"

namespace gdef {

struct GalleryEntry {
  std::string name;
  std::string text;
};

const std::vector<GalleryEntry>& gallery();
// Throws std::out_of_range for an unknown name.
const GalleryEntry& gallery_entry(const std::string& name);
ChartFile gallery_chart(const std::string& name);

}  // namespace gdef
