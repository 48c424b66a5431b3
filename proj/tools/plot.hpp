#pragma once

#include <string>

namespace dap::plot {

// Renders a report file to SVG. Understands histogram JSON (overlaid
// per-setting histograms), training history CSV (loss and dev MRR per epoch)
// and SSRC JSON (per-category and per-perturbation bars).
std::string render_file(const std::string& path, const std::string& title = "");

}  // namespace dap::plot
