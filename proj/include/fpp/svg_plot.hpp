#pragma once

#include <string>

namespace fpp {

// Renders log p_hat against n^r from a results CSV: sampled points, an
// ordinary-least-squares line, and (when the rows carry d, alpha, and xi)
// a reference line with the predicted slope. Throws ConfigError when the
// CSV holds fewer than two rows with finite log_p.
void emit_plot(const std::string& csv_path, const std::string& svg_path);

}  // namespace fpp
