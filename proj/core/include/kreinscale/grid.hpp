#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace krein {

/// Layout of a log-spaced panel grid on [x_lo, x_hi].
struct GridOptions {
  double x_lo = 1e-100;
  double x_hi = 1e30;
  int panels_per_decade = 2;
  int nodes_per_panel = 20;
  /// Extra panel edges (kinks, atoms, integration limits). Points outside
  /// [x_lo, x_hi] are ignored.
  std::vector<double> breakpoints;
};

/// Extrapolated integral of a power-like integrand beyond the grid ends.
struct TailEstimate {
  double value = 0.0;
  /// Local log-slope of the integrand; the tail is summable iff it has the right sign.
  double exponent = 0.0;
  bool divergent = false;
};

/// Piecewise Chebyshev-Lobatto grid in t = log x.
///
/// Each panel carries its own copy of both endpoints, so a sampled function
/// may jump across a panel edge (atoms of a Stieltjes measure are placed on
/// edges). Cumulative integrals are computed spectrally inside each panel and
/// are right-continuous at edges.
class QuadratureGrid {
 public:
  explicit QuadratureGrid(const GridOptions& options);
  QuadratureGrid(std::vector<double> edges, int nodes_per_panel);

  std::size_t size() const noexcept { return x_.size(); }
  int panels() const noexcept { return static_cast<int>(edges_.size()) - 1; }
  int nodes_per_panel() const noexcept { return n_; }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> t() const noexcept { return t_; }
  std::span<const double> edges() const noexcept { return edges_; }
  double x_lo() const noexcept { return edges_.front(); }
  double x_hi() const noexcept { return edges_.back(); }

  std::size_t first_node(int panel) const noexcept {
    return static_cast<std::size_t>(panel) * static_cast<std::size_t>(n_);
  }
  /// Index of the panel containing x; edges belong to the panel on their right.
  int panel_of(double x) const;
  /// Index of the panel edge equal to x (relative 1e-13), or -1.
  int edge_index(double x) const;

  /// Samples f at every node.
  std::vector<double> sample(const std::function<double(double)>& f) const;
  /// Node i nudged a few ulps into its panel, so that a function with a jump at an
  /// edge is sampled by its one-sided limit there.
  double probe(std::size_t i) const noexcept;

  /// out[i] = start + integral of h dt from x_lo to node i. `edge_jumps`, when
  /// non-empty, has one entry per edge and is added when entering the panel
  /// that starts at that edge. Returns the final value. `first_panel` lets a
  /// caller resume from an already-known value at that panel's left edge.
  double cumulative(std::span<const double> h, std::span<double> out, double start = 0.0,
                    std::span<const double> edge_jumps = {}, int first_panel = 0) const;

  /// out[i] = integral of h dt over (x_i, x_hi] plus atoms in that interval. The end node
  /// of panel e-1 holds the left limit at edge e, so it counts the atom at e; the start
  /// node of panel e does not.
  double reverse_cumulative(std::span<const double> h, std::span<double> out,
                            std::span<const double> edge_jumps = {}) const;

  /// out[i] = integral over (x_a, x_i] for x_i >= x_a and minus the integral over (x_i, x_a]
  /// below it, where x_a = edges()[anchor]. Atoms follow the same conventions as above.
  void anchored_cumulative(std::span<const double> h, std::span<double> out, int anchor,
                           std::span<const double> edge_jumps = {}) const;

  /// Integral of h dt over the whole grid.
  double integral(std::span<const double> h) const;
  double panel_integral(std::span<const double> h, int panel) const;

  /// Barycentric interpolation of node values at x (right-continuous at edges).
  double interpolate(std::span<const double> values, double x) const;

  TailEstimate lower_tail(std::span<const double> h) const;
  TailEstimate upper_tail(std::span<const double> h) const;

  /// Splits every panel into two halves in t.
  QuadratureGrid refined() const;
  /// Splits panel [t_a, t_b] into pieces(t_a, t_b) >= 1 equal parts.
  QuadratureGrid subdivided(const std::function<int(double, double)>& pieces) const;
  /// Keeps only panels with right edge <= x (x_hi becomes the last such edge).
  QuadratureGrid truncated_above(double x) const;

 private:
  void build();

  int n_;
  std::vector<double> edges_;
  std::vector<double> x_;
  std::vector<double> t_;
  std::vector<double> ref_nodes_;    // Lobatto nodes on [-1, 1], ascending
  std::vector<double> cum_matrix_;   // n x n, integral from -1 to node i
  std::vector<double> cc_weights_;   // Clenshaw-Curtis weights on [-1, 1]
  std::vector<double> bary_;         // barycentric weights
};

/// Integral of f(x) dx over (a, b) for power-like f. a may be 0 and b may be
/// infinite; the ends are then handled by power-law extrapolation beyond
/// [1e-100, 1e100]. Throws DivergenceError if an extrapolated end diverges.
double integrate_dx(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breakpoints = {}, int nodes_per_panel = 20);

}  // namespace krein
