#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ipp/grid.hpp"
#include "ipp/kriging.hpp"
#include "ipp/rng.hpp"

namespace ipp {

/// Visited-cell mask over an H x W grid.
class VisitMask {
 public:
  VisitMask() = default;
  VisitMask(int h, int w) : h_(h), w_(w), bits_(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), false) {}

  int height() const { return h_; }
  int width() const { return w_; }
  bool contains(Cell c) const { return c.row >= 0 && c.row < h_ && c.col >= 0 && c.col < w_; }
  bool visited(Cell c) const { return bits_[index(c)]; }
  void mark(Cell c) {
    if (!bits_[index(c)]) {
      bits_[index(c)] = true;
      ++count_;
    }
  }
  int count() const { return count_; }
  int unvisited_count() const { return h_ * w_ - count_; }

 private:
  std::size_t index(Cell c) const {
    if (!contains(c)) {
      throw Error("VisitMask: cell out of bounds");
    }
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(c.col);
  }

  int h_ = 0;
  int w_ = 0;
  int count_ = 0;
  std::vector<bool> bits_;
};

/// Inputs to a single waypoint decision. pmap may be null for the random planner.
struct PlannerContext {
  Cell position;
  const VisitMask& visited;
  const PredictionMap* pmap;
  Rng& rng;
};

using Path = std::vector<Cell>;

double path_length(const Path& path);

Cell plan_random(const PlannerContext& ctx);

/// Argmax of noisy KV over all unvisited cells; residual ties resolve to row-major first.
Cell plan_gs(const PlannerContext& ctx);

/// Argmax of noisy KV over unvisited cells within radius of the current position. The radius
/// doubles until at least one candidate exists.
Cell plan_ls(const PlannerContext& ctx, double radius);

/// Open path from start through all points: nearest-neighbour construction then 2-opt.
/// The returned path begins with start.
Path tsp_order(const std::vector<Cell>& points, Cell start);

/// Nearest-neighbour construction alone (the initialization tsp_order improves on).
Path nearest_neighbor_order(const std::vector<Cell>& points, Cell start);

enum class QueueTag { random_init, kv_selected };

struct TspQueue {
  std::vector<Cell> pending;
  std::vector<QueueTag> tags;
  bool initialized = false;

  bool contains(Cell c) const;
};

struct TspDecision {
  Cell cell;
  QueueTag tag = QueueTag::kv_selected;
  /// Rank of the chosen cell's noisy KV among unvisited cells at decision time, as a fraction in
  /// (0, 1]; 1/N means it was the maximum.
  double kv_rank_fraction = 0.0;
};

/// Global KV search whose candidates are ordered by a TSP tour. On the first call the queue is
/// seeded with q_init random unvisited cells.
TspDecision plan_gs_tsp(const PlannerContext& ctx, TspQueue& queue, int q_init);

enum class PlannerKind { random, gs, ls, gs_tsp };

struct PlannerSpec {
  PlannerKind kind = PlannerKind::gs;
  int ls_level = 0;  // R in LS-R

  std::string label() const;
  static PlannerSpec parse(const std::string& label);
  static PlannerSpec ls(int level) { return {PlannerKind::ls, level}; }

  friend bool operator==(const PlannerSpec&, const PlannerSpec&) = default;
};

/// LS-R radius: R * 10 cells on a 32-wide grid, scaled proportionally for other widths.
double ls_radius(int level, int field_width);

}  // namespace ipp
