#include "ipp/planners.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace ipp {

double path_length(const Path& path) {
  if (path.empty()) {
    throw Error("path_length: empty path");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += distance(path[i - 1], path[i]);
  }
  return total;
}

namespace {

std::vector<Cell> unvisited_cells(const VisitMask& visited) {
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(visited.unvisited_count()));
  for (int r = 0; r < visited.height(); ++r) {
    for (int c = 0; c < visited.width(); ++c) {
      if (!visited.visited({r, c})) {
        out.push_back({r, c});
      }
    }
  }
  return out;
}

void require_unvisited(const VisitMask& visited) {
  if (visited.unvisited_count() <= 0) {
    throw Error("planner: no unvisited cells remain");
  }
}

const PredictionMap& require_map(const PlannerContext& ctx) {
  if (ctx.pmap == nullptr) {
    throw Error("planner: KV-based planning needs a prediction map");
  }
  return *ctx.pmap;
}

// Row-major first argmax over unvisited cells accepted by the filter.
template <typename Filter>
std::optional<Cell> argmax_unvisited(const GridField& kv, const VisitMask& visited, Filter&& accept) {
  std::optional<Cell> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < kv.height(); ++r) {
    for (int c = 0; c < kv.width(); ++c) {
      const Cell cell{r, c};
      if (visited.visited(cell) || !accept(cell)) {
        continue;
      }
      if (!best || kv(r, c) > best_value) {
        best = cell;
        best_value = kv(r, c);
      }
    }
  }
  return best;
}

}  // namespace

Cell plan_random(const PlannerContext& ctx) {
  require_unvisited(ctx.visited);
  const auto cells = unvisited_cells(ctx.visited);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  return cells[pick(ctx.rng)];
}

Cell plan_gs(const PlannerContext& ctx) {
  require_unvisited(ctx.visited);
  const GridField kv = noisy_kv(require_map(ctx).variance, ctx.rng);
  return *argmax_unvisited(kv, ctx.visited, [](Cell) { return true; });
}

Cell plan_ls(const PlannerContext& ctx, double radius) {
  if (!(radius > 0.0)) {
    throw Error("plan_ls: radius must be positive");
  }
  require_unvisited(ctx.visited);
  const GridField kv = noisy_kv(require_map(ctx).variance, ctx.rng);
  for (;; radius *= 2.0) {
    const auto best = argmax_unvisited(kv, ctx.visited, [&](Cell c) { return distance(c, ctx.position) <= radius; });
    if (best) {
      return *best;
    }
  }
}

Path nearest_neighbor_order(const std::vector<Cell>& points, Cell start) {
  Path path{start};
  std::vector<bool> used(points.size(), false);
  Cell current = start;
  for (std::size_t step = 0; step < points.size(); ++step) {
    std::size_t best = points.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!used[i] && distance(current, points[i]) < best_d) {
        best = i;
        best_d = distance(current, points[i]);
      }
    }
    used[best] = true;
    current = points[best];
    path.push_back(current);
  }
  return path;
}

namespace {

// 2-opt on an open path with a fixed first node: reverse path[i..j], 1 <= i < j <= n-1.
bool two_opt_pass(Path& path) {
  const std::size_t n = path.size();
  bool any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double delta = distance(path[i - 1], path[j]) - distance(path[i - 1], path[i]);
        if (j + 1 < n) {
          delta += distance(path[i], path[j + 1]) - distance(path[j], path[j + 1]);
        }
        if (delta < -1e-12) {
          std::reverse(path.begin() + static_cast<std::ptrdiff_t>(i), path.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = any = true;
        }
      }
    }
  }
  return any;
}

// Cuts after the fixed start into three consecutive pieces (the last may be empty, as the path
// end is free) and tries every order and orientation of them; first improvement wins. Covers
// or-opt segment moves and the 3-opt reconnections that 2-opt alone cannot reach.
bool three_segment_pass(Path& path) {
  const std::size_t n = path.size();
  const double base = path_length(path);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j; k <= n; ++k) {
        std::array<Path, 3> seg{Path(path.begin() + static_cast<std::ptrdiff_t>(i), path.begin() + static_cast<std::ptrdiff_t>(j)),
                                Path(path.begin() + static_cast<std::ptrdiff_t>(j), path.begin() + static_cast<std::ptrdiff_t>(k)),
                                Path(path.begin() + static_cast<std::ptrdiff_t>(k), path.end())};
        std::array<int, 3> order{0, 1, 2};
        do {
          for (int flips = 0; flips < 8; ++flips) {
            Path cand(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(i));
            for (int s = 0; s < 3; ++s) {
              const Path& piece = seg[static_cast<std::size_t>(order[s])];
              if (flips & (1 << s)) {
                cand.insert(cand.end(), piece.rbegin(), piece.rend());
              } else {
                cand.insert(cand.end(), piece.begin(), piece.end());
              }
            }
            if (path_length(cand) < base - 1e-12) {
              path = std::move(cand);
              return true;
            }
          }
        } while (std::next_permutation(order.begin(), order.end()));
      }
    }
  }
  return false;
}

}  // namespace

Path tsp_order(const std::vector<Cell>& points, Cell start) {
  if (points.empty()) {
    throw Error("tsp_order: no points");
  }
  Path path = nearest_neighbor_order(points, start);
  two_opt_pass(path);
  // Three-piece moves escape 2-opt optima; finish on 2-opt so the result stays 2-opt optimal.
  while (three_segment_pass(path)) {
    two_opt_pass(path);
  }
  return path;
}

bool TspQueue::contains(Cell c) const { return std::find(pending.begin(), pending.end(), c) != pending.end(); }

TspDecision plan_gs_tsp(const PlannerContext& ctx, TspQueue& queue, int q_init) {
  if (q_init < 0) {
    throw Error("plan_gs_tsp: q_init must be non-negative");
  }
  require_unvisited(ctx.visited);
  const PredictionMap& pmap = require_map(ctx);

  if (!queue.initialized) {
    queue.initialized = true;
    auto candidates = unvisited_cells(ctx.visited);
    const auto draws = std::min<std::size_t>(static_cast<std::size_t>(q_init), candidates.size());
    for (std::size_t i = 0; i < draws; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(ctx.rng)]);
      queue.pending.push_back(candidates[i]);
      queue.tags.push_back(QueueTag::random_init);
    }
  }

  for (std::size_t i = 0; i < queue.pending.size();) {
    if (ctx.visited.visited(queue.pending[i])) {
      queue.pending.erase(queue.pending.begin() + static_cast<std::ptrdiff_t>(i));
      queue.tags.erase(queue.tags.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }

  const GridField kv = noisy_kv(pmap.variance, ctx.rng);
  const Cell kv_best = *argmax_unvisited(kv, ctx.visited, [](Cell) { return true; });
  if (!queue.contains(kv_best)) {
    queue.pending.push_back(kv_best);
    queue.tags.push_back(QueueTag::kv_selected);
  }

  const Path tour = tsp_order(queue.pending, ctx.position);
  const Cell next = tour[1];
  const auto it = std::find(queue.pending.begin(), queue.pending.end(), next);
  const auto idx = static_cast<std::size_t>(it - queue.pending.begin());

  TspDecision decision;
  decision.cell = next;
  decision.tag = queue.tags[idx];
  int above = 0;
  const double chosen_kv = kv[next];
  for (int r = 0; r < kv.height(); ++r) {
    for (int c = 0; c < kv.width(); ++c) {
      if (!ctx.visited.visited({r, c}) && kv(r, c) > chosen_kv) {
        ++above;
      }
    }
  }
  decision.kv_rank_fraction = static_cast<double>(above + 1) / ctx.visited.unvisited_count();

  queue.pending.erase(it);
  queue.tags.erase(queue.tags.begin() + static_cast<std::ptrdiff_t>(idx));
  return decision;
}

std::string PlannerSpec::label() const {
  switch (kind) {
    case PlannerKind::random:
      return "Rand";
    case PlannerKind::gs:
      return "GS";
    case PlannerKind::gs_tsp:
      return "GS-TSP";
    case PlannerKind::ls:
      return "LS-" + std::to_string(ls_level);
  }
  return "?";
}

PlannerSpec PlannerSpec::parse(const std::string& label) {
  if (label == "Rand") {
    return {PlannerKind::random, 0};
  }
  if (label == "GS") {
    return {PlannerKind::gs, 0};
  }
  if (label == "GS-TSP") {
    return {PlannerKind::gs_tsp, 0};
  }
  if (label.size() == 4 && label.starts_with("LS-") && label[3] >= '1' && label[3] <= '9') {
    return ls(label[3] - '0');
  }
  throw Error("unknown planner label: " + label);
}

double ls_radius(int level, int field_width) {
  if (level < 1) {
    throw Error("ls_radius: level must be >= 1");
  }
  return 10.0 * level * static_cast<double>(field_width) / 32.0;
}

}  // namespace ipp
