#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "brwcrit/kernel.hpp"

namespace brwcrit {

/// Irreducible classes of a windowed graph: strongly connected components
/// plus the reachability order between classes.
struct ClassDecomposition {
  std::vector<int> class_of;               // site -> class id
  std::vector<std::vector<Site>> members;  // class id -> sites
  std::vector<std::vector<int>> class_adj; // condensation edges (dedup)
  std::vector<bool> has_self_loop;         // some x in class with an x->x edge

  int class_count() const { return static_cast<int>(members.size()); }

  /// A class carries a cycle iff it has >= 2 sites or a self-loop.
  bool class_has_cycle(int c) const {
    return members[static_cast<std::size_t>(c)].size() > 1 ||
           has_self_loop[static_cast<std::size_t>(c)];
  }

  /// Classes reachable from `from` in the condensation (including itself),
  /// sorted by id.
  std::vector<int> reachable_classes(int from) const {
    std::vector<bool> seen(members.size(), false);
    std::vector<int> stack{from}, out;
    seen[static_cast<std::size_t>(from)] = true;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      out.push_back(c);
      for (int d : class_adj[static_cast<std::size_t>(c)])
        if (!seen[static_cast<std::size_t>(d)]) {
          seen[static_cast<std::size_t>(d)] = true;
          stack.push_back(d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Site-level reachability x -> y within the window (x -> x always).
  bool reaches(Site x, Site y) const {
    int cx = class_of[static_cast<std::size_t>(x)];
    int cy = class_of[static_cast<std::size_t>(y)];
    auto r = reachable_classes(cx);
    return std::binary_search(r.begin(), r.end(), cy);
  }

  bool irreducible() const { return class_count() == 1; }
};

/// Tarjan SCC over adjacency lists, iterative to keep deep path graphs off
/// the call stack.
inline ClassDecomposition strongly_connected_components(
    const std::vector<std::vector<Site>>& adj) {
  const Site n = static_cast<Site>(adj.size());
  std::vector<int> index(adj.size(), -1);
  std::vector<int> low(adj.size(), 0);
  std::vector<bool> on_stack(adj.size(), false);
  std::vector<Site> stack;
  ClassDecomposition out;
  out.class_of.assign(adj.size(), -1);
  int next_index = 0;

  struct Frame {
    Site v;
    std::size_t edge = 0;
  };
  std::vector<Frame> call;

  for (Site root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    call.push_back({root});
    index[static_cast<std::size_t>(root)] =
        low[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& edges = adj[static_cast<std::size_t>(f.v)];
      if (f.edge < edges.size()) {
        Site w = edges[f.edge++];
        if (index[static_cast<std::size_t>(w)] == -1) {
          index[static_cast<std::size_t>(w)] =
              low[static_cast<std::size_t>(w)] = next_index++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = true;
          call.push_back({w});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] =
              std::min(low[static_cast<std::size_t>(f.v)],
                       index[static_cast<std::size_t>(w)]);
        }
      } else {
        Site v = f.v;
        call.pop_back();
        if (!call.empty())
          low[static_cast<std::size_t>(call.back().v)] =
              std::min(low[static_cast<std::size_t>(call.back().v)],
                       low[static_cast<std::size_t>(v)]);
        if (low[static_cast<std::size_t>(v)] ==
            index[static_cast<std::size_t>(v)]) {
          int cid = out.class_count();
          out.members.emplace_back();
          Site w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = false;
            out.class_of[static_cast<std::size_t>(w)] = cid;
            out.members.back().push_back(w);
          } while (w != v);
          std::sort(out.members.back().begin(), out.members.back().end());
        }
      }
    }
  }

  out.class_adj.resize(out.members.size());
  out.has_self_loop.assign(out.members.size(), false);
  std::set<std::pair<int, int>> seen;
  for (Site x = 0; x < n; ++x) {
    int cx = out.class_of[static_cast<std::size_t>(x)];
    for (Site y : adj[static_cast<std::size_t>(x)]) {
      if (y == x) out.has_self_loop[static_cast<std::size_t>(cx)] = true;
      int cy = out.class_of[static_cast<std::size_t>(y)];
      if (cx != cy && seen.insert({cx, cy}).second)
        out.class_adj[static_cast<std::size_t>(cx)].push_back(cy);
    }
  }
  return out;
}

inline ClassDecomposition irreducible_classes(const CompiledWindow& cw) {
  std::vector<std::vector<Site>> adj(static_cast<std::size_t>(cw.size()));
  for (Site x = 0; x < cw.size(); ++x)
    for (const Edge& e : cw.rows[static_cast<std::size_t>(x)])
      adj[static_cast<std::size_t>(x)].push_back(e.to);
  return strongly_connected_components(adj);
}

inline ClassDecomposition irreducible_classes(const WeightedKernel& k,
                                              Window w) {
  return irreducible_classes(CompiledWindow(k, w));
}

}  // namespace brwcrit
