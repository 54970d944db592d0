#include "conceptag/wfst/fst.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "conceptag/errors.h"

namespace conceptag::wfst {

SymbolTable::SymbolTable() { Add("<eps>"); }

int SymbolTable::Add(const std::string &symbol) {
  auto [it, inserted] = ids_.emplace(symbol, static_cast<int>(symbols_.size()));
  if (inserted) symbols_.push_back(symbol);
  return it->second;
}

int SymbolTable::Find(const std::string &symbol) const {
  auto it = ids_.find(symbol);
  return it == ids_.end() ? -1 : it->second;
}

int Fst::AddState() {
  arcs_.emplace_back();
  finals_.push_back(kInfinity);
  return static_cast<int>(arcs_.size()) - 1;
}

void Fst::AddArc(int state, const Arc &arc) {
  auto &list = arcs_.at(state);
  if (!list.empty() && list.back().ilabel > arc.ilabel) input_sorted_ = false;
  list.push_back(arc);
}

size_t Fst::NumArcs() const {
  size_t n = 0;
  for (const auto &list : arcs_) n += list.size();
  return n;
}

void Fst::ArcSortInput() {
  for (auto &list : arcs_) {
    std::stable_sort(list.begin(), list.end(), [](const Arc &x, const Arc &y) {
      return x.ilabel < y.ilabel;
    });
  }
  input_sorted_ = true;
}

void Fst::Validate() const {
  const int n = static_cast<int>(NumStates());
  if (start_ < 0 || start_ >= n) throw Error("fst: start state out of range");
  for (int s = 0; s < n; ++s) {
    if (std::isnan(finals_[s]) || finals_[s] == -kInfinity) {
      throw Error("fst: invalid final weight at state " + std::to_string(s));
    }
    for (const Arc &arc : arcs_[s]) {
      if (arc.nextstate < 0 || arc.nextstate >= n) {
        throw Error("fst: arc target out of range at state " + std::to_string(s));
      }
      if (!std::isfinite(arc.weight)) {
        throw Error("fst: non-finite arc weight at state " + std::to_string(s));
      }
    }
  }
  std::vector<bool> seen(n, false);
  std::vector<int> stack = {start_};
  seen[start_] = true;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (IsFinal(s)) return;
    for (const Arc &arc : arcs_[s]) {
      if (!seen[arc.nextstate]) {
        seen[arc.nextstate] = true;
        stack.push_back(arc.nextstate);
      }
    }
  }
  throw Error("fst: no final state reachable from the start state");
}

void Fst::WriteText(std::ostream &out) const {
  char line[160];
  for (size_t s = 0; s < arcs_.size(); ++s) {
    for (const Arc &arc : arcs_[s]) {
      std::snprintf(line, sizeof(line), "%zu %d %d %d %.6f\n", s, arc.nextstate,
                    arc.ilabel, arc.olabel, arc.weight);
      out << line;
    }
  }
  for (size_t s = 0; s < finals_.size(); ++s) {
    if (finals_[s] < kInfinity) {
      std::snprintf(line, sizeof(line), "%zu %.6f\n", s, finals_[s]);
      out << line;
    }
  }
}

Fst LinearAcceptor(const std::vector<int> &labels,
                   std::shared_ptr<const SymbolTable> symbols) {
  Fst fst(symbols, symbols);
  int state = fst.AddState();
  fst.SetStart(state);
  for (int label : labels) {
    int next = fst.AddState();
    fst.AddArc(state, {label, label, 0.0, next});
    state = next;
  }
  fst.SetFinal(state, 0.0);
  return fst;
}

namespace {

// Maps a's output label ids onto b's input label ids (-1 when unmatched).
std::vector<int> MiddleLabelMap(const Fst &a, const Fst &b) {
  const auto &out = a.OutputSymbols();
  const auto &in = b.InputSymbols();
  if (!out || !in || out == in || *out == *in) return {};
  std::vector<int> map(out->size(), -1);
  for (size_t id = 0; id < out->size(); ++id) {
    map[id] = in->Find(out->Symbol(static_cast<int>(id)));
  }
  return map;
}

}  // namespace

Fst Compose(const Fst &a, const Fst &b) {
  if (a.Start() < 0 || b.Start() < 0) throw Error("compose: missing start state");
  const Fst *right = &b;
  Fst sorted_copy;
  if (!b.InputSorted()) {
    sorted_copy = b;
    sorted_copy.ArcSortInput();
    right = &sorted_copy;
  }
  const std::vector<int> label_map = MiddleLabelMap(a, b);
  auto map_label = [&](int label) {
    return label_map.empty() ? label : label_map.at(label);
  };

  Fst result(a.InputSymbols(), b.OutputSymbols());
  std::unordered_map<uint64_t, int> ids;
  std::deque<std::pair<int, int>> queue;
  auto state_for = [&](int sa, int sb) {
    uint64_t key = (static_cast<uint64_t>(sa) << 32) | static_cast<uint32_t>(sb);
    auto [it, inserted] = ids.emplace(key, 0);
    if (inserted) {
      it->second = result.AddState();
      queue.emplace_back(sa, sb);
    }
    return it->second;
  };

  result.SetStart(state_for(a.Start(), right->Start()));
  while (!queue.empty()) {
    auto [sa, sb] = queue.front();
    queue.pop_front();
    const int s = ids.at((static_cast<uint64_t>(sa) << 32) | static_cast<uint32_t>(sb));
    if (a.IsFinal(sa) && right->IsFinal(sb)) {
      result.SetFinal(s, a.Final(sa) + right->Final(sb));
    }
    const std::vector<Arc> &b_arcs = right->Arcs(sb);
    for (const Arc &ea : a.Arcs(sa)) {
      if (ea.olabel == kEpsilon) {
        int next = state_for(ea.nextstate, sb);
        result.AddArc(s, {ea.ilabel, kEpsilon, ea.weight, next});
        continue;
      }
      const int label = map_label(ea.olabel);
      if (label <= kEpsilon) continue;
      auto range = std::equal_range(
          b_arcs.begin(), b_arcs.end(), Arc{label, 0, 0.0, 0},
          [](const Arc &x, const Arc &y) { return x.ilabel < y.ilabel; });
      for (auto it = range.first; it != range.second; ++it) {
        int next = state_for(ea.nextstate, it->nextstate);
        result.AddArc(s, {ea.ilabel, it->olabel, ea.weight + it->weight, next});
      }
    }
    for (const Arc &eb : b_arcs) {
      if (eb.ilabel != kEpsilon) break;  // sorted: epsilons come first
      int next = state_for(sa, eb.nextstate);
      result.AddArc(s, {kEpsilon, eb.olabel, eb.weight, next});
    }
  }
  return result;
}

namespace {

struct BackPointer {
  int state = -1;
  int arc = -1;
};

class PathSearch {
 public:
  explicit PathSearch(const Fst &fst)
      : fst_(fst),
        dist_(fst.NumStates(), kInfinity),
        back_(fst.NumStates()) {}

  std::optional<Path> Run() {
    const int start = fst_.Start();
    if (start < 0) return std::nullopt;
    dist_[start] = 0.0;
    std::vector<int> order;
    if (TopologicalOrder(&order)) {
      for (int s : order) {
        if (dist_[s] == kInfinity) continue;
        for (size_t i = 0; i < fst_.Arcs(s).size(); ++i) Relax(s, static_cast<int>(i));
      }
    } else {
      BellmanFord();
    }
    int best = -1;
    double best_cost = kInfinity;
    for (int s = 0; s < static_cast<int>(fst_.NumStates()); ++s) {
      if (!fst_.IsFinal(s) || dist_[s] == kInfinity) continue;
      double cost = dist_[s] + fst_.Final(s);
      if (cost < best_cost ||
          (cost == best_cost && OutputLabels(s) < OutputLabels(best))) {
        best = s;
        best_cost = cost;
      }
    }
    if (best < 0) return std::nullopt;
    Path path;
    path.cost = best_cost;
    std::vector<const Arc *> arcs;
    for (int s = best; back_[s].state >= 0; s = back_[s].state) {
      arcs.push_back(&fst_.Arcs(back_[s].state)[back_[s].arc]);
      CheckWalk(arcs.size());
    }
    std::reverse(arcs.begin(), arcs.end());
    for (const Arc *arc : arcs) {
      if (arc->ilabel != kEpsilon) path.ilabels.push_back(arc->ilabel);
      if (arc->olabel != kEpsilon) path.olabels.push_back(arc->olabel);
    }
    return path;
  }

 private:
  // Kahn's algorithm over states reachable from the start. Returns false if
  // the reachable part contains a cycle.
  bool TopologicalOrder(std::vector<int> *order) {
    const int n = static_cast<int>(fst_.NumStates());
    std::vector<bool> reachable(n, false);
    std::vector<int> stack = {fst_.Start()};
    reachable[fst_.Start()] = true;
    size_t count = 0;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      ++count;
      for (const Arc &arc : fst_.Arcs(s)) {
        if (!reachable[arc.nextstate]) {
          reachable[arc.nextstate] = true;
          stack.push_back(arc.nextstate);
        }
      }
    }
    std::vector<int> indegree(n, 0);
    for (int s = 0; s < n; ++s) {
      if (!reachable[s]) continue;
      for (const Arc &arc : fst_.Arcs(s)) ++indegree[arc.nextstate];
    }
    std::deque<int> ready = {fst_.Start()};
    if (indegree[fst_.Start()] != 0) return false;
    while (!ready.empty()) {
      int s = ready.front();
      ready.pop_front();
      order->push_back(s);
      for (const Arc &arc : fst_.Arcs(s)) {
        if (--indegree[arc.nextstate] == 0) ready.push_back(arc.nextstate);
      }
    }
    return order->size() == count;
  }

  void BellmanFord() {
    const size_t n = fst_.NumStates();
    std::deque<int> queue = {fst_.Start()};
    std::vector<bool> queued(n, false);
    queued[fst_.Start()] = true;
    size_t relaxations = 0;
    const size_t limit = (n + 1) * (fst_.NumArcs() + 1);
    while (!queue.empty()) {
      int s = queue.front();
      queue.pop_front();
      queued[s] = false;
      for (size_t i = 0; i < fst_.Arcs(s).size(); ++i) {
        int next = fst_.Arcs(s)[i].nextstate;
        if (Relax(s, static_cast<int>(i)) && !queued[next]) {
          queued[next] = true;
          queue.push_back(next);
        }
        if (++relaxations > limit) {
          throw NumericError("shortest path: negative-cost cycle");
        }
      }
    }
  }

  bool Relax(int s, int arc_index) {
    const Arc &arc = fst_.Arcs(s)[arc_index];
    const double cost = dist_[s] + arc.weight;
    const int t = arc.nextstate;
    bool better = cost < dist_[t];
    if (!better && cost == dist_[t] && t != fst_.Start()) {
      std::vector<int> candidate = OutputLabels(s);
      if (arc.olabel != kEpsilon) candidate.push_back(arc.olabel);
      better = candidate < OutputLabels(t);
    }
    if (!better) return false;
    dist_[t] = cost;
    back_[t] = {s, arc_index};
    return true;
  }

  // Non-epsilon output labels along the current best path into `state`.
  std::vector<int> OutputLabels(int state) const {
    std::vector<int> labels;
    size_t steps = 0;
    for (int s = state; back_[s].state >= 0; s = back_[s].state) {
      int label = fst_.Arcs(back_[s].state)[back_[s].arc].olabel;
      if (label != kEpsilon) labels.push_back(label);
      CheckWalk(++steps);
    }
    std::reverse(labels.begin(), labels.end());
    return labels;
  }

  void CheckWalk(size_t steps) const {
    if (steps > fst_.NumStates()) throw NumericError("shortest path: cyclic back pointers");
  }

  const Fst &fst_;
  std::vector<double> dist_;
  std::vector<BackPointer> back_;
};

}  // namespace

std::optional<Path> ShortestPath(const Fst &fst) { return PathSearch(fst).Run(); }

}  // namespace conceptag::wfst
