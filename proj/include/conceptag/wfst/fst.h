#ifndef CONCEPTAG_WFST_FST_H_
#define CONCEPTAG_WFST_FST_H_

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace conceptag::wfst {

inline constexpr int kEpsilon = 0;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Bidirectional string <-> id map. Id 0 is always "<eps>".
class SymbolTable {
 public:
  SymbolTable();

  // Returns the id of `symbol`, adding it if absent.
  int Add(const std::string &symbol);
  // Returns -1 if absent.
  int Find(const std::string &symbol) const;
  const std::string &Symbol(int id) const { return symbols_.at(id); }
  size_t size() const { return symbols_.size(); }

  bool operator==(const SymbolTable &other) const {
    return symbols_ == other.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

// Tropical-semiring arc: weights are costs, combined with + along a path
// and min across paths.
struct Arc {
  int ilabel = kEpsilon;
  int olabel = kEpsilon;
  double weight = 0.0;
  int nextstate = 0;
};

class Fst {
 public:
  Fst() = default;
  Fst(std::shared_ptr<const SymbolTable> isyms,
      std::shared_ptr<const SymbolTable> osyms)
      : isyms_(std::move(isyms)), osyms_(std::move(osyms)) {}

  int AddState();
  void SetStart(int state) { start_ = state; }
  void SetFinal(int state, double weight) { finals_.at(state) = weight; }
  void AddArc(int state, const Arc &arc);

  int Start() const { return start_; }
  double Final(int state) const { return finals_.at(state); }
  bool IsFinal(int state) const { return finals_.at(state) < kInfinity; }
  size_t NumStates() const { return arcs_.size(); }
  size_t NumArcs() const;
  const std::vector<Arc> &Arcs(int state) const { return arcs_.at(state); }

  // Sorts every state's arcs by input label so composition can binary-search.
  void ArcSortInput();
  bool InputSorted() const { return input_sorted_; }

  const std::shared_ptr<const SymbolTable> &InputSymbols() const { return isyms_; }
  const std::shared_ptr<const SymbolTable> &OutputSymbols() const { return osyms_; }

  // Throws Error if an arc target or the start state is out of range, a
  // weight is not finite, or no final state is reachable from the start.
  void Validate() const;

  // One line "src dst ilabel olabel weight" per arc, then "state weight"
  // per final state.
  void WriteText(std::ostream &out) const;

 private:
  std::vector<std::vector<Arc>> arcs_;
  std::vector<double> finals_;
  int start_ = -1;
  bool input_sorted_ = true;
  std::shared_ptr<const SymbolTable> isyms_;
  std::shared_ptr<const SymbolTable> osyms_;
};

// Single-path acceptor over `labels` (ilabel == olabel, zero weights).
Fst LinearAcceptor(const std::vector<int> &labels,
                   std::shared_ptr<const SymbolTable> symbols);

// Composes `a` with `b`, matching a's output labels to b's input labels by
// symbol string when both machines carry symbol tables (by id otherwise).
// Epsilons on either side advance that machine alone. Only states reachable
// from the start are built.
Fst Compose(const Fst &a, const Fst &b);

struct Path {
  std::vector<int> ilabels;  // non-epsilon input labels
  std::vector<int> olabels;  // non-epsilon output labels
  double cost = kInfinity;
};

// Minimum-cost accepting path. Equal costs are resolved in favor of the
// lexicographically smaller output-label sequence; that rule is exact when
// every path reaching a state carries the same number of output labels, as
// in a tagging lattice. Returns nullopt if no final state is reachable.
std::optional<Path> ShortestPath(const Fst &fst);

}  // namespace conceptag::wfst

#endif  // CONCEPTAG_WFST_FST_H_
