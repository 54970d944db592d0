#include "conceptag/wfst/wfst_tagger.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "conceptag/errors.h"
#include "conceptag/serialize.h"

namespace conceptag::wfst {

Fst BuildEmissionFst(const PairCounts &pair_counts,
                     const std::vector<std::string> &concept_inventory) {
  if (pair_counts.empty()) throw ParameterError("emission counts are empty");
  if (concept_inventory.empty()) throw ParameterError("concept inventory is empty");
  auto isyms = std::make_shared<SymbolTable>();
  auto osyms = std::make_shared<SymbolTable>();
  const int unknown = isyms->Add(kUnknownWord);
  for (const auto &c : concept_inventory) osyms->Add(c);

  std::map<std::string, double> concept_totals;
  std::set<std::string> words;
  for (const auto &[pair, count] : pair_counts) {
    if (count <= 0) throw ParameterError("emission counts must be positive");
    if (osyms->Find(pair.second) < 0) {
      throw ParameterError("concept '" + pair.second + "' missing from inventory");
    }
    concept_totals[pair.second] += static_cast<double>(count);
    words.insert(pair.first);
  }
  for (const auto &w : words) isyms->Add(w);

  Fst fst(isyms, osyms);
  const int state = fst.AddState();
  fst.SetStart(state);
  fst.SetFinal(state, 0.0);
  for (const auto &[pair, count] : pair_counts) {
    const double p = static_cast<double>(count) / concept_totals.at(pair.second);
    fst.AddArc(state, {isyms->Find(pair.first), osyms->Find(pair.second), -std::log(p), state});
  }
  const double unknown_cost = -std::log(1.0 / static_cast<double>(concept_inventory.size()));
  for (const auto &c : concept_inventory) {
    fst.AddArc(state, {unknown, osyms->Find(c), unknown_cost, state});
  }
  fst.ArcSortInput();
  return fst;
}

WfstTagger::WfstTagger(Fst emission, NgramLm lm)
    : emission_(std::move(emission)), lm_(std::move(lm)) {
  lm_acceptor_ = lm_.ToAcceptor(emission_.OutputSymbols());
  if (!emission_.InputSorted()) emission_.ArcSortInput();
}

WfstTagger WfstTagger::Train(const std::vector<Sentence> &train,
                             const WfstOptions &options) {
  if (train.empty()) throw ParameterError("training split is empty");
  PairCounts counts;
  std::set<std::string> inventory;
  std::vector<std::vector<std::string>> tag_sequences;
  tag_sequences.reserve(train.size());
  for (const Sentence &s : train) {
    for (size_t i = 0; i < s.size(); ++i) {
      ++counts[{LookupKey(s.tokens[i].surface), s.tags[i]}];
      inventory.insert(s.tags[i]);
    }
    tag_sequences.push_back(s.tags);
  }
  Fst emission = BuildEmissionFst(
      counts, std::vector<std::string>(inventory.begin(), inventory.end()));
  return WfstTagger(std::move(emission),
                    NgramLm::Train(tag_sequences, options.order, options.discount));
}

std::vector<std::string> WfstTagger::Decode(const Sentence &sentence) const {
  std::vector<std::string> keys;
  keys.reserve(sentence.size());
  for (const Token &t : sentence.tokens) keys.push_back(LookupKey(t.surface));
  return DecodeKeys(keys).tags;
}

WfstDecodeResult WfstTagger::DecodeKeys(const std::vector<std::string> &keys) const {
  if (keys.empty()) throw ParameterError("cannot decode an empty sentence");
  const SymbolTable &isyms = *emission_.InputSymbols();
  const int unknown = isyms.Find(kUnknownWord);
  std::vector<int> ids;
  ids.reserve(keys.size());
  for (const auto &k : keys) {
    int id = isyms.Find(k);
    ids.push_back(id > kEpsilon ? id : unknown);
  }
  Fst lattice = Compose(LinearAcceptor(ids, emission_.InputSymbols()), emission_);
  Fst composed = Compose(lattice, lm_acceptor_);
  std::optional<Path> path = ShortestPath(composed);
  if (!path || path->olabels.size() != keys.size()) {
    throw Error("wfst decode: no accepting path of the sentence length");
  }
  WfstDecodeResult result;
  result.cost = path->cost;
  const SymbolTable &osyms = *emission_.OutputSymbols();
  for (int label : path->olabels) result.tags.push_back(osyms.Symbol(label));
  return result;
}

void WfstTagger::Save(std::ostream &out) const {
  const SymbolTable &isyms = *emission_.InputSymbols();
  const SymbolTable &osyms = *emission_.OutputSymbols();
  out << "conceptag-wfst 1\n";
  out << "input " << isyms.size() - 1;
  for (size_t i = 1; i < isyms.size(); ++i) out << ' ' << isyms.Symbol(static_cast<int>(i));
  out << "\noutput " << osyms.size() - 1;
  for (size_t i = 1; i < osyms.size(); ++i) out << ' ' << osyms.Symbol(static_cast<int>(i));
  const auto &arcs = emission_.Arcs(emission_.Start());
  out << "\narcs " << arcs.size() << "\n";
  for (const Arc &arc : arcs) {
    out << arc.ilabel << ' ' << arc.olabel << ' ' << serialize::Hex(arc.weight) << "\n";
  }
  lm_.Save(out);
}

WfstTagger WfstTagger::Load(std::istream &in) {
  using namespace serialize;
  Expect(in, "conceptag-wfst");
  Expect(in, "1");
  auto isyms = std::make_shared<SymbolTable>();
  auto osyms = std::make_shared<SymbolTable>();
  Expect(in, "input");
  for (long long n = NextInt(in, "input size"); n > 0; --n) isyms->Add(Next(in, "input symbol"));
  Expect(in, "output");
  for (long long n = NextInt(in, "output size"); n > 0; --n) osyms->Add(Next(in, "output symbol"));
  Fst emission(isyms, osyms);
  const int state = emission.AddState();
  emission.SetStart(state);
  emission.SetFinal(state, 0.0);
  Expect(in, "arcs");
  for (long long n = NextInt(in, "arc count"); n > 0; --n) {
    Arc arc;
    arc.ilabel = static_cast<int>(NextInt(in, "ilabel"));
    arc.olabel = static_cast<int>(NextInt(in, "olabel"));
    arc.weight = NextDouble(in, "weight");
    arc.nextstate = state;
    if (arc.ilabel <= 0 || arc.ilabel >= static_cast<int>(isyms->size()) ||
        arc.olabel <= 0 || arc.olabel >= static_cast<int>(osyms->size())) {
      throw FormatError("emission arc label out of range");
    }
    emission.AddArc(state, arc);
  }
  return WfstTagger(std::move(emission), NgramLm::Load(in));
}

}  // namespace conceptag::wfst
