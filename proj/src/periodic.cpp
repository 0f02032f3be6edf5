#include "mc2/periodic.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <tuple>

#include "mc2/transform.hpp"

namespace mc2 {

std::vector<std::pair<unsigned, unsigned>> enumerate_candidates(
    const CubeLasso &lasso, unsigned max_d, unsigned max_n) {
  std::vector<std::pair<unsigned, unsigned>> out;
  unsigned loop = lasso.omega + 1;
  for (unsigned n = 1; n <= std::min(max_n, loop); ++n) {
    if (loop % n) continue;
    for (unsigned d = 0; d <= std::min(max_d, lasso.delta); ++d) {
      if ((lasso.delta - d) % n) continue;
      out.push_back({d, n});
    }
  }
  return out;
}

std::vector<PeriodicSignal> extract_signals(const Circuit &c,
                                            const CubeLasso &lasso, unsigned d,
                                            unsigned n) {
  if (n == 0 || d > lasso.delta || (lasso.delta - d) % n ||
      (lasso.omega + 1) % n)
    throw Error("extract_signals: incompatible candidate");
  if (lasso.cubes.size() != size_t(lasso.delta) + lasso.omega + 1)
    throw Error("extract_signals: malformed lasso");
  unsigned L = c.num_latches();
  unsigned total = (lasso.delta - d + lasso.omega + 1) / n;
  std::vector<PeriodicSignal> sigs(L);
  for (auto &s : sigs) {
    s.d = d;
    s.phases.assign(n, phase_self());
  }
  for (unsigned i = 0; i < n; ++i) {
    // polarity of every latch across the cubes this phase hits
    std::vector<std::string> bits(L, std::string(total, '?'));
    for (unsigned k = 0; k < total; ++k)
      for (Lit l : lasso.cubes[d + i + k * n].lits)
        bits[c.latch_index(var_of(l))][k] = sign_of(l) ? '0' : '1';
    // constants first, then pool the rest up to complementation
    std::map<std::string, std::vector<std::pair<unsigned, bool>>> pool;
    for (unsigned j = 0; j < L; ++j) {
      const std::string &s = bits[j];
      if (s.find('?') != std::string::npos) continue;  // stays free
      if (s.find('1') == std::string::npos) {
        sigs[j].phases[i] = phase_const(false);
        continue;
      }
      if (s.find('0') == std::string::npos) {
        sigs[j].phases[i] = phase_const(true);
        continue;
      }
      std::string comp = s;
      for (char &ch : comp) ch ^= 1;  // '0' <-> '1'
      bool flip = comp < s;
      pool[flip ? comp : s].push_back({j, flip});
    }
    for (auto &[key, grp] : pool) {
      if (grp.size() < 2) continue;  // no partner: stays free
      auto [rep, rep_flip] = grp[0];  // lowest latch index
      for (size_t g = 1; g < grp.size(); ++g)
        sigs[grp[g].first].phases[i] =
            phase_ref(make_lit(rep, grp[g].second != rep_flip));
    }
  }
  return sigs;
}

long score_candidate(const Circuit &c, Candidate &cand) {
  try {
    Stages st = run_pipeline(c, cand.d, cand.n, cand.signals);
    cand.score = st.reduced.num_latches();
    cand.usable = true;
  } catch (const Error &) {
    cand.score = LONG_MAX;
    cand.usable = false;
  }
  return cand.score;
}

const Candidate &select_best(std::span<const Candidate> cands) {
  if (cands.empty()) throw Error("select_best: no candidates");
  size_t best = 0;
  for (size_t i = 1; i < cands.size(); ++i) {
    const Candidate &a = cands[i], &b = cands[best];
    if (!a.usable) continue;
    if (!b.usable && a.usable) {
      best = i;
      continue;
    }
    if (std::tuple(a.score, a.n, a.d) < std::tuple(b.score, b.n, b.d)) best = i;
  }
  return cands[best];
}

std::vector<Candidate> make_candidates(const Circuit &c,
                                       std::span<const CubeLasso> lassos,
                                       unsigned max_d, unsigned max_n) {
  std::vector<Candidate> out;
  for (unsigned li = 0; li < lassos.size(); ++li) {
    for (auto [d, n] : enumerate_candidates(lassos[li], max_d, max_n)) {
      Candidate cand;
      cand.lasso = li;
      cand.d = d;
      cand.n = n;
      cand.signals = extract_signals(c, lassos[li], d, n);
      bool dup = std::any_of(out.begin(), out.end(), [&](const Candidate &o) {
        return o.d == cand.d && o.n == cand.n && o.signals == cand.signals;
      });
      if (dup) continue;
      score_candidate(c, cand);
      out.push_back(std::move(cand));
    }
  }
  return out;
}

}  // namespace mc2
