#include "branchpde/branching.hpp"

#include <string>

#include "branchpde/rect.hpp"

namespace branchpde {

BudgetExceeded::BudgetExceeded(Kind k, std::uint64_t lim)
    : std::runtime_error(std::string("particle budget exceeded: more than ") + std::to_string(lim) +
                         (k == Kind::particles ? " particles" : " generations")),
      kind(k),
      limit(lim) {}

std::size_t sample_offspring(std::span<const NonlinearityTerm> terms, Stream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
    acc += terms[i].p;
    if (u < acc) return i;
  }
  return terms.size() - 1;
}

namespace {

struct Pending {
  std::size_t offset;  // start position in the arena
  int mark;
  std::uint64_t generation;
  Stream rng;
};

}  // namespace

PsiSample simulate_psi(std::span<const double> x, const ProblemSpec& spec, const Stream& rng) {
  const std::size_t d = spec.rect.dim();
  PsiSample out;
  out.root_pos.assign(x.begin(), x.end());

  // Start positions live in a LIFO arena that mirrors the stack.
  std::vector<double> arena(x.begin(), x.end());
  std::vector<Pending> stack;
  stack.push_back({0, 0, 0, rng});
  std::vector<double> start(d);
  Arrival arrival;
  bool root = true;

  while (!stack.empty()) {
    Pending p = stack.back();
    stack.pop_back();
    std::copy(arena.begin() + static_cast<std::ptrdiff_t>(p.offset),
              arena.begin() + static_cast<std::ptrdiff_t>(p.offset + d), start.begin());
    arena.resize(p.offset);

    if (++out.particles > spec.budget.max_particles)
      throw BudgetExceeded(BudgetExceeded::Kind::particles, spec.budget.max_particles);
    if (p.generation + 1 > out.generations) out.generations = p.generation + 1;
    if (out.generations > spec.budget.max_generations)
      throw BudgetExceeded(BudgetExceeded::Kind::generations, spec.budget.max_generations);

    sample_arrival(start, spec.rect, spec.beta, p.rng, spec.accuracy, arrival);
    if (root) {
      out.root_pos = arrival.pos;
      root = false;
    }

    if (p.mark > 0) {
      const double y = arrival.pos[0];
      out.psi *= spec.b[static_cast<std::size_t>(p.mark - 1)](start) *
                 gradient_weight_1d(spec.beta, spec.rect.sides[0], start[0], y);
    }

    if (arrival.exited) {
      out.psi *= spec.h(arrival.pos);
      continue;
    }

    const std::size_t k = sample_offspring(spec.terms, p.rng);
    const NonlinearityTerm& term = spec.terms[k];
    out.psi *= term.c(arrival.pos) / term.p;

    // Children in label order: the first l_0 carry mark 0, the next l_1 mark 1, ...
    // Pushed in reverse so that the first child is simulated first.
    std::uint64_t count = static_cast<std::uint64_t>(total(term.l));
    std::uint64_t child = count;
    for (std::size_t mark = term.l.size(); mark-- > 0;) {
      for (int c = 0; c < term.l[mark]; ++c) {
        --child;
        stack.push_back({arena.size(), static_cast<int>(mark), p.generation + 1, p.rng.child(child)});
        arena.insert(arena.end(), arrival.pos.begin(), arrival.pos.end());
      }
    }
  }
  return out;
}

}  // namespace branchpde
