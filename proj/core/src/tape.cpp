#include "pinnflow/tape.hpp"

namespace pinnflow {

void Tape::backward(Var root, std::vector<double>& slot_adjoints) const {
  slot_adjoints.assign(static_cast<std::size_t>(num_slots_), 0.0);
  if (!root.valid()) return;
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[root.id] = 1.0;
  for (int32_t i = root.id; i >= 0; --i) {
    const double g = adj[i];
    if (g == 0.0) continue;
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const:
        break;
      case Op::Leaf:
        slot_adjoints[n.slot] += g;
        break;
      case Op::Add:
        adj[n.a] += g;
        adj[n.b] += g;
        break;
      case Op::Sub:
        adj[n.a] += g;
        adj[n.b] -= g;
        break;
      case Op::Mul:
        adj[n.a] += g * nodes_[n.b].val;
        adj[n.b] += g * nodes_[n.a].val;
        break;
      case Op::Scale:
        adj[n.a] += g * n.c;
        break;
      case Op::AddConst:
        adj[n.a] += g;
        break;
      case Op::Square:
        adj[n.a] += 2.0 * g * nodes_[n.a].val;
        break;
    }
  }
}

}  // namespace pinnflow
