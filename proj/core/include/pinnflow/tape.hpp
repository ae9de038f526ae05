#pragma once

#include <cstdint>
#include <vector>

namespace pinnflow {

/// Reverse-accumulation tape over scalar arithmetic. Leaves carry a slot id;
/// backward() accumulates d(root)/d(leaf) into the slot array. Used to
/// compose losses from network outputs (the leaves) and arithmetic.
class Tape {
 public:
  struct Var {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
  };

  Var constant(double v) { return push(Op::Const, -1, -1, v, v); }

  Var leaf(double value, int32_t slot) {
    Var r = push(Op::Leaf, -1, -1, 0.0, value);
    nodes_[r.id].slot = slot;
    if (slot >= num_slots_) num_slots_ = slot + 1;
    return r;
  }

  Var add(Var a, Var b) { return push(Op::Add, a.id, b.id, 0.0, val(a) + val(b)); }
  Var sub(Var a, Var b) { return push(Op::Sub, a.id, b.id, 0.0, val(a) - val(b)); }
  Var mul(Var a, Var b) { return push(Op::Mul, a.id, b.id, 0.0, val(a) * val(b)); }
  Var scale(Var a, double c) { return push(Op::Scale, a.id, -1, c, c * val(a)); }
  Var add_const(Var a, double c) { return push(Op::AddConst, a.id, -1, c, val(a) + c); }
  Var square(Var a) { return push(Op::Square, a.id, -1, 0.0, val(a) * val(a)); }
  Var neg(Var a) { return push(Op::Scale, a.id, -1, -1.0, -val(a)); }

  double value(Var v) const { return nodes_[v.id].val; }
  std::size_t size() const { return nodes_.size(); }
  int32_t num_slots() const { return num_slots_; }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Accumulates d(root)/d(leaf_slot) into slot_adjoints (resized and
  /// zeroed to num_slots()).
  void backward(Var root, std::vector<double>& slot_adjoints) const;

 private:
  enum class Op : uint8_t { Const, Leaf, Add, Sub, Mul, Scale, AddConst, Square };

  struct Node {
    Op op;
    int32_t a = -1, b = -1;
    int32_t slot = -1;
    double c = 0.0;   // scale factor / added constant
    double val = 0.0;
  };

  double val(Var v) const { return nodes_[v.id].val; }

  Var push(Op op, int32_t a, int32_t b, double c, double value) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.c = c;
    n.val = value;
    nodes_.push_back(n);
    return Var{static_cast<int32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
  int32_t num_slots_ = 0;
};

}  // namespace pinnflow
