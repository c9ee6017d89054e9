"""Reverse-mode automatic differentiation on dense float64 arrays.

Every operation appends a node to a ComputationRecord (a linear tape, so the
graph is topologically sorted by construction).  backward() replays the tape
in reverse and returns gradients for every leaf marked as a parameter.

The primitive set is small and closed: affine, matmul, tanh, elementwise
add/mul, sum/mean, L2 norms, plus the structural ops (unfold, reshape,
transpose, row/column slices) needed to vectorize sliding-window networks.
Anything else composes from these.  Arrays are at most 2-D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError

__all__ = [
    "Tensor",
    "ComputationRecord",
    "AdamState",
    "backward",
    "adam_step",
    "grad_check",
]


class Node:
    """One primitive-op record on the tape."""

    __slots__ = ("op", "inputs", "value", "is_param", "vjp", "needs_grad")

    def __init__(self, op, inputs, value, is_param=False, vjp=None,
                 needs_grad=False):
        self.op = op
        self.inputs = inputs      # node ids of the inputs (all earlier on the tape)
        self.value = value        # cached forward value, np.ndarray
        self.is_param = is_param
        self.vjp = vjp            # (grad_out, needs) -> per-input grads or None
        self.needs_grad = needs_grad  # some parameter leaf feeds this node


class ComputationRecord:
    """Append-only tape of primitive operations."""

    def __init__(self):
        self.nodes: list[Node] = []

    def _append(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def _leaf(self, data, is_param):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 2:
            raise ContractViolationError(f"tensors are at most 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractViolationError("non-finite entries rejected at construction")
        nid = self._append(Node("leaf", (), arr, is_param=is_param,
                                needs_grad=is_param))
        return Tensor(self, nid)

    def param(self, data) -> "Tensor":
        """Leaf whose gradient backward() will report."""
        return self._leaf(data, True)

    def constant(self, data) -> "Tensor":
        """Leaf treated as a constant (no gradient tracked)."""
        return self._leaf(data, False)

    def value(self, nid: int) -> np.ndarray:
        return self.nodes[nid].value


@dataclass
class Tensor:
    """Handle to a node on a ComputationRecord.

    Tensors are value types: `.data` is the cached forward array and copies
    are safe to hand across threads.  All arithmetic goes through the record.
    """

    record: ComputationRecord
    nid: int

    @property
    def data(self) -> np.ndarray:
        return self.record.nodes[self.nid].value

    @property
    def shape(self):
        return self.data.shape

    def _new(self, op, inputs, value, vjp):
        nodes = self.record.nodes
        needs = any(nodes[i].needs_grad for i in inputs)
        nid = self.record._append(Node(op, inputs, value, vjp=vjp,
                                       needs_grad=needs))
        return Tensor(self.record, nid)

    # -- elementwise arithmetic ------------------------------------------

    def add(self, other):
        if isinstance(other, Tensor):
            a, b = self.data, other.data
            if a.shape != b.shape:
                raise ContractViolationError(f"add shape mismatch {a.shape} vs {b.shape}")
            return self._new("add", (self.nid, other.nid), a + b,
                             lambda g, needs: (g, g))
        c = float(other)
        return self._new("adds", (self.nid,), self.data + c,
                         lambda g, needs: (g,))

    def sub(self, other):
        if isinstance(other, Tensor):
            return self.add(other.scale(-1.0))
        return self.add(-float(other))

    def mul(self, other):
        if isinstance(other, Tensor):
            a, b = self.data, other.data
            if a.shape != b.shape:
                raise ContractViolationError(f"mul shape mismatch {a.shape} vs {b.shape}")
            return self._new("mul", (self.nid, other.nid), a * b,
                             lambda g, needs, a=a, b=b: (
                                 g * b if needs[0] else None,
                                 g * a if needs[1] else None))
        return self.scale(float(other))

    def scale(self, c: float):
        c = float(c)
        return self._new("scale", (self.nid,), self.data * c,
                         lambda g, needs, c=c: (g * c,))

    def square(self):
        return self.mul(self)

    # -- linear algebra --------------------------------------------------

    def matmul(self, other: "Tensor"):
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ContractViolationError(f"matmul shape mismatch {a.shape} @ {b.shape}")
        return self._new("matmul", (self.nid, other.nid), a @ b,
                         lambda g, needs, a=a, b=b: (
                             g @ b.T if needs[0] else None,
                             a.T @ g if needs[1] else None))

    def affine(self, w: "Tensor", b: "Tensor"):
        """x @ w + b with the bias broadcast over rows."""
        x, W, bb = self.data, w.data, b.data
        if x.ndim != 2 or W.ndim != 2 or x.shape[1] != W.shape[0] or bb.shape != (W.shape[1],):
            raise ContractViolationError(
                f"affine shape mismatch x{x.shape} w{W.shape} b{bb.shape}")
        return self._new("affine", (self.nid, w.nid, b.nid), x @ W + bb,
                         lambda g, needs, x=x, W=W: (
                             g @ W.T if needs[0] else None,
                             x.T @ g if needs[1] else None,
                             g.sum(axis=0) if needs[2] else None))

    # -- nonlinearities and reductions ------------------------------------

    def tanh(self):
        y = np.tanh(self.data)

        def vjp(g, needs, y=y):
            t = y * y
            np.subtract(1.0, t, out=t)
            t *= g
            return (t,)

        return self._new("tanh", (self.nid,), y, vjp)

    def sum(self):
        shape = self.data.shape
        return self._new("sum", (self.nid,), np.asarray(self.data.sum()),
                         lambda g, needs, shape=shape: (
                             np.broadcast_to(g, shape).copy(),))

    def mean(self):
        n = self.data.size
        return self.sum().scale(1.0 / n)

    def l2norm(self):
        """Euclidean norm of all entries, as a scalar."""
        x = self.data
        r = float(np.sqrt((x * x).sum()))

        def vjp(g, needs, x=x, r=r):
            if r == 0.0:
                return (np.zeros_like(x),)
            return (g * (x / r),)

        return self._new("l2norm", (self.nid,), np.asarray(r), vjp)

    def l2norm_rows(self):
        """Per-row Euclidean norm of a 2-D array, shape (rows,)."""
        x = self.data
        if x.ndim != 2:
            raise ContractViolationError("l2norm_rows needs a 2-D input")
        r = np.sqrt((x * x).sum(axis=1))

        def vjp(g, needs, x=x, r=r):
            safe = np.where(r == 0.0, 1.0, r)
            return (x * (g / safe)[:, None],)

        return self._new("l2norm_rows", (self.nid,), r, vjp)

    # -- structural ops ----------------------------------------------------

    def unfold(self, m: int, newest_first: bool = True):
        """Sliding windows of length m over each row of a (B, L) array.

        Returns shape (B*(L-m+1), m); output row b*(L-m+1)+i is the window of
        row b ending at position m-1+i.  With newest_first the window is
        ordered latest sample first.
        """
        x = self.data
        if x.ndim != 2 or x.shape[1] < m:
            raise ContractViolationError(f"unfold needs (B, L>={m}), got {x.shape}")
        B, L = x.shape
        W = L - m + 1
        win = np.lib.stride_tricks.sliding_window_view(x, m, axis=1)  # (B, W, m)
        if newest_first:
            win = win[:, :, ::-1]
        out = win.reshape(B * W, m).copy()

        def vjp(g, needs, B=B, L=L, W=W, m=m, newest_first=newest_first):
            gw = g.reshape(B, W, m)
            if newest_first:
                gw = gw[:, :, ::-1]
            gx = np.zeros((B, L))
            for j in range(m):
                gx[:, j:j + W] += gw[:, :, j]
            return (gx,)

        return self._new("unfold", (self.nid,), out, vjp)

    def reshape(self, *shape):
        old = self.data.shape
        out = self.data.reshape(*shape)
        return self._new("reshape", (self.nid,), out,
                         lambda g, needs, old=old: (g.reshape(old),))

    def transpose(self):
        return self._new("transpose", (self.nid,), self.data.T.copy(),
                         lambda g, needs: (g.T.copy(),))

    def slice_rows(self, start: int, stop: int):
        x = self.data
        out = x[start:stop].copy()

        def vjp(g, needs, shape=x.shape, start=start, stop=stop):
            gx = np.zeros(shape)
            gx[start:stop] = g
            return (gx,)

        return self._new("slice_rows", (self.nid,), out, vjp)

    def slice_cols(self, start: int, stop: int):
        x = self.data
        if x.ndim != 2:
            raise ContractViolationError("slice_cols needs a 2-D input")
        out = x[:, start:stop].copy()

        def vjp(g, needs, shape=x.shape, start=start, stop=stop):
            gx = np.zeros(shape)
            gx[:, start:stop] = g
            return (gx,)

        return self._new("slice_cols", (self.nid,), out, vjp)


def backward(record: ComputationRecord, output: Tensor | int) -> dict[int, np.ndarray]:
    """Gradients of a scalar output with respect to every parameter leaf.

    Returns a map node id -> gradient array (same shape as the leaf).
    """
    out_id = output.nid if isinstance(output, Tensor) else int(output)
    nodes = record.nodes
    if nodes[out_id].value.size != 1:
        raise ContractViolationError("backward() requires a scalar output node")

    grads: list[np.ndarray | None] = [None] * len(nodes)
    grads[out_id] = np.ones_like(nodes[out_id].value)
    for nid in range(out_id, -1, -1):
        g = grads[nid]
        if g is None:
            continue
        node = nodes[nid]
        if node.op == "leaf":
            continue
        if node.vjp is None:
            raise NotImplementedError(f"no gradient rule for primitive '{node.op}'")
        needs = tuple(nodes[i].needs_grad for i in node.inputs)
        for in_id, gin in zip(node.inputs, node.vjp(g, needs)):
            if gin is None:
                continue
            if grads[in_id] is None:
                grads[in_id] = gin if isinstance(gin, np.ndarray) else np.asarray(gin)
            else:
                grads[in_id] = grads[in_id] + gin
        grads[nid] = None  # free memory as we go

    out = {}
    for nid, node in enumerate(nodes):
        if node.op == "leaf" and node.is_param:
            g = grads[nid]
            out[nid] = np.zeros_like(node.value) if g is None else np.asarray(g)
    return out


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Optimizer moments, one pair of arrays per parameter."""

    step: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(0, [np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One Adam update with bias correction; mutates params/state in place."""
    if lr <= 0:
        raise ContractViolationError("learning rate must be positive")
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ContractViolationError("params/grads/state length mismatch")
    state.step += 1
    t = state.step
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if p.shape != g.shape or p.shape != m.shape:
            raise ContractViolationError(
                f"shape mismatch in adam_step: {p.shape} vs {g.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


# ---------------------------------------------------------------------------
# Gradient checking
# ---------------------------------------------------------------------------

def grad_check(f, point, h: float = 1e-5, coords=None) -> float:
    """Max relative error between backward() and central finite differences.

    `f` maps a parameter Tensor to a scalar Tensor; the check is taken at
    `point`.  Relative error uses denominator max(1, |analytic|).  `coords`
    optionally restricts the check to a subset of flat coordinate indices.
    """
    point = np.asarray(point, dtype=np.float64)
    rec = ComputationRecord()
    x = rec.param(point)
    y = f(x)
    analytic = backward(rec, y)[x.nid]

    def feval(p):
        r = ComputationRecord()
        return float(f(r.param(p)).data)

    flat = point.ravel()
    idx = range(flat.size) if coords is None else coords
    worst = 0.0
    ga = analytic.ravel()
    for k in idx:
        p_plus = flat.copy()
        p_minus = flat.copy()
        p_plus[k] += h
        p_minus[k] -= h
        fd = (feval(p_plus.reshape(point.shape)) - feval(p_minus.reshape(point.shape))) / (2 * h)
        err = abs(fd - ga[k]) / max(1.0, abs(ga[k]))
        worst = max(worst, err)
    return worst
