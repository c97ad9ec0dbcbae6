"""Unit-capacity DAG networks and random linear broadcast codes.

A network is a DAG with a single source, unit-capacity edges (parallel
edges model larger capacities), and sink terminals. A broadcast code
assigns every edge a global coding vector over GF(2^m) by drawing local
mixing coefficients uniformly at random in topological order; the code is
accepted only if every terminal's received vectors span min(w, maxflow)
dimensions. Each terminal then keeps a maximal independent subset of its
received vectors, whose binary expansion is the bit-level transfer matrix
used by the syndrome layer.
"""

import collections
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bitmatrix import BitMatrix
from .errors import FieldTooSmallError, NetworkFormatError, ValidationError
from .gf import GfField, GfMatrix, binary_expand, bits_to_symbols, symbols_to_bits
from .sparsify import RngLike, _as_seed


@dataclass(frozen=True)
class NetworkSpec:
    """Single-source unit-capacity DAG with sink terminals."""

    nodes: tuple
    edges: tuple
    source: int
    terminals: tuple

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        object.__setattr__(self, "terminals", tuple(sorted(self.terminals)))
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValidationError("duplicate node ids")
        if not self.nodes:
            raise ValidationError("network needs at least one node")
        if self.source not in node_set:
            raise ValidationError(f"source {self.source} is not a declared node")
        if not self.terminals:
            raise ValidationError("network needs at least one terminal")
        term_set = set(self.terminals)
        if len(term_set) != len(self.terminals):
            raise ValidationError("duplicate terminal ids")
        if self.source in term_set:
            raise ValidationError("source cannot be a terminal")
        for t in self.terminals:
            if t not in node_set:
                raise ValidationError(f"terminal {t} is not a declared node")
        ins = collections.defaultdict(list)
        outs = collections.defaultdict(list)
        for i, (tail, head) in enumerate(self.edges):
            if tail not in node_set or head not in node_set:
                raise ValidationError(f"edge {(tail, head)} uses an undeclared node")
            if head == self.source:
                raise ValidationError("source must have no incoming edges")
            if tail in term_set:
                raise ValidationError("terminals must have no outgoing edges")
            if tail == head:
                raise ValidationError(f"self-loop at node {tail}")
            outs[tail].append(i)
            ins[head].append(i)
        order = self._topological_order(ins, outs)
        if order is None:
            raise ValidationError("network graph contains a cycle")
        object.__setattr__(self, "_ins", dict(ins))
        object.__setattr__(self, "_outs", dict(outs))
        object.__setattr__(self, "_topo", order)

    def _topological_order(self, ins, outs):
        indeg = {v: len(ins.get(v, ())) for v in self.nodes}
        ready = collections.deque(v for v in self.nodes if indeg[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for e in outs.get(v, ()):
                head = self.edges[e][1]
                indeg[head] -= 1
                if indeg[head] == 0:
                    ready.append(head)
        return tuple(order) if len(order) == len(self.nodes) else None

    @property
    def topo_order(self) -> tuple:
        return self._topo

    def in_edges(self, v) -> tuple:
        """Indices into `edges` of the edges entering v."""
        return tuple(self._ins.get(v, ()))

    def out_edges(self, v) -> tuple:
        return tuple(self._outs.get(v, ()))


def maxflow(net: NetworkSpec, t) -> int:
    """Max s-to-t flow with unit edge capacities (Edmonds-Karp)."""
    if t == net.source:
        raise ValidationError("maxflow target must differ from the source")
    if t not in set(net.nodes):
        raise ValidationError(f"unknown node {t}")
    # paired residual arcs: arc 2i is edge i, arc 2i+1 its reverse
    cap = np.empty(2 * len(net.edges), dtype=np.int64)
    cap[0::2] = 1
    cap[1::2] = 0
    adj = collections.defaultdict(list)
    for i, (tail, head) in enumerate(net.edges):
        adj[tail].append(2 * i)
        adj[head].append(2 * i + 1)
    flow = 0
    while True:
        parent_arc = {net.source: -1}
        queue = collections.deque([net.source])
        while queue and t not in parent_arc:
            v = queue.popleft()
            for a in adj[v]:
                if cap[a] <= 0:
                    continue
                head = net.edges[a >> 1][1] if a % 2 == 0 else net.edges[a >> 1][0]
                if head not in parent_arc:
                    parent_arc[head] = a
                    queue.append(head)
        if t not in parent_arc:
            return flow
        v = t
        while v != net.source:
            a = parent_arc[v]
            cap[a] -= 1
            cap[a ^ 1] += 1
            v = net.edges[a >> 1][0] if a % 2 == 0 else net.edges[a >> 1][1]
        flow += 1


def butterfly() -> NetworkSpec:
    """The classic two-terminal butterfly: maxflow 2 to each sink."""
    edges = ((0, 1), (0, 2), (1, 3), (2, 3), (3, 4),
             (1, 5), (2, 6), (4, 5), (4, 6))
    return NetworkSpec(nodes=tuple(range(7)), edges=edges, source=0,
                       terminals=(5, 6))


def random_dag(nodes: int, layers: int, edge_density: float, terminals: int,
               rng: RngLike, max_regens: int = 1000) -> NetworkSpec:
    """Layered random DAG: source alone in layer 0, terminals in the last.

    Every forward cross-layer pair becomes an edge with probability
    edge_density; the draw is repeated until each terminal is reachable
    from the source.
    """
    if layers < 2:
        raise ValidationError(f"need at least 2 layers, got {layers}")
    if terminals < 1:
        raise ValidationError(f"need at least 1 terminal, got {terminals}")
    if not 0.0 <= edge_density <= 1.0:
        raise ValidationError(f"edge_density must lie in [0, 1], got {edge_density}")
    middle = nodes - 1 - terminals
    if middle < layers - 2:
        raise ValidationError(
            f"{nodes} nodes cannot fill {layers} layers with {terminals} terminals")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    layer_of = np.empty(nodes, dtype=np.int64)
    layer_of[0] = 0
    layer_of[nodes - terminals:] = layers - 1
    if middle:
        chunks = np.array_split(np.arange(1, 1 + middle), max(layers - 2, 1))
        for li, chunk in enumerate(chunks, start=1):
            layer_of[chunk] = li
    pairs = [(u, v) for u in range(nodes - terminals)
             for v in range(1, nodes) if layer_of[u] < layer_of[v]]
    term_ids = tuple(range(nodes - terminals, nodes))
    for _ in range(max_regens):
        mask = gen.random(len(pairs)) < edge_density
        edges = tuple(p for p, keep in zip(pairs, mask) if keep)
        net = NetworkSpec(nodes=tuple(range(nodes)), edges=edges, source=0,
                          terminals=term_ids)
        if all(maxflow(net, t) >= 1 for t in term_ids):
            return net
    raise ValidationError(
        f"no graph with all terminals reachable in {max_regens} draws")


@dataclass
class BroadcastCode:
    """A verified linear broadcast code on a network.

    local_coeffs[e] holds edge e's mixing coefficients over the in-edges
    of its tail (over the w source dimensions for source edges).
    global_vectors stacks the per-edge global coding vectors as columns.
    received[t] is the w x |In(t)| matrix seen by terminal t, selected[t]
    the positions of the kept independent columns, and transfer[t] the
    binary expansion of that selection.
    """

    net: NetworkSpec
    field: GfField
    w: int
    local_coeffs: tuple
    global_vectors: GfMatrix
    received: dict
    selected: dict
    transfer: dict
    maxflows: dict

    @property
    def m(self) -> int:
        return self.field.m


def _propagate(net: NetworkSpec, field: GfField, w: int, local_coeffs) -> np.ndarray:
    """Per-edge global vectors from local coefficients, in topological order."""
    fvec = np.zeros((len(net.edges), w), dtype=np.int64)
    for v in net.topo_order:
        if v == net.source:
            for e in net.out_edges(v):
                fvec[e] = local_coeffs[e]
        else:
            in_idx = net.in_edges(v)
            if not in_idx:
                continue
            incoming = fvec[list(in_idx)]
            for e in net.out_edges(v):
                mixed = field.mul(local_coeffs[e][:, None], incoming)
                fvec[e] = np.bitwise_xor.reduce(mixed, axis=0)
    return fvec


def build_broadcast_code(net: NetworkSpec, w: int, m: int, rng: RngLike,
                         max_attempts: int = 32) -> BroadcastCode:
    """Draw random local coefficients until every terminal has full rank.

    Each attempt draws all local coefficients uniformly from the nonzero
    field elements (a zero mix on a bottleneck edge would discard an input
    outright) and verifies rank(received_t) = min(w, maxflow(s, t)) at
    every terminal; FieldTooSmall is raised when max_attempts attempts
    all fail.
    """
    if w < 1:
        raise ValidationError(f"source dimension must be >= 1, got {w}")
    if max_attempts < 1:
        raise ValidationError(f"max_attempts must be >= 1, got {max_attempts}")
    field = GfField(m)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(_as_seed(rng))
    flows = {t: maxflow(net, t) for t in net.terminals}
    targets = {t: min(w, flows[t]) for t in net.terminals}
    for _ in range(max_attempts):
        local_coeffs = []
        for e, (tail, _) in enumerate(net.edges):
            fanin = w if tail == net.source else len(net.in_edges(tail))
            local_coeffs.append(gen.integers(1, field.order, size=fanin, dtype=np.int64))
        fvec = _propagate(net, field, w, local_coeffs)
        received = {t: GfMatrix(field, fvec[list(net.in_edges(t))].T)
                    for t in net.terminals}
        if any(received[t].rank() != targets[t] for t in net.terminals):
            continue
        selected = {t: received[t].independent_columns() for t in net.terminals}
        transfer = {}
        for t in net.terminals:
            picked = received[t].select_columns(selected[t])
            transfer[t] = binary_expand(picked)
            assert transfer[t].rank() == m * targets[t]
        return BroadcastCode(net=net, field=field, w=w,
                             local_coeffs=tuple(local_coeffs),
                             global_vectors=GfMatrix(field, fvec.T),
                             received=received, selected=selected,
                             transfer=transfer, maxflows=flows)
    raise FieldTooSmallError(
        f"no valid code over GF(2^{m}) in {max_attempts} attempts; raise m")


def transfer_bits(code: BroadcastCode, t, source_bits) -> np.ndarray:
    """Bits terminal t receives: source_bits times its transfer matrix."""
    if t not in code.transfer:
        raise ValidationError(f"unknown terminal {t}")
    bits = np.asarray(source_bits, dtype=np.uint8).reshape(-1)
    expect = code.w * code.m
    if bits.size != expect:
        raise ValidationError(f"source has {bits.size} bits, expected {expect}")
    return code.transfer[t].vecmat(bits)


def propagate_symbols(code: BroadcastCode, source_symbols) -> np.ndarray:
    """Symbol carried on every edge, simulated hop by hop.

    Walks the graph applying only the stored local coefficients, so the
    result is an independent check on the global vectors.
    """
    s = np.asarray(source_symbols, dtype=np.int64).reshape(-1)
    if s.size != code.w:
        raise ValidationError(f"source has {s.size} symbols, expected {code.w}")
    code.field.check(s)
    net = code.net
    sym = np.zeros(len(net.edges), dtype=np.int64)
    for v in net.topo_order:
        if v == net.source:
            for e in net.out_edges(v):
                sym[e] = np.bitwise_xor.reduce(code.field.mul(code.local_coeffs[e], s))
        else:
            in_idx = list(net.in_edges(v))
            if not in_idx:
                continue
            seen = sym[in_idx]
            for e in net.out_edges(v):
                sym[e] = np.bitwise_xor.reduce(code.field.mul(code.local_coeffs[e], seen))
    return sym


def terminal_received(code: BroadcastCode, t, source_symbols) -> np.ndarray:
    """Symbols on the in-edges of terminal t for the given source symbols."""
    if t not in code.transfer:
        raise ValidationError(f"unknown terminal {t}")
    sym = propagate_symbols(code, source_symbols)
    return sym[list(code.net.in_edges(t))]


def received_bits_via_network(code: BroadcastCode, t, source_bits) -> np.ndarray:
    """Bit route through the symbol-level simulation (for cross-checks).

    Packs the source bits into field symbols, pushes them through the
    network, keeps terminal t's selected edges, and unpacks to bits.
    """
    bits = np.asarray(source_bits, dtype=np.uint8).reshape(-1)
    s = bits_to_symbols(bits, code.m)
    kept = terminal_received(code, t, s)[np.asarray(code.selected[t], dtype=np.int64)]
    return symbols_to_bits(kept, code.m)


def network_to_text(net: NetworkSpec) -> str:
    lines = [f"node {v}" for v in net.nodes]
    lines += [f"edge {a} {b}" for a, b in net.edges]
    lines.append(f"source {net.source}")
    lines += [f"terminal {t}" for t in net.terminals]
    return "\n".join(lines) + "\n"


def network_from_text(text: str) -> NetworkSpec:
    """Parse the line-oriented network format with line-numbered errors.

    Directives: "node N", "edge TAIL HEAD", "source N", "terminal N".
    Nodes must be declared before use; blank lines and "#" comments are
    skipped. Cycles are reported on the latest edge line involved.
    """
    nodes: list = []
    node_set = set()
    edges: list = []
    edge_lines: list = []
    source: Optional[int] = None
    terminals: list = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        word, args = parts[0], parts[1:]
        if word == "node":
            if len(args) != 1:
                raise NetworkFormatError(lineno, "node takes one id")
            v = _parse_node_id(lineno, args[0])
            if v in node_set:
                raise NetworkFormatError(lineno, f"node {v} declared twice")
            nodes.append(v)
            node_set.add(v)
        elif word == "edge":
            if len(args) != 2:
                raise NetworkFormatError(lineno, "edge takes tail and head")
            a = _parse_node_id(lineno, args[0])
            b = _parse_node_id(lineno, args[1])
            for v in (a, b):
                if v not in node_set:
                    raise NetworkFormatError(lineno, f"undeclared node {v}")
            if a == b:
                raise NetworkFormatError(lineno, f"self-loop at node {a}")
            edges.append((a, b))
            edge_lines.append(lineno)
        elif word == "source":
            if len(args) != 1:
                raise NetworkFormatError(lineno, "source takes one id")
            if source is not None:
                raise NetworkFormatError(lineno, "source declared twice")
            source = _parse_node_id(lineno, args[0])
            if source not in node_set:
                raise NetworkFormatError(lineno, f"undeclared node {source}")
        elif word == "terminal":
            if len(args) != 1:
                raise NetworkFormatError(lineno, "terminal takes one id")
            t = _parse_node_id(lineno, args[0])
            if t not in node_set:
                raise NetworkFormatError(lineno, f"undeclared node {t}")
            if t in terminals:
                raise NetworkFormatError(lineno, f"terminal {t} declared twice")
            terminals.append(t)
        else:
            raise NetworkFormatError(lineno, f"unknown directive {word!r}")
    tail_line = max(last_line, 1)
    if source is None:
        raise NetworkFormatError(tail_line, "missing source declaration")
    if not terminals:
        raise NetworkFormatError(tail_line, "missing terminal declarations")
    for (a, b), lineno in zip(edges, edge_lines):
        if b == source:
            raise NetworkFormatError(lineno, "edge into the source")
        if a in terminals:
            raise NetworkFormatError(lineno, "edge out of a terminal")
    cyclic = _cycle_edge_line(nodes, edges, edge_lines)
    if cyclic is not None:
        raise NetworkFormatError(cyclic, "edge creates a cycle")
    return NetworkSpec(nodes=tuple(nodes), edges=tuple(edges), source=source,
                       terminals=tuple(terminals))


def _parse_node_id(lineno: int, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise NetworkFormatError(lineno, f"node id must be an integer, got {token!r}")


def _cycle_edge_line(nodes, edges, edge_lines) -> Optional[int]:
    # Kahn peel; any edge left among unpeeled nodes sits on a cycle
    indeg = {v: 0 for v in nodes}
    for _, b in edges:
        indeg[b] += 1
    ready = collections.deque(v for v in nodes if indeg[v] == 0)
    seen = 0
    while ready:
        v = ready.popleft()
        seen += 1
        for (a, b), _ in zip(edges, edge_lines):
            if a == v:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
    if seen == len(nodes):
        return None
    # strip nodes that are merely downstream of a cycle, then the latest
    # surviving edge is one that closed a cycle
    core = {v for v in nodes if indeg[v] > 0}
    while True:
        tails = {a for a, b in edges if a in core and b in core}
        shrunk = core & tails
        if shrunk == core:
            break
        core = shrunk
    return max(line for (a, b), line in zip(edges, edge_lines)
               if a in core and b in core)


def save_network(net: NetworkSpec, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(network_to_text(net))


def load_network(path) -> NetworkSpec:
    with open(path, "r", encoding="ascii") as fh:
        return network_from_text(fh.read())
