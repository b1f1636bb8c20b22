"""AND-OR-NOT Bayesian networks: representation, validation, conversion
from boolean CPT networks, root-prior normalization and JSON I/O."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

from .errors import CptError, NetworkError, NotARootError, UnknownNodeError, ValidationError

# Ids of nodes created by the library start with this prefix.
GENERATED_PREFIX = "@"

Label = Union[str, int]


class NodeKind(str, enum.Enum):
    ROOT = "root"
    AND = "and"
    OR = "or"
    NOT = "not"


def _check_label(label) -> Label:
    if label == 1 and not isinstance(label, str):
        return 1
    if isinstance(label, str) and label:
        return label
    raise NetworkError(f"labels are a symbol or the number 1, got {label!r}")


@dataclass(frozen=True)
class Link:
    source: str
    label: Label = 1
    inhibitory: bool = False

    def __post_init__(self):
        object.__setattr__(self, "label", _check_label(self.label))


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: NodeKind
    links: tuple[Link, ...] = ()
    joint_label: Label = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "joint_label", _check_label(self.joint_label))

    @property
    def parents(self) -> tuple[str, ...]:
        return tuple(l.source for l in self.links)

    def labels(self) -> list[str]:
        out = [l.label for l in self.links if l.label != 1]
        if self.joint_label != 1:
            out.append(self.joint_label)
        return out


def root(id: str) -> NodeSpec:
    return NodeSpec(id, NodeKind.ROOT)


def or_node(id: str, *links: Link | tuple) -> NodeSpec:
    return NodeSpec(id, NodeKind.OR, tuple(_as_link(l) for l in links))


def and_node(id: str, parents: Iterable[str | Link], label: Label = 1) -> NodeSpec:
    return NodeSpec(id, NodeKind.AND, tuple(_as_link(p) for p in parents), label)


def not_node(id: str, parent: str, label: Label = 1) -> NodeSpec:
    return NodeSpec(id, NodeKind.NOT, (Link(parent, label, inhibitory=True),))


def _as_link(x) -> Link:
    if isinstance(x, Link):
        return x
    if isinstance(x, str):
        return Link(x)
    return Link(*x)


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str | None
    message: str

    def __str__(self):
        where = f"{self.node}: " if self.node is not None else ""
        return f"{where}{self.message}"


class Network:
    """Immutable DAG of root/AND/OR/NOT nodes.

    Construction does not validate; call :func:`validate` (or
    :meth:`checked`) before relying on the invariants.
    """

    def __init__(self, nodes: Iterable[NodeSpec]):
        self._order = tuple(nodes)
        by_id: dict[str, NodeSpec] = {}
        for n in self._order:
            by_id.setdefault(n.id, n)
        self._by_id = MappingProxyType(by_id)
        self._topo: tuple[str, ...] | None = None

    @property
    def nodes(self) -> Mapping[str, NodeSpec]:
        return self._by_id

    def node_list(self) -> tuple[NodeSpec, ...]:
        return self._order

    def __getitem__(self, node_id: str) -> NodeSpec:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def __contains__(self, node_id) -> bool:
        return node_id in self._by_id

    def __len__(self):
        return len(self._by_id)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._order == other._order

    def __hash__(self):
        return hash(self._order)

    def __repr__(self):
        return f"Network({len(self)} nodes)"

    @property
    def atoms(self) -> frozenset:
        return frozenset(a for n in self._order for a in n.labels())

    def children_map(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n: [] for n in self._by_id}
        for n in self._order:
            for l in n.links:
                if l.source in out:
                    out[l.source].append(n.id)
        return out

    def topological_order(self) -> tuple[str, ...]:
        if self._topo is None:
            order = _topo_sort(self)
            if order is None:
                raise ValidationError([Violation("cycle", None, "network has a directed cycle")])
            self._topo = order
        return self._topo

    def ancestors(self, ids: Iterable[str]) -> set[str]:
        """``ids`` together with all their ancestors."""
        out: set[str] = set()
        stack = list(ids)
        while stack:
            n = stack.pop()
            if n in out:
                continue
            out.add(n)
            stack.extend(self[n].parents)
        return out

    def descendants(self, node_id: str) -> set[str]:
        kids = self.children_map()
        out: set[str] = set()
        stack = list(kids[node_id])
        while stack:
            n = stack.pop()
            if n not in out:
                out.add(n)
                stack.extend(kids[n])
        return out

    def checked(self) -> Network:
        problems = validate(self)
        if problems:
            raise ValidationError(problems)
        return self

    def replace_nodes(self, nodes: Iterable[NodeSpec]) -> Network:
        return Network(nodes)


def _topo_sort(net: Network) -> tuple[str, ...] | None:
    indeg = {n.id: 0 for n in net.node_list()}
    kids: dict[str, list[str]] = {n: [] for n in indeg}
    for n in net.node_list():
        for l in n.links:
            if l.source in kids:
                kids[l.source].append(n.id)
                indeg[n.id] += 1
    ready = [n.id for n in net.node_list() if indeg[n.id] == 0]
    ready.reverse()
    out = []
    while ready:
        n = ready.pop()
        out.append(n)
        for c in reversed(kids[n]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return tuple(out) if len(out) == len(indeg) else None


def validate(net: Network) -> list[Violation]:
    """All structural problems of ``net``; an empty list means valid."""
    out: list[Violation] = []
    seen_ids: set[str] = set()
    for n in net.node_list():
        if n.id in seen_ids:
            out.append(Violation("duplicate-id", n.id, "node id used more than once"))
        seen_ids.add(n.id)
    label_owner: dict[str, str] = {}
    for n in net.node_list():
        k = n.kind
        links = n.links
        if k is NodeKind.ROOT:
            if links:
                out.append(Violation("arity", n.id, "a root has no incoming links"))
            if n.joint_label != 1:
                out.append(Violation("label", n.id, "a root has no label; model priors with normalize_roots"))
        elif k is NodeKind.AND:
            if len(links) < 2:
                out.append(Violation("arity", n.id, f"an AND node needs at least 2 parents, has {len(links)}"))
        elif k is NodeKind.OR:
            if len(links) < 1:
                out.append(Violation("arity", n.id, "an OR node needs at least 1 parent"))
            if n.joint_label != 1:
                out.append(Violation("label", n.id, "an OR node has per-link labels, not a joint label"))
        elif k is NodeKind.NOT:
            if len(links) != 1:
                out.append(Violation("arity", n.id, f"a NOT node needs exactly 1 parent, has {len(links)}"))
            elif not links[0].inhibitory:
                out.append(Violation("arity", n.id, "a NOT node's link must be inhibitory"))
        for l in links:
            if l.source not in net.nodes:
                out.append(Violation("dangling", n.id, f"link from unknown node {l.source!r}"))
        for lab in n.labels():
            if lab in label_owner:
                out.append(Violation("duplicate-label", n.id, f"label {lab!r} already used at node {label_owner[lab]!r}"))
            else:
                label_owner[lab] = n.id
    if _topo_sort(net) is None:
        out.append(Violation("cycle", None, "network has a directed cycle"))
    return out


# --- transformations -------------------------------------------------------------

def prime_id(node_id: str) -> str:
    return f"{GENERATED_PREFIX}{node_id}'"


def normalize_roots(net: Network, priors: Mapping[str, Label]) -> Network:
    """Give roots nonunit priors: each root R with prior symbol r becomes an
    OR node fed by a fresh unit root R' through a link labelled r.

    Idempotent: a node already in that shape with the same prior is left
    alone.
    """
    nodes = list(net.node_list())
    index = {n.id: i for i, n in enumerate(nodes)}
    for node_id, prior in priors.items():
        if node_id not in index:
            raise UnknownNodeError(node_id)
        prior = _check_label(prior)
        n = nodes[index[node_id]]
        if n.kind is not NodeKind.ROOT:
            if (
                n.kind is NodeKind.OR
                and len(n.links) == 1
                and n.links[0] == Link(prime_id(node_id), prior)
                and prime_id(node_id) in index
            ):
                continue
            raise NotARootError(f"{node_id!r} is not a root")
        if prior == 1:
            continue
        new_root = prime_id(node_id)
        if new_root in index:
            raise NetworkError(f"generated id {new_root!r} collides with an existing node")
        nodes[index[node_id]] = NodeSpec(node_id, NodeKind.OR, (Link(new_root, prior),))
        nodes.insert(index[node_id], root(new_root))
        index = {n.id: i for i, n in enumerate(nodes)}
    return Network(nodes)


def not_id(node_id: str) -> str:
    return f"{GENERATED_PREFIX}not:{node_id}"


def eliminate_inhibitory(net: Network) -> Network:
    """Replace inhibitory links into AND/OR nodes by ordinary links from
    fresh unit-label NOT nodes (one per inhibiting parent)."""
    if not any(l.inhibitory and n.kind is not NodeKind.NOT for n in net.node_list() for l in n.links):
        return net
    out: list[NodeSpec] = []
    made: set[str] = set()
    existing = set(net.nodes)
    for n in net.node_list():
        if n.kind is NodeKind.NOT or not any(l.inhibitory for l in n.links):
            out.append(n)
            continue
        links = []
        for l in n.links:
            if not l.inhibitory:
                links.append(l)
                continue
            nid = not_id(l.source)
            if nid not in made:
                if nid in existing:
                    raise NetworkError(f"generated id {nid!r} collides with an existing node")
                out.append(not_node(nid, l.source))
                made.add(nid)
            links.append(Link(nid, l.label))
        out.append(NodeSpec(n.id, n.kind, tuple(links), n.joint_label))
    return Network(out)


# --- CPT networks -------------------------------------------------------------------

@dataclass(frozen=True)
class CptNode:
    """Boolean node with ``table[i] = P(node | parents = bits of i)``; the
    first parent is the most significant bit. Roots have a one-entry table
    holding their prior."""

    id: str
    parents: tuple[str, ...] = ()
    table: tuple[Real, ...] = (Fraction(1),)

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", tuple(self.table))


@dataclass(frozen=True)
class CptNetwork:
    nodes: tuple[CptNode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def node(self, node_id: str) -> CptNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownNodeError(node_id)

    def validate(self) -> list[str]:
        out = []
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            out.append("duplicate node ids")
        known = set(ids)
        for n in self.nodes:
            if len(n.table) != 1 << len(n.parents):
                out.append(f"{n.id}: table has {len(n.table)} entries, expected {1 << len(n.parents)}")
            for x in n.table:
                if isinstance(x, bool) or not isinstance(x, Real) or not 0 <= x <= 1:
                    out.append(f"{n.id}: table entry {x!r} is not a probability")
            if len(set(n.parents)) != len(n.parents):
                out.append(f"{n.id}: repeated parent")
            for p in n.parents:
                if p not in known:
                    out.append(f"{n.id}: unknown parent {p!r}")
        if not out and _cpt_order(self) is None:
            out.append("network has a directed cycle")
        return out

    def topological_order(self) -> list[str]:
        order = _cpt_order(self)
        if order is None:
            raise CptError("network has a directed cycle")
        return order


def _cpt_order(cpt: CptNetwork) -> list[str] | None:
    net = Network(NodeSpec(n.id, NodeKind.OR if n.parents else NodeKind.ROOT, tuple(Link(p) for p in n.parents)) for n in cpt.nodes)
    order = _topo_sort(net)
    return list(order) if order is not None else None


def theta_symbol(node_id: str, rowbits: str = "") -> str:
    return f"θ_{node_id}_{rowbits}" if rowbits else f"θ_{node_id}"


TRUE_ROOT = f"{GENERATED_PREFIX}true"


def from_cpt(cpt: CptNetwork) -> tuple[Network, dict[str, Real]]:
    """Convert a boolean CPT network to an AND-OR-NOT network.

    Each node C with parents A_1..A_n becomes an OR node. Every parent
    assignment b with nonzero entry t_b gets a unit-label AND node with
    ordinary links from parents true in b and inhibitory links from parents
    false in b, linked to C with a fresh symbol for t_b (or 1 when t_b = 1).
    Zero rows produce nothing. A single-parent node links the parent
    directly instead of through a one-input AND. Root priors go through
    :func:`normalize_roots`; a node that can never be true becomes a NOT of
    an always-true generated root.

    Returns the network and the symbol table (symbol -> table entry).
    """
    problems = cpt.validate()
    if problems:
        raise CptError("; ".join(problems))
    nodes: list[NodeSpec] = []
    symbols: dict[str, Real] = {}
    priors: dict[str, Label] = {}
    need_true = False

    def label_for(value, sym) -> Label:
        if value == 1:
            return 1
        symbols[sym] = value
        return sym

    for n in cpt.nodes:
        k = len(n.parents)
        if k == 0:
            prior = n.table[0]
            if prior == 0:
                need_true = True
                nodes.append(not_node(n.id, TRUE_ROOT))
            else:
                nodes.append(root(n.id))
                if prior != 1:
                    priors[n.id] = label_for(prior, theta_symbol(n.id))
            continue
        links: list[Link] = []
        for row, value in enumerate(n.table):
            if value == 0:
                continue
            bits = format(row, f"0{k}b")
            lab = label_for(value, theta_symbol(n.id, bits))
            if k == 1:
                links.append(Link(n.parents[0], lab, inhibitory=bits == "0"))
                continue
            gate = f"{GENERATED_PREFIX}{n.id}:{bits}"
            nodes.append(NodeSpec(gate, NodeKind.AND, tuple(Link(p, 1, b == "0") for p, b in zip(n.parents, bits))))
            links.append(Link(gate, lab))
        if links:
            nodes.append(NodeSpec(n.id, NodeKind.OR, tuple(links)))
        else:
            need_true = True
            nodes.append(not_node(n.id, TRUE_ROOT))
    if need_true:
        nodes.insert(0, root(TRUE_ROOT))
    net = normalize_roots(Network(nodes), priors)
    ids = [x.id for x in net.node_list()]
    if len(set(ids)) != len(ids):
        raise CptError("generated node ids collide with caller ids; avoid the '@' prefix")
    return net, symbols


# --- JSON ---------------------------------------------------------------------------

def _label_to_json(label: Label):
    return 1 if label == 1 else label


def network_to_dict(net: Network) -> dict:
    out = []
    for n in net.node_list():
        d: dict = {"id": n.id, "kind": n.kind.value}
        if n.kind in (NodeKind.AND, NodeKind.NOT) or n.joint_label != 1:
            d["joint_label"] = _label_to_json(n.joint_label)
        d["links"] = [{"from": l.source, "label": _label_to_json(l.label), "inhibitory": l.inhibitory} for l in n.links]
        out.append(d)
    return {"nodes": out}


def network_from_dict(data: Mapping) -> Network:
    try:
        nodes = []
        for d in data["nodes"]:
            links = tuple(
                Link(l["from"], _label_from_json(l.get("label", 1)), bool(l.get("inhibitory", False)))
                for l in d.get("links", ())
            )
            nodes.append(NodeSpec(d["id"], NodeKind(d["kind"]), links, _label_from_json(d.get("joint_label", 1))))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, NetworkError):
            raise
        raise NetworkError(f"malformed network document: {exc!r}") from None
    return Network(nodes)


def _label_from_json(x) -> Label:
    if isinstance(x, bool):
        raise NetworkError(f"label must be a symbol or 1, got {x!r}")
    if isinstance(x, (int, float)) and x == 1:
        return 1
    if isinstance(x, str) and x:
        return x
    raise NetworkError(f"label must be a symbol or 1, got {x!r}")


def dumps_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2, ensure_ascii=False)


def loads_network(text: str) -> Network:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from None
    return network_from_dict(data)


def _number_to_json(x: Real):
    # a Fraction is written as its shortest decimal when that reads back
    # exactly (decimals load as fractions), else as "n/d"
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        f = float(x)
        return f if Fraction(repr(f)) == x else str(x)
    return x


def _number_from_json(x) -> Real:
    if isinstance(x, bool):
        raise CptError(f"not a probability: {x!r}")
    if isinstance(x, (int, float, Fraction)):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            pass
    raise CptError(f"not a probability: {x!r}")


def cpt_to_dict(cpt: CptNetwork) -> dict:
    return {"nodes": [{"id": n.id, "parents": list(n.parents), "table": [_number_to_json(x) for x in n.table]} for n in cpt.nodes]}


def cpt_from_dict(data: Mapping) -> CptNetwork:
    try:
        return CptNetwork(
            tuple(
                CptNode(d["id"], tuple(d.get("parents", ())), tuple(_number_from_json(x) for x in d["table"]))
                for d in data["nodes"]
            )
        )
    except (KeyError, TypeError) as exc:
        raise CptError(f"malformed CPT document: {exc!r}") from None


def dumps_cpt(cpt: CptNetwork) -> str:
    return json.dumps(cpt_to_dict(cpt), indent=2, ensure_ascii=False)


def loads_cpt(text: str) -> CptNetwork:
    """Decimal literals are read as exact fractions."""
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise CptError(f"invalid JSON: {exc}") from None
    return cpt_from_dict(data)


def valuation_to_dict(values: Mapping[str, Real]) -> dict:
    return {k: _number_to_json(v) for k, v in values.items()}


def valuation_from_dict(data: Mapping) -> dict[str, Real]:
    if not isinstance(data, Mapping):
        raise NetworkError("a valuation file is a flat JSON object of symbol -> number")
    out = {}
    for k, v in data.items():
        if isinstance(v, str):
            try:
                v = Fraction(v)
            except ValueError:
                raise NetworkError(f"value for {k!r} is not a number: {v!r}") from None
        out[k] = v
    return out


def sorted_symbols(symbols: Sequence[str]) -> list[str]:
    return sorted(symbols)
