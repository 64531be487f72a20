"""Gadget records: a tree with terminals, the activity it implements, and an
exact certificate.

Every gadget built here is a tree.  It is stored as a shared-subtree
:class:`~monodimer.trees.Node` whose root is the terminal ``u`` (with exactly
one child); edge gadgets mark their second terminal ``v``.  Certificates hold
the conditioned partition functions behind the implemented ratios.  For trees
small enough they are the true values (``scale="exact"``); otherwise every
value is multiplied by one common unknown nonzero constant
(``scale="normalized"``), which leaves every ratio and every zero exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

from gmpy2 import mpq

from ..exact import match_summary, to_rational
from ..graph import Graph
from .. import trees
from ..trees import Node

VERTEX, EDGE = "vertex_activity", "edge_activity"
EDGE_KEYS = ("uv", "u~v", "~uv", "~u~v")

# Trees up to this many vertices get true (unnormalized) certificates and are
# re-verified through exact_engine on the written-out graph.
EXACT_LIMIT = 4000


class GadgetError(ValueError):
    pass


def _q(x) -> str:
    x = to_rational(x)
    return f"{x.numerator}/{x.denominator}"


def edge_table(root: Node, gamma, normalize: bool) -> dict:
    tab = trees.conditioned_table(root, gamma, ["v"], normalize=normalize)
    cs = trees.condition_sum
    return {
        "uv": cs(tab, root=True, v=True),
        "u~v": cs(tab, root=True, v=False),
        "~uv": cs(tab, root=False, v=True),
        "~u~v": cs(tab, root=False, v=False),
    }


def tree_certificate(root: Node, kind: str, gamma) -> tuple[dict, str]:
    """Certificate values for a gadget tree, plus their scale label."""
    exact = trees.node_count(root) <= EXACT_LIMIT
    if kind == VERTEX:
        a, b = trees.pair_values(root, gamma, normalize=not exact)
        cert = {"z_not_u": a, "z": b}
    else:
        cert = edge_table(root, gamma, normalize=not exact)
    return cert, "exact" if exact else "normalized"


def ratios_from(kind: str, cert: dict) -> dict:
    if kind == VERTEX:
        if cert["z"] == 0:
            raise GadgetError("partition function of the vertex gadget vanishes")
        return {"ratio": cert["z_not_u"] / cert["z"]}
    den = cert["~u~v"]
    if den == 0:
        raise GadgetError("Z with both terminals unmatched vanishes")
    return {k: cert[k] / den for k in ("uv", "u~v", "~uv")}


def error_of(kind: str, achieved: dict, target) -> object:
    """Largest deviation of the achieved ratios from what the gadget should implement."""
    if kind == VERTEX:
        return abs(achieved["ratio"] - target)
    return max(abs(achieved["uv"] - target), abs(achieved["u~v"]), abs(achieved["~uv"]))


@dataclass
class Gadget:
    tree: Node
    kind: str
    gamma: object
    target: object
    accuracy: object
    achieved: dict
    certificate: dict
    scale: str = "exact"
    info: dict = field(default_factory=dict)

    @classmethod
    def from_tree(cls, tree: Node, kind: str, gamma, target, accuracy, info=None) -> "Gadget":
        """Certify ``tree`` and check it meets ``accuracy``; raises GadgetError otherwise."""
        if kind not in (VERTEX, EDGE):
            raise ValueError(f"unknown gadget kind {kind!r}")
        gamma, target, accuracy = to_rational(gamma), to_rational(target), to_rational(accuracy)
        if len(tree.children) != 1:
            raise GadgetError("terminal u must have degree one")
        cert, scale = tree_certificate(tree, kind, gamma)
        achieved = ratios_from(kind, cert)
        err = error_of(kind, achieved, target)
        if err > accuracy:
            raise GadgetError(f"achieved error {err} exceeds accuracy {accuracy}")
        return cls(tree, kind, gamma, target, accuracy, achieved, cert, scale, dict(info or {}))

    # structure -----------------------------------------------------------
    @cached_property
    def vertex_count(self) -> int:
        return trees.node_count(self.tree)

    @property
    def max_degree(self) -> int:
        return trees.max_degree(self.tree)

    @cached_property
    def _materialized(self) -> tuple[Graph, dict]:
        return trees.materialize(self.tree)

    @property
    def graph(self) -> Graph:
        """The gadget written out as a Graph (raises if it is too large)."""
        return self._materialized[0]

    @property
    def terminals(self) -> tuple[int, ...]:
        marks = self._materialized[1]
        return (0,) if self.kind == VERTEX else (0, marks["v"])

    def terminal_distance(self) -> int:
        return trees.mark_depth(self.tree, "v") if self.kind == EDGE else 0

    @property
    def error(self):
        return error_of(self.kind, self.achieved, self.target)

    # verification ----------------------------------------------------------
    def verify(self, engine_limit: int = EXACT_LIMIT) -> bool:
        """Recompute everything from scratch and check the stored record.

        Small gadgets are written out and evaluated by the general exact
        engine, an independent route from the tree recurrence.  Raises
        GadgetError on any mismatch.
        """
        if len(self.tree.children) != 1:
            raise GadgetError("terminal u must have degree one")
        if self.kind == EDGE:
            d = trees.mark_depth(self.tree, "v")
            if d < 2:
                raise GadgetError("terminals must be non-adjacent")
            if d % 2:
                raise GadgetError("terminals lie in different bipartition classes")
        cert, scale = tree_certificate(self.tree, self.kind, self.gamma)
        if scale != self.scale or ratios_from(self.kind, cert) != self.achieved:
            raise GadgetError("certificate does not match a fresh tree evaluation")
        if scale == "exact" and cert != self.certificate:
            raise GadgetError("stored certificate values differ from recomputed ones")
        if self.vertex_count <= engine_limit:
            g, marks = trees.materialize(self.tree, limit=engine_limit)
            if self.kind == VERTEX:
                if g.degree(0) != 1:
                    raise GadgetError("terminal u must have degree one")
                s = match_summary(g, self.gamma, 0)
                fresh = {"z_not_u": s.z_not_u, "z": s.z}
            else:
                v = marks["v"]
                if g.degree(0) != 1 or g.degree(v) != 1:
                    raise GadgetError("terminals must have degree one")
                s = match_summary(g, self.gamma, 0, v)
                fresh = dict(s.pairwise)
            if ratios_from(self.kind, fresh) != self.achieved:
                raise GadgetError("exact engine disagrees with the certificate")
            if scale == "exact" and any(fresh[k] != self.certificate[k] for k in fresh):
                raise GadgetError("exact engine disagrees with the certificate values")
        if self.error > self.accuracy:
            raise GadgetError("accuracy bound violated")
        return True

    # serialization -----------------------------------------------------------
    def to_record(self, graph_limit: int = 20_000) -> dict:
        order = trees.postorder(self.tree)
        index = {id(x): i for i, x in enumerate(order)}
        rec = {
            "kind": self.kind,
            "gamma": _q(self.gamma),
            "target": _q(self.target),
            "accuracy": _q(self.accuracy),
            "error": _q(self.error),
            "achieved": {k: _q(v) for k, v in self.achieved.items()},
            "certificate": {k: _q(v) for k, v in self.certificate.items()},
            "scale": self.scale,
            "vertex_count": self.vertex_count,
            "tree": {"root": index[id(self.tree)],
                     "nodes": [[[index[id(c)] for c in x.children], x.mark] for x in order]},
            "info": self.info,
        }
        if self.vertex_count <= graph_limit:
            rec["graph"] = self.graph.to_text()
            rec["terminals"] = list(self.terminals)
        return rec

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_record(**kw), indent=1)

    @classmethod
    def from_record(cls, rec: dict) -> "Gadget":
        nodes: list[Node] = []
        for kids, mark in rec["tree"]["nodes"]:
            nodes.append(Node([nodes[i] for i in kids], mark))
        tree = nodes[rec["tree"]["root"]]
        g = cls(
            tree, rec["kind"], mpq(rec["gamma"]), mpq(rec["target"]), mpq(rec["accuracy"]),
            {k: mpq(v) for k, v in rec["achieved"].items()},
            {k: mpq(v) for k, v in rec["certificate"].items()},
            rec["scale"], rec.get("info", {}),
        )
        return g

    @classmethod
    def from_json(cls, text: str) -> "Gadget":
        return cls.from_record(json.loads(text))

    def same_as(self, other: "Gadget") -> bool:
        return self.to_record() == other.to_record()
