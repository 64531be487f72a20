"""Perfect (zero-error) tree gadgets at activities -1 and -1/4.

At activity -1 the two tree moves

    f1: hang the current terminal below a new vertex        x -> 1/(1-x)
    f2: same, plus an extra leaf on the new vertex           x -> -1/x

act on the ratio x = Z_{not u}/Z.  Starting from the middle of a 3-path
(x = -1) they reach every nonzero rational, so every rational vertex
activity is implemented exactly.  At activity -1/4 two analogous moves
(pendant, and a pendant through a 3-leaf star) produce the activities 4 and 1
needed for a -1 edge gadget.
"""

from __future__ import annotations

from gmpy2 import mpq

from ..exact import to_rational
from ..trees import LEAF, Node
from .gadget import EDGE, VERTEX, Gadget

MINUS_ONE = mpq(-1)
QUARTER = mpq(-1, 4)


# ---------------------------------------------------------------------------
# activity -1
# ---------------------------------------------------------------------------

def _f1(x):
    return 1 / (1 - x)


def _f2(x):
    return -1 / x


def minus_one_word(s) -> list[int]:
    """Moves (1 or 2, applied left to right starting from -1) that reach ``s``.

    Works backwards from ``s`` with the reductions
    f1 f1 f2 (x) = 1 + x,  f2 f1 f1 (x) = x/(1-x),
    f2 f1 f1 f2 f1 f1 f2 (x) = -1/(2+x), which shrink the numerator plus
    denominator until -1 is reached.
    """
    s = to_rational(s)
    if s == 0:
        raise ValueError("0 is not reachable from -1")
    tail: list[list[int]] = []  # blocks, last block applied last
    x = s
    while x != -1:
        if x == 1:
            tail.append([2])
            x = mpq(-1)
        elif x > 1 or x < -1:
            tail.append([2])
            x = -1 / x
        elif x > 0:
            tail.append([2, 1, 1])
            x = x - 1
        else:
            p, q = -x.numerator, x.denominator
            if q == 2 * p:
                tail.append([1, 1, 2])
                x = mpq(-1)
            elif q > 2 * p:
                tail.append([1, 1, 2])
                x = mpq(-p, q - p)
            else:
                tail.append([2, 1, 1, 2, 1, 1, 2])
                x = mpq(-(2 * p - q), p)
    word: list[int] = []
    for block in reversed(tail):
        word.extend(block)
    return word


def apply_word(word, x0, f1, f2):
    x = x0
    for i in word:
        x = f1(x) if i == 1 else f2(x)
    return x


def minus_one_word_tree(word) -> Node:
    """Root is u_n (the vertex whose ratio the word produces); it has degree <= 2."""
    node = Node([LEAF, LEAF])  # middle of a 3-path
    for i in word:
        node = Node([node]) if i == 1 else Node([node, LEAF])
    return node


def minus_one_vertex_tree(lam) -> Node:
    """Tree with terminal root implementing ``lam`` exactly at activity -1."""
    lam = to_rational(lam)
    if lam == 0:
        return Node([Node([LEAF])], "u")
    if lam == 1:
        return Node([Node([Node([LEAF])])], "u")
    word = minus_one_word((lam - 1) / lam)
    return Node([minus_one_word_tree(word)], "u")


def build_minus_one_tree(lam) -> Gadget:
    """Max-degree-3 tree implementing the vertex activity ``lam`` perfectly at -1."""
    lam = to_rational(lam)
    tree = minus_one_vertex_tree(lam)
    return Gadget.from_tree(tree, VERTEX, MINUS_ONE, lam, 0, info={"construction": "minus_one_word"})


# ---------------------------------------------------------------------------
# activity -1/4
# ---------------------------------------------------------------------------

QUARTER_WORD_FOUR = (1, 2, 2, 1, 2, 1)   # applied left to right: 0 -> 1 -> 4 -> -2 -> 2/3 -> 3 -> 4
QUARTER_WORD_ONE = (1,)


def _q1(x):
    return 1 / (1 - x / 4)


def _q2(x):
    return 2 / (1 - x / 2)


def quarter_base() -> Node:
    """Height-2 binary tree hung below a pendant u0; its ratio at -1/4 is 0."""
    b1 = Node([LEAF, LEAF])
    return Node([Node([b1, b1])])


def quarter_star() -> Node:
    """Star with three leaves, rooted at one of its leaves."""
    return Node([Node([LEAF, LEAF])])


def quarter_word_tree(word) -> Node:
    node = quarter_base()
    star = quarter_star()
    for i in word:
        node = Node([node]) if i == 1 else Node([node, star])
    return node


def chain_edge_tree(h1: Node, h2: Node, h3: Node) -> Node:
    """u - y1 - y2 - y3 - v where y_i is the root of h_i (its subtree is kept)."""
    v = Node((), "v")
    y3 = Node(h3.children + (v,))
    y2 = Node(h2.children + (y3,))
    y1 = Node(h1.children + (y2,))
    return Node((y1,), "u")


def build_quarter_edge_gadget() -> Gadget:
    """Tree implementing the edge activity -1 perfectly at activity -1/4."""
    four = quarter_word_tree(QUARTER_WORD_FOUR)
    one = quarter_word_tree(QUARTER_WORD_ONE)
    tree = chain_edge_tree(four, one, four)
    return Gadget.from_tree(tree, EDGE, QUARTER, -1, 0, info={"construction": "quarter_chain"})
