"""Small finite derivations with srec, written out node by node."""

from cyclicbc.kernel import Node, ProofGraph, RuleTag, Sequent


def _n(nid, m, n, rule, *prem, arg=None):
    return Node(nid, Sequent(m, n), RuleTag(rule, arg), tuple(prem))


def _append_nodes(p: str, root_id: str) -> list[Node]:
    """f(0; y) = y, f(s_i x; y) = s_i f(x; y): y followed by the bits of x."""
    nodes = [
        _n(root_id, 1, 1, "srec", f"{p}base", f"{p}h0", f"{p}h1"),
        _n(f"{p}base", 0, 1, "id"),
    ]
    for i in (0, 1):
        h = f"{p}h{i}"
        nodes += [
            _n(h, 1, 2, "w_box", f"{h}sw"),
            _n(f"{h}sw", 0, 2, "e_n", f"{h}wk", arg=0),
            _n(f"{h}wk", 0, 2, "w_n", f"{h}s"),
            _n(f"{h}s", 0, 1, f"s{i}", f"{h}ax"),
            _n(f"{h}ax", 0, 1, "id"),
        ]
    return nodes


def append_derivation() -> ProofGraph:
    return ProofGraph("append", tuple(_append_nodes("", "rec")))


def nested_derivation() -> ProofGraph:
    """g(0, w; y) = y, g(s_i x, w; y) = f(w; g(x, w; y)): y then |x| copies of w."""
    nodes = [
        _n("outer", 2, 1, "srec", "base", "k0", "k1"),
        _n("base", 1, 1, "w_box", "bax"),
        _n("bax", 0, 1, "id"),
    ]
    for i in (0, 1):
        k = f"k{i}"
        nodes += [
            _n(k, 2, 2, "w_box", f"{k}sw"),
            _n(f"{k}sw", 1, 2, "e_n", f"{k}wk", arg=0),
            _n(f"{k}wk", 1, 2, "w_n", f"{k}in"),
        ]
        nodes += _append_nodes(f"{k}i", f"{k}in")
    return ProofGraph("nested", tuple(nodes))


def append_value(x: int, y: int) -> int:
    return (y << x.bit_length()) | x if x else y


def nested_value(x: int, w: int, y: int) -> int:
    for _ in range(x.bit_length()):
        y = append_value(w, y)
    return y
