"""Generic AST node for the Verilog subset.

A single immutable node type keeps structural similarity simple: similarity
signatures are built from ``kind`` and child kinds only, so declared names
and operator symbols (``label``) never leak into structure comparisons.
``qualifier`` carries secondary syntax that is not a child node: port
direction, net type, always-block sensitivity, case flavor, part-select
flavor, instance name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class NodeKind(Enum):
    Module = "module"
    PortDecl = "port_decl"
    ParamDecl = "param_decl"
    NetDecl = "net_decl"
    ContAssign = "cont_assign"
    AlwaysBlock = "always_block"
    SeqBlock = "seq_block"
    IfStmt = "if_stmt"
    CaseStmt = "case_stmt"
    CaseItem = "case_item"
    BlockingAssign = "blocking_assign"
    NonblockingAssign = "nonblocking_assign"
    Instance = "instance"
    PortConn = "port_conn"
    BinaryOp = "binary_op"
    UnaryOp = "unary_op"
    TernaryOp = "ternary_op"
    Concat = "concat"
    Replicate = "replicate"
    BitSelect = "bit_select"
    PartSelect = "part_select"
    IdentRef = "ident_ref"
    NumberLit = "number_lit"


@dataclass(frozen=True)
class AstNode:
    kind: NodeKind
    label: str = ""
    children: tuple["AstNode", ...] = field(default=())
    qualifier: str = ""

    def walk(self):
        """Yield this node and all descendants, depth-first, pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def node_to_text(node: AstNode) -> str:
    """Render an expression subtree back to compact source text."""
    k = node.kind
    if k is NodeKind.IdentRef or k is NodeKind.NumberLit:
        return node.label
    if k is NodeKind.UnaryOp:
        return f"{node.label}{node_to_text(node.children[0])}"
    if k is NodeKind.BinaryOp:
        lhs, rhs = node.children
        return f"({node_to_text(lhs)} {node.label} {node_to_text(rhs)})"
    if k is NodeKind.TernaryOp:
        c, a, b = node.children
        return f"({node_to_text(c)} ? {node_to_text(a)} : {node_to_text(b)})"
    if k is NodeKind.Concat:
        return "{" + ", ".join(node_to_text(c) for c in node.children) + "}"
    if k is NodeKind.Replicate:
        count, body = node.children
        return "{" + node_to_text(count) + node_to_text(body) + "}"
    if k is NodeKind.BitSelect:
        base, index = node.children
        return f"{node_to_text(base)}[{node_to_text(index)}]"
    if k is NodeKind.PartSelect:
        base, left, right = node.children
        sep = node.qualifier or ":"
        return f"{node_to_text(base)}[{node_to_text(left)}{sep}{node_to_text(right)}]"
    raise ValueError(f"not an expression node: {node.kind}")
