"""Signal-level dataflow graph extraction.

The graph is a set of directed (source, target) signal-name edges:

  - every continuous/blocking/nonblocking assignment adds an edge from each
    signal in its right-hand side to each assigned base signal;
  - signals in enclosing if conditions, case subjects, and matched case-item
    labels add conditional-dependency edges to the same targets;
  - instance connections add edges from input-connection signals to
    output-connection signals, where an output connection is a bare
    (possibly selected) net or output port not driven by any assignment in
    the module; port directions of the instantiated module are not visible
    from a single-module parse, so this is a declared approximation.

Clock/reset signals in always event controls are deliberately not dataflow
sources: edge sensitivity is timing, not data. Only declared ports, nets,
and registers may appear as endpoints; parameter and macro references are
dropped. Edges have set semantics and self-edges are allowed (feedback
registers).
"""

from __future__ import annotations

from dataclasses import dataclass

from tbforge.errors import ParseError
from tbforge.frontend.ast_nodes import AstNode, NodeKind

_ASSIGN_KINDS = (NodeKind.ContAssign, NodeKind.BlockingAssign, NodeKind.NonblockingAssign)


@dataclass(frozen=True)
class Dfg:
    edges: frozenset[tuple[str, str]]


def _ident_names(expr: AstNode) -> set[str]:
    return {n.label for n in expr.walk() if n.kind is NodeKind.IdentRef}


def _lvalue_bases(lhs: AstNode) -> set[str]:
    if lhs.kind is NodeKind.IdentRef:
        return {lhs.label}
    if lhs.kind in (NodeKind.BitSelect, NodeKind.PartSelect):
        return _lvalue_bases(lhs.children[0])
    if lhs.kind is NodeKind.Concat:
        bases: set[str] = set()
        for part in lhs.children:
            bases |= _lvalue_bases(part)
        return bases
    return set()


def extract_dfg(ast: AstNode) -> Dfg:
    """Build the dataflow edge set for a Module root."""
    if ast.kind is not NodeKind.Module:
        raise ParseError("dataflow extraction needs a Module root", 1)

    declared = {
        child.label
        for child in ast.children
        if child.kind in (NodeKind.PortDecl, NodeKind.NetDecl)
    }

    edges: set[tuple[str, str]] = set()
    assigned: set[str] = set()

    def visit(node: AstNode, conds: frozenset[str]) -> None:
        kind = node.kind
        if kind in _ASSIGN_KINDS:
            targets = _lvalue_bases(node.children[0])
            sources = _ident_names(node.children[1]) | conds
            assigned.update(targets)
            for t in targets:
                for s in sources:
                    edges.add((s, t))
            return
        if kind is NodeKind.IfStmt:
            cond_sigs = conds | _ident_names(node.children[0])
            visit(node.children[1], cond_sigs)
            if len(node.children) == 3:
                visit(node.children[2], cond_sigs)
            return
        if kind is NodeKind.CaseStmt:
            subject_sigs = conds | _ident_names(node.children[0])
            for item in node.children[1:]:
                label_sigs = frozenset()
                for label_expr in item.children[:-1]:
                    label_sigs |= _ident_names(label_expr)
                visit(item.children[-1], subject_sigs | label_sigs)
            return
        if kind in (NodeKind.SeqBlock, NodeKind.AlwaysBlock):
            for child in node.children:
                visit(child, conds)
            return

    for child in ast.children:
        if child.kind in (NodeKind.ContAssign, NodeKind.AlwaysBlock):
            visit(child, frozenset())

    for child in ast.children:
        if child.kind is NodeKind.Instance:
            _instance_edges(child, ast, assigned, edges)

    filtered = frozenset(
        (s, t) for s, t in edges if s in declared and t in declared
    )
    return Dfg(edges=filtered)


def _instance_edges(inst: AstNode, module: AstNode, assigned: set[str],
                    edges: set[tuple[str, str]]) -> None:
    output_ok: set[str] = set()
    for child in module.children:
        if child.kind is NodeKind.NetDecl and child.qualifier in ("wire", "logic"):
            output_ok.add(child.label)
        elif child.kind is NodeKind.PortDecl and child.qualifier == "output":
            output_ok.add(child.label)

    outputs: list[str] = []
    input_sigs: set[str] = set()
    for conn in inst.children:
        if conn.kind is not NodeKind.PortConn or not conn.children:
            continue
        expr = conn.children[0]
        base = expr
        while base.kind in (NodeKind.BitSelect, NodeKind.PartSelect):
            base = base.children[0]
        if (base.kind is NodeKind.IdentRef and base.label in output_ok
                and base.label not in assigned):
            outputs.append(base.label)
        else:
            input_sigs |= _ident_names(expr)

    for target in outputs:
        for source in input_sigs:
            edges.add((source, target))
