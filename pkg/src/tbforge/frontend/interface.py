"""Module interface extraction: ports, directions, widths, parameters.

Widths resolve through constant arithmetic only; parameter references are
substituted when their defaults fold to constants. Anything else (macro
widths, $clog2, non-constant parameters) is reported as width 1 with the
symbolic flag set, since downstream connectivity checks need presence and
direction more than exact widths.
"""

from __future__ import annotations

from dataclasses import dataclass

from tbforge.errors import ParseError
from tbforge.frontend.ast_nodes import AstNode, NodeKind, node_to_text


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # input | output | inout
    width: int
    symbolic: bool = False


@dataclass(frozen=True)
class Parameter:
    name: str
    default: str  # literal text of the default expression


@dataclass(frozen=True)
class ModuleInterface:
    name: str
    ports: tuple[Port, ...]
    parameters: tuple[Parameter, ...]


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _literal_value(text: str) -> int:
    text = text.replace("_", "")
    if "'" in text:
        _, rest = text.split("'", 1)
        if rest and rest[0] in "sS":
            rest = rest[1:]
        base = {"b": 2, "o": 8, "d": 10, "h": 16}[rest[0].lower()]
        digits = rest[1:].replace("x", "0").replace("X", "0")
        digits = digits.replace("z", "0").replace("Z", "0").replace("?", "0")
        return int(digits, base) if digits else 0
    if "." in text:
        raise ValueError("real literal")
    return int(text)


def const_eval(expr: AstNode, params: dict[str, AstNode], _depth: int = 0) -> int:
    """Fold an expression to an integer, or raise ValueError."""
    if _depth > 32:
        raise ValueError("parameter reference cycle")
    k = expr.kind
    if k is NodeKind.NumberLit:
        return _literal_value(expr.label)
    if k is NodeKind.IdentRef:
        if expr.label in params:
            return const_eval(params[expr.label], params, _depth + 1)
        raise ValueError(f"non-constant identifier {expr.label}")
    if k is NodeKind.UnaryOp:
        v = const_eval(expr.children[0], params, _depth)
        if expr.label == "-":
            return -v
        if expr.label == "+":
            return v
        if expr.label == "~":
            return ~v
        if expr.label == "!":
            return int(v == 0)
        raise ValueError(f"unary {expr.label} in constant expression")
    if k is NodeKind.BinaryOp:
        a = const_eval(expr.children[0], params, _depth)
        b = const_eval(expr.children[1], params, _depth)
        op = expr.label
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise ValueError("division by zero")
            return _trunc_div(a, b)
        if op == "%":
            if b == 0:
                raise ValueError("modulo by zero")
            return a - _trunc_div(a, b) * b
        if op == "**":
            return a ** b
        if op == "<<":
            return a << b
        if op == ">>":
            return a >> b
        raise ValueError(f"operator {op} in constant expression")
    if k is NodeKind.TernaryOp:
        c = const_eval(expr.children[0], params, _depth)
        branch = expr.children[1] if c else expr.children[2]
        return const_eval(branch, params, _depth)
    raise ValueError(f"non-constant construct {k.name}")


def extract_interface(ast: AstNode) -> ModuleInterface:
    """Extract the port/parameter interface from a Module root.

    Port order is declaration order (header order for non-ANSI headers).
    """
    if ast.kind is not NodeKind.Module:
        raise ParseError("interface extraction needs a Module root", 1)

    params: dict[str, AstNode] = {}
    param_list: list[Parameter] = []
    for child in ast.children:
        if child.kind is NodeKind.ParamDecl and child.qualifier in ("parameter", "localparam"):
            default = child.children[0] if child.children else None
            if child.label and child.label not in params and default is not None:
                params[child.label] = default
            if child.qualifier == "parameter":
                param_list.append(Parameter(
                    name=child.label,
                    default=node_to_text(default) if default is not None else "",
                ))

    # Non-ANSI headers list bare names; directions come from body decls.
    directed: dict[str, AstNode] = {}
    order: list[str] = []
    for child in ast.children:
        if child.kind is not NodeKind.PortDecl:
            continue
        if child.label not in order:
            order.append(child.label)
        if child.qualifier and child.label not in directed:
            directed[child.label] = child

    ports = []
    for name in order:
        decl = directed.get(name)
        if decl is None:
            ports.append(Port(name=name, direction="input", width=1, symbolic=True))
            continue
        width, symbolic = _port_width(decl, params)
        ports.append(Port(name=name, direction=decl.qualifier, width=width,
                          symbolic=symbolic))

    seen = set()
    for port in ports:
        if port.name in seen:
            raise ParseError(f"duplicate port {port.name}", 1)
        seen.add(port.name)

    return ModuleInterface(name=ast.label, ports=tuple(ports),
                           parameters=tuple(param_list))


def _port_width(decl: AstNode, params: dict[str, AstNode]) -> tuple[int, bool]:
    if not decl.children:
        return 1, False
    msb_expr, lsb_expr = decl.children[0], decl.children[1]
    try:
        msb = const_eval(msb_expr, params)
        lsb = const_eval(lsb_expr, params)
    except ValueError:
        return 1, True
    return abs(msb - lsb) + 1, False
