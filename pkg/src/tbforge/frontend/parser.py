"""Recursive-descent parser for a synthesizable Verilog subset.

Supported constructs:
  - one module per source text, ANSI or simple non-ANSI port lists
  - parameter / localparam declarations (header and body)
  - wire / reg declarations with ranges, multiple declarators,
    wire initializers (desugared to a continuous assignment)
  - continuous assign, always blocks with event controls
  - begin/end blocks (optionally labeled), if/else, case/casex/casez
  - blocking and nonblocking assignments
  - module instantiation with named or positional connections and
    parameter overrides
  - expressions: unary/binary/ternary operators, concatenation,
    replication, bit select, part select (: +: -:), sized and
    unsized literals

Anything outside the subset (generate, functions, tasks, initial blocks,
system tasks, delays, loops, compiler directives, ...) raises
ParseUnsupported with the offending line. Testbenches are never parsed
here; they go straight to the external simulator.
"""

from __future__ import annotations

from tbforge.errors import ParseError, ParseUnsupported
from tbforge.frontend.ast_nodes import AstNode, NodeKind
from tbforge.frontend.tokens import Token, TokenKind, lex

_UNSUPPORTED_KEYWORDS = {
    "generate": "generate block",
    "endgenerate": "generate block",
    "genvar": "genvar declaration",
    "function": "function declaration",
    "endfunction": "function declaration",
    "task": "task declaration",
    "endtask": "task declaration",
    "initial": "initial block",
    "integer": "integer declaration",
    "real": "real declaration",
    "time": "time declaration",
    "for": "for loop",
    "while": "while loop",
    "repeat": "repeat loop",
    "forever": "forever loop",
    "defparam": "defparam",
    "specify": "specify block",
    "wait": "wait statement",
    "force": "force statement",
    "release": "release statement",
    "deassign": "deassign statement",
    "disable": "disable statement",
}

_UNARY_OPS = {"+", "-", "!", "~", "&", "~&", "|", "~|", "^", "~^", "^~"}

# Binary operators by ascending precedence tier.
_BINARY_TIERS = [
    ["||"],
    ["&&"],
    ["|"],
    ["^", "~^", "^~"],
    ["&"],
    ["==", "!=", "===", "!=="],
    ["<", "<=", ">", ">="],
    ["<<", ">>", "<<<", ">>>"],
    ["+", "-"],
    ["*", "/", "%"],
    ["**"],
]

_EOF = Token(TokenKind.Punctuation, "<eof>", 0)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token navigation --

    def cur(self) -> Token:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return _EOF

    def peek(self, offset: int = 1) -> Token:
        p = self.pos + offset
        if p < len(self.tokens):
            return self.tokens[p]
        return _EOF

    def at(self, text: str) -> bool:
        return self.cur().text == text

    def at_kind(self, kind: TokenKind) -> bool:
        return self.cur().kind is kind

    def take(self) -> Token:
        tok = self.cur()
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.cur()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, got {tok.text!r}", tok.line)
        return self.take()

    def expect_ident(self) -> Token:
        tok = self.cur()
        if tok.kind is not TokenKind.Identifier:
            raise ParseError(f"expected identifier, got {tok.text!r}", tok.line)
        if tok.text.startswith(("$", "`")):
            raise ParseUnsupported(f"system or macro identifier {tok.text!r}", tok.line)
        return self.take()

    def reject_unsupported(self, directives: bool = True) -> None:
        tok = self.cur()
        if tok.kind is TokenKind.Keyword and tok.text in _UNSUPPORTED_KEYWORDS:
            raise ParseUnsupported(_UNSUPPORTED_KEYWORDS[tok.text], tok.line)
        if directives and tok.text.startswith("`"):
            raise ParseUnsupported(f"compiler directive {tok.text!r}", tok.line)

    # -- module --

    def parse_module(self) -> AstNode:
        if self.cur().text.startswith("`"):
            raise ParseUnsupported(f"compiler directive {self.cur().text!r}", self.cur().line)
        self.expect("module")
        name = self.expect_ident().text
        children: list[AstNode] = []

        if self.at("#"):
            self.take()
            self.expect("(")
            children.extend(self._header_params())
            self.expect(")")

        if self.at("("):
            self.take()
            children.extend(self._port_list())
            self.expect(")")

        self.expect(";")

        while not self.at("endmodule"):
            if self.cur() is _EOF:
                raise ParseError("missing endmodule", self.tokens[-1].line if self.tokens else 1)
            children.extend(self._module_item())
        self.expect("endmodule")
        if self.cur() is not _EOF:
            raise ParseError(f"trailing input after endmodule: {self.cur().text!r}", self.cur().line)
        return AstNode(NodeKind.Module, label=name, children=tuple(children))

    def _header_params(self) -> list[AstNode]:
        params: list[AstNode] = []
        while not self.at(")"):
            if self.at("parameter") or self.at("localparam"):
                self.take()
            if self.at("signed"):
                self.take()
            if self.at("["):
                self._skip_range()
            name = self.expect_ident().text
            default: tuple[AstNode, ...] = ()
            if self.at("="):
                self.take()
                default = (self._expr(),)
            params.append(AstNode(NodeKind.ParamDecl, label=name, children=default,
                                  qualifier="parameter"))
            if self.at(","):
                self.take()
        return params

    def _skip_range(self) -> None:
        self.expect("[")
        depth = 1
        while depth:
            tok = self.take()
            if tok is _EOF:
                raise ParseError("unterminated range", self.tokens[-1].line)
            if tok.text == "[":
                depth += 1
            elif tok.text == "]":
                depth -= 1

    def _port_list(self) -> list[AstNode]:
        ports: list[AstNode] = []
        if self.at(")"):
            return ports
        if self.cur().text in ("input", "output", "inout"):
            direction = ""
            rng: tuple[AstNode, ...] = ()
            while True:
                if self.cur().text in ("input", "output", "inout"):
                    direction = self.take().text
                    if self.cur().text in ("wire", "reg", "logic"):
                        self.take()
                    if self.at("signed"):
                        self.take()
                    rng = self._opt_range()
                name = self.expect_ident().text
                ports.append(AstNode(NodeKind.PortDecl, label=name, children=rng,
                                     qualifier=direction))
                if self.at(","):
                    self.take()
                    continue
                break
        else:
            while True:
                name = self.expect_ident().text
                ports.append(AstNode(NodeKind.PortDecl, label=name))
                if self.at(","):
                    self.take()
                    continue
                break
        return ports

    def _opt_range(self) -> tuple[AstNode, ...]:
        if not self.at("["):
            return ()
        self.take()
        msb = self._expr()
        self.expect(":")
        lsb = self._expr()
        self.expect("]")
        return (msb, lsb)

    # -- module body --

    def _module_item(self) -> list[AstNode]:
        self.reject_unsupported()
        tok = self.cur()

        if tok.text in ("parameter", "localparam"):
            return self._param_decls()
        if tok.text in ("input", "output", "inout"):
            return self._port_decls()
        if tok.text in ("wire", "reg", "logic"):
            return self._net_decls()
        if tok.text == "assign":
            return self._cont_assigns()
        if tok.text == "always":
            return [self._always_block()]
        if tok.text in ("and", "or", "not"):
            raise ParseUnsupported(f"gate primitive {tok.text!r}", tok.line)
        if tok.kind is TokenKind.Identifier:
            if tok.text.startswith("$"):
                raise ParseUnsupported(f"system task {tok.text!r}", tok.line)
            return [self._instance()]
        raise ParseError(f"unexpected {tok.text!r} in module body", tok.line)

    def _param_decls(self) -> list[AstNode]:
        flavor = self.take().text
        if self.at("signed"):
            self.take()
        if self.at("["):
            self._skip_range()
        decls = []
        while True:
            name = self.expect_ident().text
            self.expect("=")
            value = self._expr()
            decls.append(AstNode(NodeKind.ParamDecl, label=name, children=(value,),
                                 qualifier=flavor))
            if self.at(","):
                self.take()
                continue
            break
        self.expect(";")
        return decls

    def _port_decls(self) -> list[AstNode]:
        direction = self.take().text
        if self.cur().text in ("wire", "reg", "logic"):
            self.take()
        if self.at("signed"):
            self.take()
        rng = self._opt_range()
        decls = []
        while True:
            name = self.expect_ident().text
            decls.append(AstNode(NodeKind.PortDecl, label=name, children=rng,
                                 qualifier=direction))
            if self.at(","):
                self.take()
                continue
            break
        self.expect(";")
        return decls

    def _net_decls(self) -> list[AstNode]:
        net_type = self.take().text
        if self.at("signed"):
            self.take()
        rng = self._opt_range()
        decls: list[AstNode] = []
        while True:
            name_tok = self.expect_ident()
            decls.append(AstNode(NodeKind.NetDecl, label=name_tok.text, children=rng,
                                 qualifier=net_type))
            if self.at("="):
                if net_type != "wire":
                    raise ParseUnsupported("reg initializer", name_tok.line)
                self.take()
                rhs = self._expr()
                lhs = AstNode(NodeKind.IdentRef, label=name_tok.text)
                decls.append(AstNode(NodeKind.ContAssign, children=(lhs, rhs)))
            if self.at(","):
                self.take()
                continue
            break
        self.expect(";")
        return decls

    def _cont_assigns(self) -> list[AstNode]:
        self.expect("assign")
        if self.at("#"):
            raise ParseUnsupported("assignment delay", self.cur().line)
        assigns = []
        while True:
            lhs = self._lvalue()
            self.expect("=")
            rhs = self._expr()
            assigns.append(AstNode(NodeKind.ContAssign, children=(lhs, rhs)))
            if self.at(","):
                self.take()
                continue
            break
        self.expect(";")
        return assigns

    def _always_block(self) -> AstNode:
        tok = self.expect("always")
        if not self.at("@"):
            raise ParseUnsupported("always block without event control", tok.line)
        self.take()
        sensitivity = self._event_control()
        body = self._statement()
        if body is None:
            body = AstNode(NodeKind.SeqBlock)
        return AstNode(NodeKind.AlwaysBlock, children=(body,), qualifier=sensitivity)

    def _event_control(self) -> str:
        if self.at("*"):
            self.take()
            return "*"
        self.expect("(")
        parts: list[str] = []
        while not self.at(")"):
            tok = self.take()
            if tok is _EOF:
                raise ParseError("unterminated event control", self.tokens[-1].line)
            parts.append(tok.text)
        self.expect(")")
        text = " ".join(parts)
        return "*" if text == "*" else text

    # -- statements --

    def _statement(self) -> AstNode | None:
        self.reject_unsupported()
        tok = self.cur()

        if tok.text == ";":
            self.take()
            return None
        if tok.text == "begin":
            return self._seq_block()
        if tok.text == "if":
            return self._if_stmt()
        if tok.text in ("case", "casex", "casez"):
            return self._case_stmt()
        if tok.text in ("#", "@"):
            raise ParseUnsupported("timing control in statement", tok.line)
        if tok.kind is TokenKind.Identifier and tok.text.startswith("$"):
            raise ParseUnsupported(f"system task {tok.text!r}", tok.line)
        if tok.kind is TokenKind.Identifier or tok.text == "{":
            return self._assignment()
        raise ParseError(f"unexpected {tok.text!r} in statement", tok.line)

    def _seq_block(self) -> AstNode:
        self.expect("begin")
        label = ""
        if self.at(":"):
            self.take()
            label = self.expect_ident().text
        stmts = []
        while not self.at("end"):
            if self.cur() is _EOF:
                raise ParseError("unterminated begin/end block", self.tokens[-1].line)
            stmt = self._statement()
            if stmt is not None:
                stmts.append(stmt)
        self.expect("end")
        return AstNode(NodeKind.SeqBlock, label=label, children=tuple(stmts))

    def _if_stmt(self) -> AstNode:
        self.expect("if")
        self.expect("(")
        cond = self._expr()
        self.expect(")")
        then = self._statement() or AstNode(NodeKind.SeqBlock)
        children = [cond, then]
        if self.at("else"):
            self.take()
            otherwise = self._statement() or AstNode(NodeKind.SeqBlock)
            children.append(otherwise)
        return AstNode(NodeKind.IfStmt, children=tuple(children))

    def _case_stmt(self) -> AstNode:
        flavor = self.take().text
        self.expect("(")
        subject = self._expr()
        self.expect(")")
        items = []
        while not self.at("endcase"):
            if self.cur() is _EOF:
                raise ParseError("unterminated case statement", self.tokens[-1].line)
            items.append(self._case_item())
        self.expect("endcase")
        return AstNode(NodeKind.CaseStmt, children=(subject, *items), qualifier=flavor)

    def _case_item(self) -> AstNode:
        if self.at("default"):
            self.take()
            if self.at(":"):
                self.take()
            body = self._statement() or AstNode(NodeKind.SeqBlock)
            return AstNode(NodeKind.CaseItem, label="default", children=(body,))
        labels = [self._expr()]
        while self.at(","):
            self.take()
            labels.append(self._expr())
        self.expect(":")
        body = self._statement() or AstNode(NodeKind.SeqBlock)
        return AstNode(NodeKind.CaseItem, children=(*labels, body))

    def _assignment(self) -> AstNode:
        lhs = self._lvalue()
        tok = self.cur()
        if tok.text == "=":
            kind = NodeKind.BlockingAssign
        elif tok.text == "<=":
            kind = NodeKind.NonblockingAssign
        else:
            raise ParseError(f"expected assignment operator, got {tok.text!r}", tok.line)
        self.take()
        if self.at("#") or self.at("@"):
            raise ParseUnsupported("intra-assignment timing control", self.cur().line)
        rhs = self._expr()
        self.expect(";")
        return AstNode(kind, children=(lhs, rhs))

    def _lvalue(self) -> AstNode:
        if self.at("{"):
            self.take()
            parts = [self._lvalue()]
            while self.at(","):
                self.take()
                parts.append(self._lvalue())
            self.expect("}")
            return AstNode(NodeKind.Concat, children=tuple(parts))
        name = self.expect_ident()
        node = AstNode(NodeKind.IdentRef, label=name.text)
        return self._select_suffix(node)

    # -- instances --

    def _instance(self) -> AstNode:
        module_name = self.expect_ident().text
        params: list[AstNode] = []
        if self.at("#"):
            self.take()
            self.expect("(")
            params = self._override_list()
            self.expect(")")
        inst_name = self.expect_ident().text
        if self.at("["):
            raise ParseUnsupported("instance array", self.cur().line)
        self.expect("(")
        conns = self._connection_list()
        self.expect(")")
        self.expect(";")
        return AstNode(NodeKind.Instance, label=module_name,
                       children=tuple(params + conns), qualifier=inst_name)

    def _override_list(self) -> list[AstNode]:
        overrides = []
        while not self.at(")"):
            if self.at("."):
                self.take()
                name = self.expect_ident().text
                self.expect("(")
                value: tuple[AstNode, ...] = ()
                if not self.at(")"):
                    value = (self._expr(),)
                self.expect(")")
                overrides.append(AstNode(NodeKind.ParamDecl, label=name, children=value,
                                         qualifier="override"))
            else:
                overrides.append(AstNode(NodeKind.ParamDecl, children=(self._expr(),),
                                         qualifier="override"))
            if self.at(","):
                self.take()
        return overrides

    def _connection_list(self) -> list[AstNode]:
        conns: list[AstNode] = []
        if self.at(")"):
            return conns
        while True:
            if self.at("."):
                self.take()
                name = self.expect_ident().text
                self.expect("(")
                expr: tuple[AstNode, ...] = ()
                if not self.at(")"):
                    expr = (self._expr(),)
                self.expect(")")
                conns.append(AstNode(NodeKind.PortConn, label=name, children=expr))
            else:
                conns.append(AstNode(NodeKind.PortConn, children=(self._expr(),)))
            if self.at(","):
                self.take()
                continue
            break
        return conns

    # -- expressions --

    def _expr(self) -> AstNode:
        return self._ternary()

    def _ternary(self) -> AstNode:
        cond = self._binary(0)
        if self.at("?"):
            self.take()
            then = self._expr()
            self.expect(":")
            otherwise = self._expr()
            return AstNode(NodeKind.TernaryOp, label="?:",
                           children=(cond, then, otherwise))
        return cond

    def _binary(self, tier: int) -> AstNode:
        if tier >= len(_BINARY_TIERS):
            return self._unary()
        ops = _BINARY_TIERS[tier]
        node = self._binary(tier + 1)
        while self.cur().text in ops:
            op = self.take().text
            rhs = self._binary(tier + 1)
            node = AstNode(NodeKind.BinaryOp, label=op, children=(node, rhs))
        return node

    def _unary(self) -> AstNode:
        tok = self.cur()
        if tok.kind is TokenKind.Operator and tok.text in _UNARY_OPS:
            self.take()
            operand = self._unary()
            return AstNode(NodeKind.UnaryOp, label=tok.text, children=(operand,))
        return self._primary()

    def _primary(self) -> AstNode:
        # Macro usages (`NAME) are opaque identifier references here, so
        # macro-parameterized widths degrade to symbolic instead of failing.
        self.reject_unsupported(directives=False)
        tok = self.cur()

        if tok.kind is TokenKind.Number:
            self.take()
            node = AstNode(NodeKind.NumberLit, label=tok.text)
            # "4 'b0101": a sized literal split by whitespace re-joins here.
            nxt = self.cur()
            if (nxt.kind is TokenKind.Number and nxt.text.startswith("'")
                    and not tok.text.startswith("'") and "'" not in tok.text):
                self.take()
                node = AstNode(NodeKind.NumberLit, label=tok.text + nxt.text)
            return node

        if tok.kind is TokenKind.Identifier:
            if tok.text.startswith("$"):
                raise ParseUnsupported(f"system function {tok.text!r}", tok.line)
            self.take()
            if self.at("("):
                raise ParseUnsupported(f"function call {tok.text!r}", tok.line)
            node = AstNode(NodeKind.IdentRef, label=tok.text)
            return self._select_suffix(node)

        if tok.text == "(":
            self.take()
            node = self._expr()
            self.expect(")")
            return node

        if tok.text == "{":
            return self._concat_or_replicate()

        if tok.kind is TokenKind.StringLiteral:
            raise ParseUnsupported("string literal in expression", tok.line)
        raise ParseError(f"unexpected {tok.text!r} in expression", tok.line)

    def _concat_or_replicate(self) -> AstNode:
        self.expect("{")
        first = self._expr()
        if self.at("{"):
            inner = self._concat_or_replicate()
            self.expect("}")
            return AstNode(NodeKind.Replicate, children=(first, inner))
        parts = [first]
        while self.at(","):
            self.take()
            parts.append(self._expr())
        self.expect("}")
        return AstNode(NodeKind.Concat, children=tuple(parts))

    def _select_suffix(self, node: AstNode) -> AstNode:
        while self.at("["):
            self.take()
            first = self._expr()
            if self.cur().text in (":", "+:", "-:"):
                sep = self.take().text
                second = self._expr()
                self.expect("]")
                node = AstNode(NodeKind.PartSelect, children=(node, first, second),
                               qualifier=sep)
            else:
                self.expect("]")
                node = AstNode(NodeKind.BitSelect, children=(node, first))
        return node


def parse_module(tokens: list[Token]) -> AstNode:
    """Parse a token stream holding exactly one module into a Module root."""
    if not tokens:
        raise ParseError("empty input", 1)
    return _Parser(tokens).parse_module()


def parse_source(source: str) -> AstNode:
    return parse_module(lex(source))
