"""Verilog-subset frontend: lexer, parser, interface and dataflow extraction."""

from tbforge.frontend.tokens import Token, TokenKind, lex
from tbforge.frontend.ast_nodes import AstNode, NodeKind, node_to_text
from tbforge.frontend.parser import parse_module, parse_source
from tbforge.frontend.interface import ModuleInterface, Parameter, Port, extract_interface
from tbforge.frontend.dfg import Dfg, extract_dfg

__all__ = [
    "Token",
    "TokenKind",
    "lex",
    "AstNode",
    "NodeKind",
    "node_to_text",
    "parse_module",
    "parse_source",
    "ModuleInterface",
    "Port",
    "Parameter",
    "extract_interface",
    "Dfg",
    "extract_dfg",
]
