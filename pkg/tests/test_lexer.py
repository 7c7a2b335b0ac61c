import pytest
from hypothesis import given
from hypothesis import strategies as st

from tbforge.errors import LexError
from tbforge.frontend import Token, TokenKind, lex
from tbforge.frontend.tokens import render_tokens

from fixture_data import AUDIO_ENCODER_DUT, TESTBENCH_SKELETON


def kinds_texts(tokens):
    return [(t.kind, t.text) for t in tokens]


def test_simple_assign():
    tokens = lex("assign y = a & b;")
    assert kinds_texts(tokens) == [
        (TokenKind.Keyword, "assign"),
        (TokenKind.Identifier, "y"),
        (TokenKind.Operator, "="),
        (TokenKind.Identifier, "a"),
        (TokenKind.Operator, "&"),
        (TokenKind.Identifier, "b"),
        (TokenKind.Punctuation, ";"),
    ]


def test_empty_input():
    assert lex("") == []


def test_sized_literal_is_single_token():
    tokens = lex("2'b01")
    assert len(tokens) == 1
    assert tokens[0] == Token(TokenKind.Number, "2'b01", 1)


# Golden token fixtures over snippets drawn from the DUT/testbench corpus.
GOLDEN = [
    ("wire w;", ["wire", "w", ";"]),
    ("reg [4:0] shift_count;", ["reg", "[", "4", ":", "0", "]", "shift_count", ";"]),
    ("assign i_ready = ~is_valid_shift;",
     ["assign", "i_ready", "=", "~", "is_valid_shift", ";"]),
    ("always @(posedge clk or posedge reset)",
     ["always", "@", "(", "posedge", "clk", "or", "posedge", "reset", ")"]),
    ("shift_count <= shift_count - 1'b1;",
     ["shift_count", "<=", "shift_count", "-", "1'b1", ";"]),
    ("is_valid_shift <= shift_count != 0;",
     ["is_valid_shift", "<=", "shift_count", "!=", "0", ";"]),
    ("shift <= shift << 1;", ["shift", "<=", "shift", "<<", "1", ";"]),
    ("reg_sdata <= 2'b00;", ["reg_sdata", "<=", "2'b00", ";"]),
    ("localparam width = 16;", ["localparam", "width", "=", "16", ";"]),
    ("serial_audio_encoder #(width) uut (",
     ["serial_audio_encoder", "#", "(", "width", ")", "uut", "("]),
    (".audio_in(audio_in),", [".", "audio_in", "(", "audio_in", ")", ","]),
    ("if (reset) begin", ["if", "(", "reset", ")", "begin"]),
    ("end else begin", ["end", "else", "begin"]),
    ("x = 8'hFF;", ["x", "=", "8'hFF", ";"]),
    ("y = 'd255;", ["y", "=", "'d255", ";"]),
    ("z = 16'hDEAD_BEEF;", ["z", "=", "16'hDEAD_BEEF", ";"]),
    ("q <= d;", ["q", "<=", "d", ";"]),
    ("assign y = sel ? a : b;", ["assign", "y", "=", "sel", "?", "a", ":", "b", ";"]),
    ("assign o = {a, b[3:0]};",
     ["assign", "o", "=", "{", "a", ",", "b", "[", "3", ":", "0", "]", "}", ";"]),
    ("assign p = in[7 -: 4];", ["assign", "p", "=", "in", "[", "7", "-:", "4", "]", ";"]),
]


@pytest.mark.parametrize("source,expected", GOLDEN)
def test_golden_tokens(source, expected):
    assert [t.text for t in lex(source)] == expected


def test_comments_and_whitespace_produce_no_tokens():
    source = "// line comment\n  /* block\n comment */ \t\n"
    assert lex(source) == []


def test_comment_between_tokens():
    tokens = lex("assign /* x */ y = 1; // done")
    assert [t.text for t in tokens] == ["assign", "y", "=", "1", ";"]


def test_line_numbers():
    tokens = lex("module m;\n\nassign y = 1;\nendmodule\n")
    lines = {t.text: t.line for t in tokens}
    assert lines["module"] == 1
    assert lines["assign"] == 3
    assert lines["endmodule"] == 4


def test_attributes_discarded():
    tokens = lex("(* keep = 1 *) wire w;")
    assert [t.text for t in tokens] == ["wire", "w", ";"]


def test_escaped_identifier_discarded():
    tokens = lex("wire \\weird$name ;")
    assert [t.text for t in tokens] == ["wire", ";"]


def test_event_star_is_not_attribute():
    tokens = lex("always @(*) x = y;")
    assert "(" in [t.text for t in tokens]
    assert "*" in [t.text for t in tokens]


def test_string_literal():
    tokens = lex('x = "hello world";')
    assert (TokenKind.StringLiteral, '"hello world"') in kinds_texts(tokens)


def test_unterminated_string_raises():
    with pytest.raises(LexError) as exc:
        lex('x = "oops\n;')
    assert exc.value.line == 1


def test_illegal_character_raises():
    with pytest.raises(LexError):
        lex("wire w \x01;")


def test_system_identifier_single_token():
    tokens = lex("$display($time);")
    assert [t.text for t in tokens] == ["$display", "(", "$time", ")", ";"]
    assert tokens[0].kind is TokenKind.Identifier


def _roundtrip(source):
    tokens = lex(source)
    relexed = lex(render_tokens(tokens))
    assert kinds_texts(relexed) == kinds_texts(tokens)


@pytest.mark.parametrize("source", [s for s, _ in GOLDEN])
def test_roundtrip_golden(source):
    _roundtrip(source)


@pytest.mark.parametrize("source", [AUDIO_ENCODER_DUT, TESTBENCH_SKELETON])
def test_roundtrip_fixture_modules(source):
    _roundtrip(source)


_ident = st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True)
_number = st.one_of(
    st.integers(min_value=0, max_value=10**6).map(str),
    st.builds(lambda w, b, d: f"{w}'{b}{d}",
              st.integers(min_value=1, max_value=64),
              st.sampled_from(["b", "h", "d", "o"]),
              st.integers(min_value=0, max_value=7).map(str)),
)
_piece = st.one_of(
    _ident, _number,
    st.sampled_from(["assign", "wire", "reg", "module", "endmodule", "begin", "end",
                     "<=", ">=", "==", "+", "-", "&", "|", "^", "(", ")", "[", "]",
                     "{", "}", ";", ",", ":", "?", "<<", ">>"]),
)


@given(st.lists(_piece, max_size=40))
def test_roundtrip_random_token_soup(pieces):
    source = " ".join(pieces)
    _roundtrip(source)
