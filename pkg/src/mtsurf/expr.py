"""Scalar expression language evaluated over the jet algebra.

Grammar (whitespace insensitive)::

    expr   := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
            | expr '^' int-expr | NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Precedence is ``^`` > unary minus > ``* /`` > ``+ -``; ``^`` associates to
the right, everything else to the left.  Exponents must be integers and
may only involve literals and bound parameters.
"""
import re
from dataclasses import dataclass

from . import jet as _jet
from .jet import Jet

FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh", "tan", "atan", "sqrt", "abs")


class ExprSyntaxError(SyntaxError):
    """Malformed expression; ``offset`` is the 0-based byte offset of the fault."""

    def __init__(self, msg, source="", offset=0):
        super().__init__(f"{msg} (at offset {offset})")
        self.msg = msg
        self.source = source
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    pass


class NonIntegerExponent(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    pass


# -- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_NEG_RBP = 25


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int


def _tokenize(src):
    toks = []
    pos = 0
    n = len(src)
    while True:
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            rest = src[pos:]
            stripped = rest.lstrip()
            if not stripped:
                toks.append(_Tok("end", "", n))
                return toks
            bad = n - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", src, bad)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(msg, self.src, tok.pos)

    def lbp(self, tok):
        if tok.kind == "op" and tok.text in _PREC:
            return _PREC[tok.text]
        return 0

    def parse(self):
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expression(0)
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expression(self, rbp):
        left = self.nud(self.advance())
        while rbp < self.lbp(self.tok):
            left = self.led(self.advance(), left)
        return left

    def nud(self, t):
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "name":
            if t.text in FUNCTIONS:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    raise self.error(f"function {t.text!r} needs an argument list")
                self.advance()
                if self.tok.kind == "op" and self.tok.text == ")":
                    raise self.error(f"function {t.text!r} needs an argument")
                arg = self.expression(0)
                self.expect(")")
                return Call(t.text, arg)
            if self.tok.kind == "op" and self.tok.text == "(":
                raise self.error(f"unknown function {t.text!r}", t, UnknownIdentifier)
            return Name(t.text)
        if t.kind == "op" and t.text == "-":
            return Neg(self.expression(_NEG_RBP))
        if t.kind == "op" and t.text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if t.kind == "end":
            raise self.error("unexpected end of expression", t)
        raise self.error(f"unexpected {t.text!r}", t)

    def led(self, t, left):
        op = t.text
        if op == "^":
            right = self.expression(_PREC["^"] - 1)
            _check_exponent(right, self.src, t.pos + 1)
            return BinOp("^", left, right)
        return BinOp(op, left, self.expression(_PREC[op]))

    def expect(self, text):
        if not (self.tok.kind == "op" and self.tok.text == text):
            raise self.error(f"expected {text!r}")
        self.advance()


def _check_exponent(node, src, pos):
    if _names(node):
        # parameters are allowed; their integrality is checked at evaluation
        return
    val = _const_value(node)
    if val != int(val):
        raise NonIntegerExponent(f"non-integer exponent {val!r}", src, pos)


def _const_value(node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        return -_const_value(node.operand)
    if isinstance(node, BinOp):
        a, b = _const_value(node.left), _const_value(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a ** int(b)
    raise TypeError("not a constant")


def _names(node):
    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return _names(node.operand)
    if isinstance(node, Call):
        return _names(node.arg) | {"#call"}
    return _names(node.left) | _names(node.right)


# -- printing ------------------------------------------------------------------


def to_source(node):
    """Render an AST so that parsing the text yields the same AST."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = node.operand
        text = to_source(inner)
        if isinstance(inner, BinOp) and inner.op != "^" or isinstance(inner, Neg):
            text = f"({text})"
        return "-" + text
    p = _PREC[node.op]
    lt, rt = to_source(node.left), to_source(node.right)
    if node.op == "^":
        if isinstance(node.left, (BinOp, Neg)):
            lt = f"({lt})"
        if isinstance(node.right, BinOp) and node.right.op != "^":
            rt = f"({rt})"
    else:
        if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
            lt = f"({lt})"
        if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
            rt = f"({rt})"
        if isinstance(node.right, Neg):
            rt = f"({rt})"
        if isinstance(node.left, Neg) and p > _PREC["+"]:
            lt = f"({lt})"
    return f"{lt} {node.op} {rt}" if p == 10 else f"{lt}{node.op}{rt}"


# -- evaluation -------------------------------------------------------------------


def _apply(func, x):
    if func == "ln":
        return x.log()
    if func == "abs":
        try:
            return x.abs()
        except _jet.JetError as exc:
            raise EvaluationError(str(exc)) from exc
    return getattr(x, func)()


def _compile(node):
    if isinstance(node, Num):
        v = node.value
        return lambda env: v
    if isinstance(node, Name):
        key = node.id
        return lambda env: env[key]
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda env: -f(env)
    if isinstance(node, Call):
        f = _compile(node.arg)
        func = node.func

        def call(env):
            x = f(env)
            if not isinstance(x, Jet):
                x = env["#const"](x)
            return _apply(func, x)

        return call
    lf, rf = _compile(node.left), _compile(node.right)
    op = node.op
    if op == "+":
        return lambda env: lf(env) + rf(env)
    if op == "-":
        return lambda env: lf(env) - rf(env)
    if op == "*":
        return lambda env: lf(env) * rf(env)
    if op == "/":

        def div(env):
            a, b = lf(env), rf(env)
            if not isinstance(b, Jet) and b == 0:
                raise _jet.DivisionByZeroJet("division by zero")
            return a / b

        return div

    def power(env):
        base, k = lf(env), rf(env)
        if isinstance(k, Jet):
            raise NonIntegerExponent("exponent depends on a variable")
        if k != int(k):
            raise NonIntegerExponent(f"non-integer exponent {k!r}")
        return base ** int(k)

    return power


class Expr:
    """A parsed, validated expression with a compiled evaluator."""

    def __init__(self, ast, source=None, variables=(), params=()):
        self.ast = ast
        self.source = source if source is not None else to_source(ast)
        self.variables = tuple(variables)
        self.params = tuple(params)
        self._fn = _compile(ast)

    def __repr__(self):
        return f"Expr({self.source!r})"

    def __str__(self):
        return to_source(self.ast)

    def __eq__(self, other):
        return isinstance(other, Expr) and self.ast == other.ast

    def __hash__(self):
        return hash(self.ast)

    @property
    def names(self):
        return _names(self.ast) - {"#call"}

    def eval_jet(self, bindings, params=None):
        """Jet of the expression for variables bound to jets with a common base/order."""
        params = dict(params or {})
        env = {}
        ref = None
        for k, v in bindings.items():
            if isinstance(v, Jet):
                if ref is None:
                    ref = v
                elif v.order != ref.order or v.base != ref.base:
                    raise _jet.OrderMismatch(f"binding {k!r} has a different base or order")
            env[k] = v
        for k, v in params.items():
            if isinstance(v, complex):
                raise TypeError(f"parameter {k!r} must be real")
            env[k] = float(v)
        missing = self.names - set(env)
        if missing:
            raise UnknownIdentifier(f"unbound identifier(s) {sorted(missing)}", self.source, 0)
        order = ref.order if ref is not None else 0
        base = ref.base if ref is not None else (0.0, 0.0)
        env["#const"] = lambda x: Jet.constant(x, order, base)
        out = self._fn(env)
        if not isinstance(out, Jet):
            out = Jet.constant(out, order, base)
        return out

    def __call__(self, params=None, **values):
        """Plain evaluation through order-0 jets."""
        bindings = {k: Jet.constant(v, 0) for k, v in values.items()}
        return self.eval_jet(bindings, params).value


def parse(source, variables=None, params=None):
    """Parse ``source``; when ``variables``/``params`` are given, free names are rejected."""
    if not isinstance(source, str):
        raise TypeError("expression source must be a string")
    ast = _Parser(source).parse()
    if variables is not None or params is not None:
        declared = set(variables or ()) | set(params or ())
        for name in sorted(_names(ast) - {"#call"}):
            if name not in declared:
                pos = _find_name(source, name)
                raise UnknownIdentifier(f"unknown identifier {name!r}", source, pos)
        bad = _variable_exponent(ast, set(variables or ()))
        if bad:
            raise NonIntegerExponent(f"exponent depends on variable {bad!r}", source, _find_name(source, bad))
    return Expr(ast, source, variables or (), params or ())


def _variable_exponent(node, variables):
    if isinstance(node, BinOp):
        if node.op == "^":
            hit = sorted(_names(node.right) & variables)
            if hit:
                return hit[0]
        return _variable_exponent(node.left, variables) or _variable_exponent(node.right, variables)
    if isinstance(node, Neg):
        return _variable_exponent(node.operand, variables)
    if isinstance(node, Call):
        return _variable_exponent(node.arg, variables)
    return None


def _find_name(source, name):
    m = re.search(rf"(?<![A-Za-z_0-9]){re.escape(name)}(?![A-Za-z_0-9])", source)
    return m.start() if m else 0


def eval_jet(e, bindings, params=None):
    return e.eval_jet(bindings, params)
