"""Coefficient fields, problem specifications and hypothesis validation.

Fields (weights, exponents, the boundary coefficient) are given as textual
arithmetic expressions in the spatial variables x and y.  Parsing produces an
immutable AST; evaluation is vectorized over numpy arrays and turns every
non-finite intermediate (log or sqrt of a negative argument, division by
zero, invalid powers) into a reported error carrying the offending point.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import FieldEvalError, FieldParseError, SpecValidationError
from .geometry import (
    build_rect_mesh,
    edge_quad_points,
    edge_quadrature,
    triangle_quadrature,
    volume_quad_points,
)

# Default quadrature degrees used throughout the package: the integrands
# |u|^{p(x)} are non-polynomial, so fixed higher-order rules keep the
# modular evaluation error dominated by the O(h^2) interpolation error.
VOLUME_QUAD_DEGREE = 4
EDGE_QUAD_DEGREE = 3

_UNARY_FUNCS = ("exp", "log", "abs", "sqrt", "sin", "cos")
_BINARY_FUNCS = ("min", "max")


# ---------------------------------------------------------------------------
# expression AST

@dataclass(frozen=True)
class _Num:
    value: float


@dataclass(frozen=True)
class _Var:
    name: str


@dataclass(frozen=True)
class _Neg:
    arg: object


@dataclass(frozen=True)
class _Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class _Call:
    fn: str
    args: tuple


class FieldExpr:
    """Parsed scalar field over the plane.

    Use :func:`parse_field` to construct one.  ``__call__`` evaluates on
    numpy arrays of coordinates; scalar evaluation goes through
    :func:`eval_field`.
    """

    def __init__(self, root, source):
        self._root = root
        self.source = source

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = _eval(self._root, x, y)
        out = np.broadcast_to(out, np.broadcast_shapes(x.shape, y.shape)).copy()
        bad = ~np.isfinite(out)
        if np.any(bad):
            raise FieldEvalError(
                f"non-finite value of '{self.source}'", _witness(bad, x, y)
            )
        return out

    def to_string(self):
        """Fully parenthesized form that re-parses to the same expression."""
        return _fmt(self._root)

    def __repr__(self):
        return f"FieldExpr({self.source!r})"


def _witness(mask, x, y):
    idx = np.argmax(mask)
    xb = np.broadcast_to(x, mask.shape)
    yb = np.broadcast_to(y, mask.shape)
    return (xb.flat[idx], yb.flat[idx])


def _eval(node, x, y):
    if isinstance(node, _Num):
        return np.asarray(node.value)
    if isinstance(node, _Var):
        return x if node.name == "x" else y
    if isinstance(node, _Neg):
        return -_eval(node.arg, x, y)
    if isinstance(node, _Bin):
        a = _eval(node.left, x, y)
        b = _eval(node.right, x, y)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            zero = b == 0
            if np.any(zero):
                raise FieldEvalError("division by zero", _witness(zero, x, y))
            return a / b
        # power: reject anything that does not produce a finite real
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            r = np.asarray(np.power(a, b), dtype=float)
        bad = ~np.isfinite(r)
        if np.any(bad):
            raise FieldEvalError("invalid power", _witness(bad, x, y))
        return r
    a = _eval(node.args[0], x, y)
    fn = node.fn
    if fn == "exp":
        with np.errstate(over="ignore"):
            r = np.exp(a)
        bad = ~np.isfinite(r)
        if np.any(bad):
            raise FieldEvalError("overflow in exp", _witness(bad, x, y))
        return r
    if fn == "log":
        bad = a <= 0
        if np.any(bad):
            raise FieldEvalError("log of a non-positive value", _witness(bad, x, y))
        return np.log(a)
    if fn == "sqrt":
        bad = a < 0
        if np.any(bad):
            raise FieldEvalError("sqrt of a negative value", _witness(bad, x, y))
        return np.sqrt(a)
    if fn == "abs":
        return np.abs(a)
    if fn == "sin":
        return np.sin(a)
    if fn == "cos":
        return np.cos(a)
    b = _eval(node.args[1], x, y)
    if fn == "min":
        return np.minimum(a, b)
    return np.maximum(a, b)


def _fmt(node):
    if isinstance(node, _Num):
        return repr(node.value)
    if isinstance(node, _Var):
        return node.name
    if isinstance(node, _Neg):
        return f"(-{_fmt(node.arg)})"
    if isinstance(node, _Bin):
        return f"({_fmt(node.left)} {node.op} {_fmt(node.right)})"
    return f"{node.fn}({', '.join(_fmt(a) for a in node.args)})"


# ---------------------------------------------------------------------------
# recursive-descent parser

class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _scan(self):
        text, n = self.text, len(self.text)
        pos = 0
        while pos < n:
            ch = text[pos]
            if ch.isspace():
                pos += 1
                continue
            col = pos + 1
            if ch.isdigit() or (ch == "." and pos + 1 < n and text[pos + 1].isdigit()):
                j = pos
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                try:
                    value = float(text[pos:j])
                except ValueError:
                    raise FieldParseError(f"malformed number '{text[pos:j]}'", col)
                self.tokens.append(("num", value, col))
                pos = j
            elif ch.isalpha() or ch == "_":
                j = pos
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("ident", text[pos:j], col))
                pos = j
            elif ch in "+-*/^(),":
                self.tokens.append((ch, ch, col))
                pos += 1
            else:
                raise FieldParseError(f"unexpected character '{ch}'", col)
        self.tokens.append(("end", None, n + 1))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


class _Parser:
    """Precedence: ^ (right-assoc), unary -, then * /, then + -."""

    def __init__(self, text):
        self.tk = _Tokenizer(text)

    def parse(self):
        node = self._expr()
        kind, _, col = self.tk.peek()
        if kind != "end":
            raise FieldParseError("unexpected trailing input", col)
        return node

    def _expr(self):
        node = self._term()
        while self.tk.peek()[0] in ("+", "-"):
            op = self.tk.next()[0]
            node = _Bin(op, node, self._term())
        return node

    def _term(self):
        node = self._factor()
        while self.tk.peek()[0] in ("*", "/"):
            op = self.tk.next()[0]
            node = _Bin(op, node, self._factor())
        return node

    def _factor(self):
        if self.tk.peek()[0] == "-":
            self.tk.next()
            return _Neg(self._factor())
        return self._power()

    def _power(self):
        node = self._atom()
        if self.tk.peek()[0] == "^":
            self.tk.next()
            node = _Bin("^", node, self._factor())
        return node

    def _atom(self):
        kind, value, col = self.tk.next()
        if kind == "num":
            return _Num(value)
        if kind == "(":
            node = self._expr()
            k, _, c = self.tk.next()
            if k != ")":
                raise FieldParseError("expected ')'", c)
            return node
        if kind == "ident":
            if self.tk.peek()[0] == "(":
                return self._call(value, col)
            if value in ("x", "y"):
                return _Var(value)
            raise FieldParseError(f"unknown identifier '{value}'", col)
        raise FieldParseError(f"unexpected token '{value}'", col)

    def _call(self, fn, col):
        if fn not in _UNARY_FUNCS and fn not in _BINARY_FUNCS:
            raise FieldParseError(f"unknown function '{fn}'", col)
        self.tk.next()  # consume '('
        args = [self._expr()]
        while self.tk.peek()[0] == ",":
            self.tk.next()
            args.append(self._expr())
        k, _, c = self.tk.next()
        if k != ")":
            raise FieldParseError("expected ')'", c)
        want = 1 if fn in _UNARY_FUNCS else 2
        if len(args) != want:
            raise FieldParseError(f"'{fn}' takes {want} argument(s), got {len(args)}", col)
        return _Call(fn, tuple(args))


def parse_field(text):
    """Parse an arithmetic expression in x and y into a :class:`FieldExpr`."""
    if not isinstance(text, str):
        raise FieldParseError("expression must be a string", 1)
    return FieldExpr(_Parser(text).parse(), text)


def eval_field(f, point):
    """Evaluate a field at one (x, y) point; domain errors carry the point."""
    x, y = point
    return float(f(np.asarray([float(x)]), np.asarray([float(y)]))[0])


# ---------------------------------------------------------------------------
# problem specification

@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Full instance of the weighted Robin eigenvalue problem.

    ``a`` and ``b`` are the volume weights on the gradient and source terms,
    ``p`` and ``q`` the exponent fields, ``beta`` the boundary coefficient
    and ``lam`` the eigenvalue parameter.  ``grad_eps`` regularizes the
    gradient integrand |g|^(p-2) g as (|g|^2 + eps^2)^((p-2)/2) g; it defaults
    to 0 when inf p >= 2 and to 1e-10 otherwise (a defined descent direction
    requires eps > 0 once p drops below 2).
    """

    x0: float
    y0: float
    x1: float
    y1: float
    nx: int
    ny: int
    a: FieldExpr
    b: FieldExpr
    p: FieldExpr
    q: FieldExpr
    beta: FieldExpr
    lam: float
    grad_eps: float = None

    def with_resolution(self, nx, ny):
        return ProblemSpec(
            self.x0, self.y0, self.x1, self.y1, int(nx), int(ny),
            self.a, self.b, self.p, self.q, self.beta, self.lam, self.grad_eps,
        )

    def with_lambda(self, lam):
        return ProblemSpec(
            self.x0, self.y0, self.x1, self.y1, self.nx, self.ny,
            self.a, self.b, self.p, self.q, self.beta, float(lam), self.grad_eps,
        )

    def to_config(self):
        """Round-trippable plain-dict form (the JSON config schema)."""
        cfg = {
            "domain": {
                "x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1,
                "nx": self.nx, "ny": self.ny,
            },
            "fields": {
                "a": self.a.source, "b": self.b.source, "p": self.p.source,
                "q": self.q.source, "beta": self.beta.source,
            },
            "lambda": self.lam,
        }
        if self.grad_eps is not None:
            cfg["grad_eps"] = self.grad_eps
        return cfg


def make_spec(a, b, p, q, beta, lam, x0=0.0, y0=0.0, x1=1.0, y1=1.0,
              nx=16, ny=16, grad_eps=None):
    """Build a :class:`ProblemSpec` from expression strings."""
    return ProblemSpec(
        float(x0), float(y0), float(x1), float(y1), int(nx), int(ny),
        parse_field(a), parse_field(b), parse_field(p), parse_field(q),
        parse_field(beta), float(lam), grad_eps,
    )


def spec_from_dict(doc):
    """Ingest the JSON configuration schema; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ValueError("problem spec must be a JSON object")
    allowed = {"domain", "fields", "lambda", "grad_eps"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown spec key(s): {sorted(unknown)}")
    for key in ("domain", "fields", "lambda"):
        if key not in doc:
            raise ValueError(f"missing spec key '{key}'")
    dom = doc["domain"]
    dom_keys = {"x0", "y0", "x1", "y1", "nx", "ny"}
    if set(dom) != dom_keys:
        raise ValueError(f"domain must have exactly the keys {sorted(dom_keys)}")
    flds = doc["fields"]
    fld_keys = {"a", "b", "p", "q", "beta"}
    if set(flds) != fld_keys:
        raise ValueError(f"fields must have exactly the keys {sorted(fld_keys)}")
    lam = doc["lambda"]
    if not isinstance(lam, (int, float)) or isinstance(lam, bool):
        raise ValueError("lambda must be a number")
    eps = doc.get("grad_eps")
    if eps is not None and (not isinstance(eps, (int, float)) or isinstance(eps, bool)):
        raise ValueError("grad_eps must be a number")
    return make_spec(
        flds["a"], flds["b"], flds["p"], flds["q"], flds["beta"], lam,
        dom["x0"], dom["y0"], dom["x1"], dom["y1"], dom["nx"], dom["ny"],
        None if eps is None else float(eps),
    )


def spec_from_json(text):
    return spec_from_dict(json.loads(text))


def spec_mesh(spec):
    """The structured mesh of the spec's domain at its resolution."""
    return build_rect_mesh(spec.x0, spec.y0, spec.x1, spec.y1, spec.nx, spec.ny)


# ---------------------------------------------------------------------------
# exponent bounds and regime classification

def _sample_points(mesh):
    """Volume quadrature points, boundary quadrature points and vertices."""
    vq = volume_quad_points(mesh, triangle_quadrature(VOLUME_QUAD_DEGREE))
    eq = edge_quad_points(mesh, edge_quadrature(EDGE_QUAD_DEGREE))
    pts = np.vstack([vq.reshape(-1, 2), eq.reshape(-1, 2), mesh.vertices])
    return pts[:, 0], pts[:, 1]


def exponent_bounds(f, mesh):
    """Extrema of a field over all quadrature points and mesh vertices.

    This finite proxy for the continuous inf/sup is exactly the range seen
    by the discrete modulars, and converges under refinement for continuous
    fields.
    """
    x, y = _sample_points(mesh)
    vals = f(x, y)
    return float(np.min(vals)), float(np.max(vals))


@dataclass(frozen=True)
class RegimeReport:
    """Computed exponent bounds and hypothesis-regime classification."""

    p_minus: float
    p_plus: float
    q_minus: float
    q_plus: float
    regime: str
    eta_interval: tuple
    unchecked: tuple = (
        "continuum embedding admissibility conditions on (p, q, a, b): "
        "not checked (out of scope)",
    )

    def to_dict(self):
        return {
            "p_minus": self.p_minus,
            "p_plus": self.p_plus,
            "q_minus": self.q_minus,
            "q_plus": self.q_plus,
            "regime": self.regime,
            "eta_interval": list(self.eta_interval) if self.eta_interval else None,
            "unchecked": list(self.unchecked),
        }


@dataclass(frozen=True)
class Violation:
    """One failed standing hypothesis with a witnessing point."""

    hypothesis: str
    point: tuple
    value: float

    def describe(self):
        x, y = self.point
        return f"{self.hypothesis}; witness ({x:.6g}, {y:.6g}) -> {self.value:.6g}"


def _classify(p_minus, p_plus, q_minus, q_plus):
    if p_plus < q_minus:
        return "Superlinear"
    if q_minus < p_minus < q_plus < p_plus:
        return "Sublinear"
    return "Other"


def validate_spec(spec, mesh=None):
    """Check the standing hypotheses of the problem data.

    Returns a :class:`RegimeReport` when every hypothesis holds at every
    sampled point, otherwise the list of :class:`Violation` diagnostics.
    Checked: inf p > 1 and inf q > 1 over all sample points, a > 0 and
    b > 0 at volume quadrature points, beta > 0 at boundary quadrature
    points, lambda > 0.
    """
    mesh = mesh if mesh is not None else spec_mesh(spec)
    violations = []

    vq = volume_quad_points(mesh, triangle_quadrature(VOLUME_QUAD_DEGREE)).reshape(-1, 2)
    eq = edge_quad_points(mesh, edge_quadrature(EDGE_QUAD_DEGREE)).reshape(-1, 2)
    xs, ys = _sample_points(mesh)

    def field_min(f, x, y, label):
        try:
            vals = f(x, y)
        except FieldEvalError as err:
            violations.append(Violation(f"{label} evaluation failed: {err}", err.point, np.nan))
            return None
        i = int(np.argmin(vals))
        return float(vals[i]), (float(x[i]), float(y[i]))

    got = field_min(spec.p, xs, ys, "p")
    p_bounds = None
    if got is not None:
        pmin, pw = got
        p_bounds = (pmin, float(np.max(spec.p(xs, ys))))
        if pmin <= 1.0:
            violations.append(Violation("exponent membership: inf p(x) > 1 fails", pw, pmin))

    got = field_min(spec.q, xs, ys, "q")
    q_bounds = None
    if got is not None:
        qmin, qw = got
        q_bounds = (qmin, float(np.max(spec.q(xs, ys))))
        if qmin <= 1.0:
            violations.append(Violation("exponent membership: inf q(x) > 1 fails", qw, qmin))

    for name, f in (("a", spec.a), ("b", spec.b)):
        got = field_min(f, vq[:, 0], vq[:, 1], name)
        if got is not None:
            vmin, w = got
            if vmin <= 0.0:
                violations.append(
                    Violation(f"weight positivity: {name}(x) > 0 fails at a quadrature point", w, vmin)
                )

    got = field_min(spec.beta, eq[:, 0], eq[:, 1], "beta")
    if got is not None:
        bmin, w = got
        if bmin <= 0.0:
            violations.append(
                Violation("boundary coefficient positivity: inf beta(x) > 0 fails", w, bmin)
            )

    if not spec.lam > 0:
        violations.append(Violation("parameter positivity: lambda > 0 fails",
                                    (spec.x0, spec.y0), spec.lam))

    if violations:
        return violations

    p_minus, p_plus = p_bounds
    q_minus, q_plus = q_bounds
    regime = _classify(p_minus, p_plus, q_minus, q_plus)
    eta = (p_plus, q_minus) if p_plus < q_minus else None
    return RegimeReport(p_minus, p_plus, q_minus, q_plus, regime, eta)


def require_valid(spec, mesh=None):
    """validate_spec, but raising :class:`SpecValidationError` on failure."""
    result = validate_spec(spec, mesh)
    if isinstance(result, RegimeReport):
        return result
    raise SpecValidationError(result)
