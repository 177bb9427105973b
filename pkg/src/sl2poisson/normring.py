"""Exact arithmetic in Q[x, y, s] / (s^2 - x^2 - y^2), s standing for |z|.

Elements are kept in the normal form a(x,y) + b(x,y)*s.  Derivations use
ds/dx = x/s, ds/dy = y/s, so derivatives and the module projections carry an
explicit power of s in the denominator; identities are asserted after
clearing that power, which keeps everything exact without a fraction field.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DivisionFails
from .poly import PolyExpr

NV = 2  # variables x, y


def _p(coeffs=None) -> PolyExpr:
    return PolyExpr(NV, coeffs or {})


def p_x() -> PolyExpr:
    return PolyExpr.variable(NV, 0)


def p_y() -> PolyExpr:
    return PolyExpr.variable(NV, 1)


def _norm2() -> PolyExpr:
    return p_x() ** 2 + p_y() ** 2


class RingElem:
    """a + b*s with a, b in Q[x, y]; s^2 reduces to x^2 + y^2."""

    __slots__ = ("a", "b")

    def __init__(self, a: PolyExpr, b: PolyExpr | None = None):
        self.a = a
        self.b = b if b is not None else _p()

    @classmethod
    def const(cls, c) -> "RingElem":
        return cls(PolyExpr.constant(NV, c))

    @classmethod
    def s(cls) -> "RingElem":
        return cls(_p(), PolyExpr.constant(NV, 1))

    @classmethod
    def x(cls) -> "RingElem":
        return cls(p_x())

    @classmethod
    def y(cls) -> "RingElem":
        return cls(p_y())

    def __add__(self, other: "RingElem") -> "RingElem":
        return RingElem(self.a + other.a, self.b + other.b)

    def __neg__(self) -> "RingElem":
        return RingElem(-self.a, -self.b)

    def __sub__(self, other: "RingElem") -> "RingElem":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RingElem(self.a * other, self.b * other)
        if isinstance(other, PolyExpr):
            return RingElem(self.a * other, self.b * other)
        if isinstance(other, RingElem):
            return RingElem(self.a * other.a + (self.b * other.b) * _norm2(),
                            self.a * other.b + self.b * other.a)
        return NotImplemented

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __eq__(self, other) -> bool:
        return isinstance(other, RingElem) and (self - other).is_zero()

    def __hash__(self):
        return hash((self.a, self.b))

    def mul_s(self) -> "RingElem":
        return RingElem(self.b * _norm2(), self.a)

    def div_s(self) -> "RingElem":
        """Exact division by s: needs x^2+y^2 to divide the s-free part."""
        return RingElem(self.b, self.a.divide_exact(_norm2()))

    def divisible_by_s(self) -> bool:
        try:
            self.a.divide_exact(_norm2())
            return True
        except DivisionFails:
            return False

    def eval_batch(self, xy: np.ndarray) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        s = np.hypot(xy[:, 0], xy[:, 1])
        return self.a.eval_batch(xy) + self.b.eval_batch(xy) * s

    def pullback_sq(self) -> PolyExpr:
        """Substitute z -> lambda^2: x -> l1^2-l2^2, y -> 2 l1 l2, s -> l1^2+l2^2.

        The result is a genuine polynomial in (l1, l2).
        """
        l1sq = PolyExpr.variable(NV, 0) ** 2
        l2sq = PolyExpr.variable(NV, 1) ** 2
        cross = 2 * (PolyExpr.variable(NV, 0) * PolyExpr.variable(NV, 1))
        img_x = l1sq - l2sq
        img_y = cross
        out = self.a.substitute([img_x, img_y])
        out = out + self.b.substitute([img_x, img_y]) * (l1sq + l2sq)
        return out

    def canonical_str(self) -> str:
        return f"({self.a.canonical_str(['x','y'])}) + ({self.b.canonical_str(['x','y'])})*s"

    def __repr__(self):
        return f"RingElem({self.canonical_str()})"


@dataclass(frozen=True)
class RingFrac:
    """elem / s^k, kept exact; reduced whenever elem is divisible by s."""

    elem: RingElem
    k: int = 0

    def __post_init__(self):
        e, k = self.elem, self.k
        while k > 0 and e.divisible_by_s():
            e = e.div_s()
            k -= 1
        object.__setattr__(self, "elem", e)
        object.__setattr__(self, "k", k)

    def _align(self, other: "RingFrac"):
        k = max(self.k, other.k)
        a, b = self.elem, other.elem
        for _ in range(k - self.k):
            a = a.mul_s()
        for _ in range(k - other.k):
            b = b.mul_s()
        return a, b, k

    def __add__(self, other: "RingFrac") -> "RingFrac":
        a, b, k = self._align(other)
        return RingFrac(a + b, k)

    def __neg__(self) -> "RingFrac":
        return RingFrac(-self.elem, self.k)

    def __sub__(self, other: "RingFrac") -> "RingFrac":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RingFrac):
            return RingFrac(self.elem * other.elem, self.k + other.k)
        if isinstance(other, (int, Fraction, PolyExpr, RingElem)):
            return RingFrac(self.elem * other, self.k)
        return NotImplemented

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.elem.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, RingElem):
            other = RingFrac(other, 0)
        if not isinstance(other, RingFrac):
            return NotImplemented
        return (self - other).is_zero()

    def partial(self, i: int) -> "RingFrac":
        """d/dx (i=0) or d/dy (i=1), with ds = (x or y)/s."""
        e, k = self.elem, self.k
        var = p_x() if i == 0 else p_y()
        # d(a + b s) = a_i + b_i s + b var / s  ->  (a_i s + b_i (x^2+y^2) + b var)/s
        de = RingElem(e.b.partial(i) * _norm2() + e.b * var, e.a.partial(i))
        if k == 0:
            return RingFrac(de, 1)
        # d(e / s^k) = (de_num/s)/s^k - k var e / s^(k+2)
        term1 = RingFrac(de.mul_s(), k + 2)
        term2 = RingFrac(e * (var * Fraction(k)), k + 2)
        return term1 - term2

    def eval_batch(self, xy: np.ndarray) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        s = np.hypot(xy[:, 0], xy[:, 1])
        return self.elem.eval_batch(xy) / s ** self.k


# -- the distinguished vector fields ------------------------------------------


@dataclass(frozen=True)
class RingVec:
    """Vector field g_x d/dx + g_y d/dy with RingFrac coefficients."""

    fx: RingFrac
    fy: RingFrac

    def apply(self, g: RingFrac) -> RingFrac:
        return self.fx * g.partial(0) + self.fy * g.partial(1)

    def bracket(self, other: "RingVec") -> "RingVec":
        return RingVec(self.apply(other.fx) - other.apply(self.fx),
                       self.apply(other.fy) - other.apply(self.fy))

    def __sub__(self, other: "RingVec") -> "RingVec":
        return RingVec(self.fx - other.fx, self.fy - other.fy)

    def __add__(self, other: "RingVec") -> "RingVec":
        return RingVec(self.fx + other.fx, self.fy + other.fy)

    def __mul__(self, c) -> "RingVec":
        return RingVec(self.fx * c, self.fy * c)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.fx.is_zero() and self.fy.is_zero()


def y_fields() -> tuple[RingVec, RingVec]:
    """Y1 = -y d/dx + (s+x) d/dy and Y2 = (s-x) d/dx - y d/dy."""
    s, x, y = RingElem.s(), RingElem.x(), RingElem.y()
    y1 = RingVec(RingFrac(-y), RingFrac(s + x))
    y2 = RingVec(RingFrac(s - x), RingFrac(-y))
    return y1, y2


def y_field_relations() -> tuple[RingVec, RingVec, str]:
    """Exact residuals of the two Y-field relations, plus the bracket orientation.

    The module relation (s - x) Y1 + y Y2 = 0 holds for the fields as
    written.  The bracket closes onto the span with [Y2, Y1] = Y1 (checked
    exactly); the returned orientation string records which of the candidate
    bracket identities is the vanishing one.
    """
    y1, y2 = y_fields()
    s, x, y = RingElem.s(), RingElem.x(), RingElem.y()
    module_res = (s - x) * y1 + y * y2

    bracket12 = y1.bracket(y2)
    candidates = [
        ("[Y1,Y2] = Y2", bracket12 - y2),
        ("[Y2,Y1] = Y1", bracket12 + y1),  # [Y2,Y1] - Y1 = -([Y1,Y2] + Y1)
        ("[Y1,Y2] = -Y2", bracket12 + y2),
        ("[Y1,Y2] = Y1", bracket12 - y1),
    ]
    for name, res in candidates:
        if res.is_zero():
            return res, module_res, name
    return bracket12 - y2, module_res, "none"


# -- the twisted modules M and K ----------------------------------------------


def membership_M(g1: RingElem, g2: RingElem) -> bool:
    """(g1, g2) in M  iff  y g1 + (s + x) g2 = 0 exactly."""
    y, s, x = RingElem.y(), RingElem.s(), RingElem.x()
    return (y * g1 + (s + x) * g2).is_zero()


def membership_K(g1: RingElem, g2: RingElem) -> bool:
    """(g1, g2) in K  iff  y g1 - (s - x) g2 = 0 exactly."""
    y, s, x = RingElem.y(), RingElem.s(), RingElem.x()
    return (y * g1 - (s - x) * g2).is_zero()


def project_MK(g1: RingElem, g2: RingElem) -> tuple[tuple[RingFrac, RingFrac],
                                                    tuple[RingFrac, RingFrac]]:
    """The complementary projections, denominators a single power of s.

    p_M(g1,g2) = ((s+x)g1 - y g2, -y g1 + (s-x) g2) / (2s)
    p_K(g1,g2) = ((s-x)g1 + y g2,  y g1 + (s+x) g2) / (2s)
    """
    s, x, y = RingElem.s(), RingElem.x(), RingElem.y()
    half = Fraction(1, 2)
    m = (RingFrac(((s + x) * g1 - y * g2) * half, 1),
         RingFrac((-(y * g1) + (s - x) * g2) * half, 1))
    k = (RingFrac(((s - x) * g1 + y * g2) * half, 1),
         RingFrac((y * g1 + (s + x) * g2) * half, 1))
    return m, k


def j_swap(g1: RingElem, g2: RingElem) -> tuple[RingElem, RingElem]:
    """The module isomorphism J(g1, g2) = (-g2, g1) carrying M onto K."""
    return -g2, g1


# -- eigenspace decomposition and the squaring transport -----------------------


def eigenspace_decompose(g: PolyExpr) -> tuple[PolyExpr, PolyExpr, PolyExpr, PolyExpr]:
    """g = g0 + x gx + y gy + xy gxy with all parts even in x and in y.

    Projections 1/4 (id +- sigma*)(id +- tau*) followed by exact division;
    sigma flips both coordinates, tau flips y.
    """
    if g.nvars != NV:
        raise ValueError("expected a 2-variable polynomial")

    def pullback(poly: PolyExpr, sx: int, sy: int) -> PolyExpr:
        return PolyExpr(NV, {e: c * (sx ** e[0]) * (sy ** e[1])
                             for e, c in poly.coeffs.items()})

    sigma = pullback(g, -1, -1)
    tau = pullback(g, 1, -1)
    sigma_tau = pullback(g, -1, 1)
    quarter = Fraction(1, 4)
    g0 = (g + sigma + tau + sigma_tau) * quarter
    hx = (g - sigma + tau - sigma_tau) * quarter
    hy = (g - sigma - tau + sigma_tau) * quarter
    hxy = (g + sigma - tau - sigma_tau) * quarter
    try:
        gx = hx.divide_exact(p_x())
        gy = hy.divide_exact(p_y())
        gxy = hxy.divide_exact(p_x() * p_y())
    except DivisionFails as exc:  # parity bookkeeping guarantees divisibility
        raise DivisionFails(f"eigenspace component not divisible: {exc}") from exc
    return g0, gx, gy, gxy


def sq_transport(g: PolyExpr) -> PolyExpr:
    """Pullback along lambda -> lambda^2: g(l1^2 - l2^2, 2 l1 l2)."""
    if g.nvars != NV:
        raise ValueError("expected a 2-variable polynomial")
    l1, l2 = PolyExpr.variable(NV, 0), PolyExpr.variable(NV, 1)
    return g.substitute([l1 ** 2 - l2 ** 2, 2 * (l1 * l2)])


def minus_sigma_image(g1: RingElem, g2: RingElem) -> PolyExpr:
    """-l1 * g1(sq) + l2 * g2(sq); kernel is exactly the K relation."""
    l1, l2 = PolyExpr.variable(NV, 0), PolyExpr.variable(NV, 1)
    return -(l1 * g1.pullback_sq()) + l2 * g2.pullback_sq()
