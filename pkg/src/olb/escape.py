"""The square table's piece decomposition, symbolic piece words for the
composite maps E_i, A_{i,n}, B_{i,n}, T_n, and the escape-constant fit.

Vertices of the square (+-1, +-1) are named by quadrant: v_1 = (1, 1),
v_2 = (-1, 1), v_3 = (-1, -1), v_4 = (1, -1).  A piece label (i, j, k)
records the quadrants of the vertices met by l1, l2, l3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .billiard import step
from .errors import LabelMismatch, NoCandidate, Singular, UnknownSymbol
from .geom import ConvexPolygon, Point2, as_point

SQUARE = ConvexPolygon.square(1.0)

BASE_LABELS = ((1, 2, 3), (1, 2, 4), (1, 3, 1), (1, 3, 4))


def _shift(label, s):
    return tuple((i - 1 + s) % 4 + 1 for i in label)


ADMISSIBLE = frozenset(_shift(lab, s) for lab in BASE_LABELS for s in range(4))


@dataclass(frozen=True)
class PieceLabel:
    i: int
    j: int
    k: int

    def __post_init__(self):
        if (self.i, self.j, self.k) not in ADMISSIBLE:
            raise ValueError(f"{self} is not a piece of the square map")

    @classmethod
    def parse(cls, s) -> "PieceLabel":
        if isinstance(s, PieceLabel):
            return s
        if isinstance(s, str):
            s = tuple(int(c) for c in s)
        return cls(*s)

    @property
    def steady(self) -> bool:
        return self.i == self.k

    def __str__(self):
        return f"{self.i}{self.j}{self.k}"


@dataclass(frozen=True)
class PieceWord:
    """Labels in written order; the rightmost letter acts first."""

    letters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.letters:
            raise ValueError("empty word")
        object.__setattr__(self, "letters", tuple(PieceLabel.parse(a) for a in self.letters))

    def __len__(self):
        return len(self.letters)

    def __add__(self, other: "PieceWord") -> "PieceWord":
        # composition: self after other
        return PieceWord(self.letters + other.letters)

    def application_order(self) -> list:
        return list(reversed(self.letters))

    def chain_breaks(self) -> list[int]:
        """Application-order indices k where letter k+1 cannot follow letter
        k, because the l1 vertex of a step is always the l2 vertex of the
        previous one."""
        seq = self.application_order()
        return [k for k in range(len(seq) - 1) if seq[k + 1].i != seq[k].j]

    def __str__(self):
        return " ".join(str(a) for a in self.letters)


def classify(x, P: ConvexPolygon = SQUARE) -> PieceLabel:
    """Quadrant label of the piece containing ``x``."""
    rec = step(P, x)
    return PieceLabel(*(i + 1 for i in rec.piece_label))


_E = {1: "313", 2: "424", 3: "131", 4: "242"}


def _pow(w: list, n: int) -> list:
    return w * n


def _expand(symbol: str, n: int, amended: bool) -> list:
    E = {k: [v] for k, v in _E.items()}
    if symbol in ("E1", "E2", "E3", "E4"):
        return E[int(symbol[1])]
    if symbol == "A1":
        return ["134"] + _pow(E[1] + E[3], n) + E[1] + ["231"]
    if symbol == "A2":
        return ["241"] + _pow(E[2] + E[4], n) + E[2] + ["342"]
    if symbol == "A4":
        if amended:
            return ["423"] + _pow(E[4] + E[2], n) + E[4] + ["124"]
        return ["423"] + _pow(E[3] + E[1], n) + E[3] + ["124"]
    if symbol == "B1":
        return ["312"] + _pow(E[3] + E[1], n + 1) + ["231"]
    if symbol == "B2":
        return ["423"] + _pow(E[4] + E[2], n + 1) + ["342"]
    if symbol == "B3":
        return ["134"] + _pow(E[1] + E[3], n + 1) + ["413"]
    if symbol == "Tn":
        out = []
        for s in ("B1", "B2", "B3", "A2", "A1", "A4"):
            out += _expand(s, n, amended)
        return out
    raise UnknownSymbol(symbol)


SYMBOLS = ("E1", "E2", "E3", "E4", "A1", "A2", "A4", "B1", "B2", "B3", "Tn")


def word_for(symbol: str, n: int = 0, amended: bool = False) -> PieceWord:
    """Expand a composite-map symbol into its piece word.

    The literal A_{4,n} repeats E_3 and E_1, which cannot follow T_{124}
    (see ``PieceWord.chain_breaks``).  ``amended=True`` substitutes E_4 and
    E_2, the only letters that chain through it; every other symbol is the
    same in both forms.
    """
    if symbol not in SYMBOLS:
        raise UnknownSymbol(symbol)
    if n < 0:
        raise ValueError("n must be non-negative")
    return PieceWord(tuple(_expand(symbol, int(n), amended)))


def apply_word(x, w: PieceWord, P: ConvexPolygon = SQUARE) -> Point2:
    """Apply ``w`` letter by letter, checking each piece label on the way."""
    x = as_point(x)
    for k, expected in enumerate(w.application_order()):
        rec = step(P, x)
        got = PieceLabel(*(i + 1 for i in rec.piece_label))
        if got != expected:
            raise LabelMismatch(k, str(expected), str(got))
        x = rec.y
    return x


def label_census(samples: int, half_width: float = 30.0, seed=0, P: ConvexPolygon = SQUARE):
    """Classify uniform samples in [-h, h]^2 outside the table.

    Returns {label string: (count, max radius)} plus the number of samples
    that hit a singular point.
    """
    rng = np.random.default_rng(seed)
    out: dict = {}
    singular = 0
    got = 0
    while got < samples:
        x = rng.uniform(-half_width, half_width, 2)
        if P.contains(x, strict=False):
            continue
        got += 1
        try:
            lab = str(classify(x, P))
        except Singular:
            singular += 1
            continue
        c, r = out.get(lab, (0, 0.0))
        out[lab] = (c + 1, max(r, float(math.hypot(*x))))
    return out, singular


# --- the escape fit ----------------------------------------------------------


@dataclass
class FitResult:
    C_m: float
    C_x: float
    C_y: float
    rows: list  # (n, r(n)) with r = inf where the word does not apply

    def table(self) -> list[dict]:
        return [
            {"n": n, "C_m": self.C_m, "C_x": self.C_x, "C_y": self.C_y,
             "r": r, "n_r": n * r}
            for n, r in self.rows
        ]

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r for _, r in self.rows])

    def bounded(self, factor: float = 10.0) -> bool:
        nr = np.array([n * r for n, r in self.rows])
        return bool(np.all(np.isfinite(nr)) and nr.max() <= factor * np.median(nr))


def _label_array(n: int, amended: bool) -> np.ndarray:
    w = word_for("Tn", n, amended)
    return np.array([[a.i - 1, a.j - 1, a.k - 1] for a in w.application_order()], np.int64)


_LABEL_CACHE: dict = {}


def _labels(n: int, amended: bool) -> np.ndarray:
    key = (n, amended)
    if key not in _LABEL_CACHE:
        _LABEL_CACHE[key] = _label_array(n, amended)
    return _LABEL_CACHE[key]


def to_frame(u, v, frame: str):
    """Map conjecture coordinates (u, v) to table coordinates.

    ``literal`` uses them as they are.  ``rotated`` turns them a quarter turn
    counter-clockwise, which carries the +u march onto the T_124 strip above
    the square.
    """
    if frame == "literal":
        return u, v
    if frame == "rotated":
        return -v, u
    raise ValueError(f"unknown frame {frame!r}")


def seed_point(C, n: int, frame: str = "rotated") -> tuple[float, float]:
    cm, cx, cy = C
    return to_frame(cx + n * cm, cy, frame)


def run_tn(x, n: int, amended: bool = True):
    """(ok, mismatch index, T_n(x)) via the compiled word runner."""
    from . import _kernel as K

    L = _labels(n, amended)
    st, k, ox, oy = K.apply_labels(SQUARE._vx, SQUARE._vy, float(x[0]), float(x[1]), L, SQUARE.tol)
    return st == 0, int(k), (ox, oy)


def escape_residual(C, n: int, amended: bool = True, frame: str = "rotated") -> float:
    """r(n) = |T_n(seed(n)) - seed(n+1)|, inf when the word does not apply."""
    ok, _, y = run_tn(seed_point(C, n, frame), n, amended)
    if not ok:
        return math.inf
    t = seed_point(C, n + 1, frame)
    return math.hypot(y[0] - t[0], y[1] - t[1])


def locate_seeds(n: int, box, amended: bool = True, grid: int = 201, keep: int = 16,
                 levels: int = 10) -> np.ndarray:
    """Points of ``box`` = (x0, x1, y0, y1) whose orbit follows the whole T_n
    word.  Coarse grid first, then repeated zooms around the points that
    follow the word longest.  Empty array when nothing is found."""
    from . import _kernel as K

    L = _labels(n, amended)
    x0, x1, y0, y1 = map(float, box)
    if not (x1 > x0 and y1 > y0):
        return np.empty((0, 2))
    X, Y = np.meshgrid(np.linspace(x0, x1, grid), np.linspace(y0, y1, grid))
    pts = np.c_[X.ravel(), Y.ravel()]
    hx = (x1 - x0) / (grid - 1)
    hy = (y1 - y0) / (grid - 1)
    sub = np.linspace(-1.0, 1.0, 17)
    for _ in range(levels):
        pts = np.ascontiguousarray(pts)
        st, idx, _ = K.apply_labels_batch(SQUARE._vx, SQUARE._vy, pts, L, SQUARE.tol)
        if np.any(st == 0):
            return pts[st == 0]
        order = np.argsort(-idx, kind="stable")[:keep]
        best = pts[order]
        SX, SY = np.meshgrid(sub * hx, sub * hy)
        pts = (best[:, None, :] + np.c_[SX.ravel(), SY.ravel()][None]).reshape(-1, 2)
        hx /= 8.0
        hy /= 8.0
    return np.empty((0, 2))


def fit_constants(window=(-50.0, 50.0, -50.0, 50.0), n_range=(10, 200), frame: str = "rotated",
                  amended: bool = True, probes=None, maxiter: int = 400) -> FitResult:
    """Search for C = (C_m, C_x, C_y) with T_n(seed(n)) close to seed(n+1).

    Seeds are located for a few probe values of n (coarse grid over
    ``window`` for the first, then small boxes around the line predicted by
    the seeds found so far).  A line through the seeds gives the start of a
    Nelder-Mead refinement of the summed squared residuals over the probes.
    """
    n_lo, n_hi = map(int, n_range)
    if n_lo < 5 or n_hi < n_lo:
        raise ValueError("need 5 <= n_min <= n_max")
    x0, x1, y0, y1 = map(float, window)
    if not (x1 > x0 and y1 > y0):
        raise NoCandidate("empty search window")
    if probes is None:
        probes = sorted({n_lo, min(n_lo + 5, n_hi), *range(n_lo, n_hi + 1, max(1, (n_hi - n_lo) // 8)), n_hi})
    probes = [int(p) for p in probes]

    def to_conj(p):
        # inverse of to_frame
        return (p[0], p[1]) if frame == "literal" else (p[1], -p[0])

    found = locate_seeds(probes[0], window, amended)
    if len(found) == 0:
        raise NoCandidate(f"no seed follows T_{probes[0]} inside {window}")
    s = found.mean(0) if run_tn(found.mean(0), probes[0], amended)[0] else found[0]
    _, _, img = run_tn(s, probes[0], amended)
    u0, v0 = to_conj(s)
    u1, _ = to_conj(img)
    cm = u1 - u0
    ns = [probes[0]]
    us = [u0]
    vs = [v0]
    for n in probes[1:]:
        A = np.c_[np.ones(len(ns)), ns]
        if len(ns) > 1:
            (cx, cm), *_ = np.linalg.lstsq(A, np.array(us), rcond=None)
        else:
            cx = us[0] - ns[0] * cm
        cy = float(np.mean(vs))
        px, py = to_frame(cx + n * cm, cy, frame)
        got = locate_seeds(n, (px - 1.0, px + 1.0, py - 1.0, py + 1.0), amended, grid=41)
        if len(got) == 0:
            continue
        c = got.mean(0)
        u, v = to_conj(c if run_tn(c, n, amended)[0] else got[0])
        ns.append(n)
        us.append(u)
        vs.append(v)
    if len(ns) < 2:
        raise NoCandidate("seeds found for fewer than two probe values")
    (cx, cm), *_ = np.linalg.lstsq(np.c_[np.ones(len(ns)), ns], np.array(us), rcond=None)
    C0 = np.array([cm, cx, float(np.mean(vs))])

    def objective(C):
        tot = 0.0
        for n in probes:
            r = escape_residual(C, n, amended, frame)
            tot += 1e6 if not math.isfinite(r) else r * r
        return tot

    res = minimize(objective, C0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": maxiter})
    C = res.x if res.fun <= objective(C0) else C0
    rows = [(n, escape_residual(C, n, amended, frame)) for n in range(n_lo, n_hi + 1)]
    return FitResult(float(C[0]), float(C[1]), float(C[2]), rows)
