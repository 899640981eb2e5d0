"""Piecewise-analytic test functions with exact moment integrals.

Two piece kinds cover everything needed here: constants, and affine images
of the logarithm t -> c0 + c1*ln(sigma*(t - tau)).  Means and second
moments reduce to closed antiderivatives; absolute q-th moments reduce,
after the substitution z = -ln w, to exponential-weight integrals of
|affine|^q which are evaluated by incomplete-gamma differences on the side
where the weight decays and by panel quadrature on the other side.

The oscillation seminorm is computed on a dyadic grid refined by every
piece breakpoint: prefix integrals at grid nodes are exact, so the scan
over node pairs is exact on its candidate set and bounds the true
seminorm from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaincc, roots_jacobi

from .errors import DomainError
from .specfn import _legendre, gamma_fn

# candidate-set refinement used when a generated step function is rescaled
# to unit grid seminorm; one level beyond 8 resolves window endpoints well
# inside the cells of a 64-cell draw
_GEN_LEVELS = 9

# windows shorter than this fraction of the domain are dropped from the
# pair scan: prefix-sum cancellation makes their variance meaningless
_MIN_WINDOW = 1e-9


@dataclass(frozen=True)
class ConstPiece:
    """Constant value v on the half-open interval [a, b)."""

    a: float
    b: float
    v: float


@dataclass(frozen=True)
class LogPiece:
    """t -> c0 + c1*ln(sigma*(t - tau)) on [a, b); sigma*(t - tau) > 0 inside."""

    a: float
    b: float
    c0: float
    c1: float
    sigma: float
    tau: float

    def __post_init__(self):
        if self.sigma not in (1.0, -1.0, 1, -1):
            raise DomainError(f"sigma must be +-1, got {self.sigma}")
        # positivity on the open interval pins tau outside of it
        if self.sigma > 0 and not self.tau <= self.a:
            raise DomainError(f"tau = {self.tau} must sit left of [{self.a}, {self.b})")
        if self.sigma < 0 and not self.tau >= self.b:
            raise DomainError(f"tau = {self.tau} must sit right of [{self.a}, {self.b})")


class PiecewiseFn:
    """Immutable ordered list of pieces partitioning [a, b) with no gaps."""

    __slots__ = ("pieces", "a", "b", "_kind", "_pa", "_pb", "_c0", "_c1", "_sig", "_tau")

    def __init__(self, pieces):
        pieces = tuple(pieces)
        if not pieces:
            raise DomainError("a piecewise function needs at least one piece")
        for pc in pieces:
            if not isinstance(pc, (ConstPiece, LogPiece)):
                raise DomainError(f"unsupported piece {pc!r}")
            if not pc.b > pc.a:
                raise DomainError(f"piece [{pc.a}, {pc.b}) is empty or reversed")
        for left, right in zip(pieces, pieces[1:]):
            if left.b != right.a:
                raise DomainError(f"pieces must abut exactly: {left.b} != {right.a}")
        self.pieces = pieces
        self.a = pieces[0].a
        self.b = pieces[-1].b
        n = len(pieces)
        kind = np.zeros(n, dtype=np.uint8)
        pa = np.empty(n)
        pb = np.empty(n)
        c0 = np.zeros(n)
        c1 = np.zeros(n)
        sig = np.ones(n)
        tau = np.zeros(n)
        for i, pc in enumerate(pieces):
            pa[i], pb[i] = pc.a, pc.b
            if isinstance(pc, ConstPiece):
                c0[i] = pc.v
            else:
                kind[i] = 1
                c0[i], c1[i] = pc.c0, pc.c1
                sig[i], tau[i] = float(pc.sigma), pc.tau
        self._kind = kind
        self._pa, self._pb = pa, pb
        self._c0, self._c1 = c0, c1
        self._sig, self._tau = sig, tau

    @property
    def domain(self):
        return (self.a, self.b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def breakpoints(self) -> np.ndarray:
        return np.append(self._pa, self.b)

    def __len__(self):
        return len(self.pieces)

    def __repr__(self):
        return f"PiecewiseFn({len(self.pieces)} pieces on [{self.a}, {self.b}))"


def evaluate(f: PiecewiseFn, t):
    """Pointwise values; the right domain endpoint is taken from the last piece."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < f.a) or np.any(arr > f.b):
        raise DomainError(f"argument outside the domain [{f.a}, {f.b}]")
    idx = np.clip(np.searchsorted(f._pa, arr, side="right") - 1, 0, len(f.pieces) - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = f._c0[idx] + f._c1[idx] * np.log(f._sig[idx] * (arr - f._tau[idx]))
    out = np.where(f._kind[idx] == 1, logs, f._c0[idx])
    return float(out[0]) if scalar else out


def _xlnx(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] * np.log(w[pos])
    return out


def _xln2x(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    lw = np.log(w[pos])
    out[pos] = w[pos] * lw * lw
    return out


def _w_bounds(f: PiecewiseFn, lo_t: np.ndarray, hi_t: np.ndarray, idx: np.ndarray):
    """Sorted log-argument bounds for subintervals [lo_t, hi_t] of pieces idx."""
    w0 = f._sig[idx] * (lo_t - f._tau[idx])
    w1 = f._sig[idx] * (hi_t - f._tau[idx])
    return np.minimum(w0, w1), np.maximum(w0, w1)


def _segment_integrals(f: PiecewiseFn, lo_t: np.ndarray, hi_t: np.ndarray, idx: np.ndarray):
    """Exact (integral f, integral f^2) over subintervals of single pieces."""
    length = hi_t - lo_t
    c0, c1 = f._c0[idx], f._c1[idx]
    i1 = c0 * length
    i2 = c0 * c0 * length
    logp = f._kind[idx] == 1
    if np.any(logp):
        wlo, whi = _w_bounds(f, lo_t[logp], hi_t[logp], idx[logp])
        a0, a1 = c0[logp], c1[logp]
        dl = (whi - wlo)
        dxl = (_xlnx(whi) - whi) - (_xlnx(wlo) - wlo)
        dx2 = (_xln2x(whi) - 2.0 * _xlnx(whi) + 2.0 * whi) - (
            _xln2x(wlo) - 2.0 * _xlnx(wlo) + 2.0 * wlo
        )
        i1[logp] = a0 * dl + a1 * dxl
        i2[logp] = a0 * a0 * dl + 2.0 * a0 * a1 * dxl + a1 * a1 * dx2
    return i1, i2


def mean(f: PiecewiseFn) -> float:
    i1, _ = _segment_integrals(f, f._pa, f._pb, np.arange(len(f.pieces)))
    return float(np.sum(i1) / f.length)


def second_moment(f: PiecewiseFn) -> float:
    _, i2 = _segment_integrals(f, f._pa, f._pb, np.arange(len(f.pieces)))
    return float(np.sum(i2) / f.length)


@lru_cache(maxsize=64)
def _jacobi_right(n: int, alpha: float):
    # weight (1-x)^alpha on [-1, 1]; algebraic factor at the right end
    return roots_jacobi(n, alpha, 0.0)


def _abs_affine_exp(q: float, z1, z2, B, C, n: int = 64) -> np.ndarray:
    """integral_{z1}^{z2} exp(-z) |C - B z|^q dz, elementwise; z2 may be inf."""
    z1 = np.atleast_1d(np.asarray(z1, dtype=float))
    z2 = np.atleast_1d(np.asarray(z2, dtype=float))
    B = np.atleast_1d(np.asarray(B, dtype=float))
    C = np.atleast_1d(np.asarray(C, dtype=float))
    out = np.zeros_like(z1)
    flat = B == 0.0
    if np.any(flat):
        out[flat] = np.abs(C[flat]) ** q * (np.exp(-z1[flat]) - np.exp(-z2[flat]))
    live = ~flat
    if not np.any(live):
        return out
    a1, a2, b_, c_ = z1[live], z2[live], B[live], C[live]
    zs = c_ / b_
    absB = np.abs(b_)
    gq = gamma_fn(q + 1.0)
    # decaying side, z >= zs: |C - Bz| = |B| (z - zs)
    y1 = np.maximum(a1 - zs, 0.0)
    y2 = np.maximum(a2 - zs, 0.0)
    p2 = np.where(np.isinf(y2), 1.0, gammainc(q + 1.0, np.where(np.isinf(y2), 0.0, y2)))
    q2 = np.where(np.isinf(y2), 0.0, gammaincc(q + 1.0, np.where(np.isinf(y2), 0.0, y2)))
    tail_small = y1 < q + 1.0
    delta = np.where(tail_small, p2 - gammainc(q + 1.0, y1), gammaincc(q + 1.0, y1) - q2)
    acc = absB ** q * np.exp(-zs) * gq * np.maximum(delta, 0.0)
    # growing side, z <= zs: finite range, panel quadrature
    beta = np.minimum(a2, zs)
    has_left = a1 < beta
    if np.any(has_left):
        ii = np.flatnonzero(has_left)
        al, bl, zl, ab = a1[ii], beta[ii], zs[ii], absB[ii]
        npan = np.maximum(1, np.ceil((bl - al) / 3.0).astype(int))
        xg, wg = _legendre(n)
        xj, wj = _jacobi_right(n, float(q))
        res = np.zeros(ii.size)
        for nv in np.unique(npan):
            sel = np.flatnonzero(npan == nv)
            A, Bt, Z, AB = al[sel], bl[sel], zl[sel], ab[sel]
            h = (Bt - A) / nv
            part = np.zeros(sel.size)
            if nv > 1:
                j = np.arange(nv - 1)
                lo_e = A[:, None] + h[:, None] * j[None, :]
                mid = lo_e + 0.5 * h[:, None]
                z = mid[:, :, None] + 0.5 * h[:, None, None] * xg[None, None, :]
                vals = np.exp(-z) * (AB[:, None, None] * (Z[:, None, None] - z)) ** q
                part += 0.5 * h * np.einsum("ijk,k->i", vals, wg)
            # last panel touches beta; Jacobi rule when the factor vanishes there
            half = 0.5 * h
            mid = Bt - half
            vanish = Bt == Z
            if np.any(vanish):
                v = np.flatnonzero(vanish)
                z = mid[v, None] + half[v, None] * xj[None, :]
                part[v] += AB[v] ** q * half[v] ** (q + 1.0) * (np.exp(-z) @ wj)
            if not np.all(vanish):
                v = np.flatnonzero(~vanish)
                z = mid[v, None] + half[v, None] * xg[None, :]
                vals = np.exp(-z) * (AB[v, None] * (Z[v, None] - z)) ** q
                part[v] += half[v] * (vals @ wg)
            res[sel] = part
        acc[ii] += res
    out[live] = acc
    return out


def moments(f: PiecewiseFn, q: float) -> float:
    """Normalized absolute moment |I|^-1 integral_I |f|^q."""
    if not q >= 1:
        raise DomainError(f"moment exponent must be >= 1, got {q}")
    kind, length = f._kind, f._pb - f._pa
    total = float(np.sum(np.abs(f._c0[kind == 0]) ** q * length[kind == 0]))
    logs = np.flatnonzero(kind == 1)
    if logs.size:
        wlo, whi = _w_bounds(f, f._pa[logs], f._pb[logs], logs)
        with np.errstate(divide="ignore", invalid="ignore"):
            z1 = -np.log(whi)
            z2 = np.where(wlo > 0, -np.log(np.maximum(wlo, 1e-300)), np.inf)
        total += float(np.sum(_abs_affine_exp(q, z1, z2, f._c1[logs], f._c0[logs])))
    return total / f.length


def distribution(f: PiecewiseFn, c: float) -> float:
    """Measure of the superlevel set {t in I : f(t) > c}, exactly per piece."""
    c = float(c)
    length = f._pb - f._pa
    const = f._kind == 0
    total = float(np.sum(length[const] * (f._c0[const] > c)))
    logs = np.flatnonzero(f._kind == 1)
    if logs.size:
        c0, c1, sig, tau = f._c0[logs], f._c1[logs], f._sig[logs], f._tau[logs]
        pa, pb = f._pa[logs], f._pb[logs]
        with np.errstate(over="ignore"):
            t_c = tau + sig * np.exp((c - c0) / c1)
        t_c = np.clip(t_c, pa, pb)
        increasing = c1 * sig > 0
        contrib = np.where(increasing, pb - t_c, t_c - pa)
        flat = c1 == 0.0
        if np.any(flat):
            contrib[flat] = (pb - pa)[flat] * (c0[flat] > c)
        total += float(np.sum(contrib))
    return total


_pair_kernel = None


def _pair_scan_py(t, s1, s2, wmin):
    best = 0.0
    n = t.shape[0]
    for i in range(n - 1):
        ti = t[i]
        a1 = s1[i]
        a2 = s2[i]
        for j in range(i + 1, n):
            w = t[j] - ti
            if w < wmin:
                continue
            mu = (s1[j] - a1) / w
            v = (s2[j] - a2) / w - mu * mu
            if v > best:
                best = v
    return best


def _pair_scan_numpy(t, s1, s2, wmin):
    best = 0.0
    for i in range(t.shape[0] - 1):
        w = t[i + 1 :] - t[i]
        ok = w >= wmin
        if not np.any(ok):
            continue
        mu = (s1[i + 1 :][ok] - s1[i]) / w[ok]
        v = (s2[i + 1 :][ok] - s2[i]) / w[ok] - mu * mu
        m = v.max()
        if m > best:
            best = m
    return best


def _pair_scan(t, s1, s2, wmin):
    global _pair_kernel
    if _pair_kernel is None:
        try:
            from numba import njit

            compiled = njit(cache=True, nogil=True)(_pair_scan_py)
            compiled(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2), 0.0)
            _pair_kernel = compiled
        except Exception:
            _pair_kernel = _pair_scan_numpy
    return _pair_kernel(t, s1, s2, wmin)


def bmo_norm(f: PiecewiseFn, levels: int) -> float:
    """Oscillation seminorm over all node-aligned windows of the refined grid.

    Nodes are the 2^levels dyadic splits of the domain plus every piece
    breakpoint, so prefix integrals at nodes are exact and the result is a
    lower bound of the true seminorm, nondecreasing in levels.
    """
    if not isinstance(levels, int) or not 1 <= levels <= 16:
        raise DomainError(f"levels must be an integer in [1, 16], got {levels}")
    nodes = np.unique(
        np.concatenate([np.linspace(f.a, f.b, 2 ** levels + 1), f.breakpoints()])
    )
    gl, gh = nodes[:-1], nodes[1:]
    idx = np.clip(np.searchsorted(f._pa, gl, side="right") - 1, 0, len(f.pieces) - 1)
    i1, i2 = _segment_integrals(f, gl, gh, idx)
    s1 = np.concatenate([[0.0], np.cumsum(i1)])
    s2 = np.concatenate([[0.0], np.cumsum(i2)])
    best = _pair_scan(nodes, s1, s2, _MIN_WINDOW * f.length)
    return math.sqrt(max(best, 0.0))


def transfer(f: PiecewiseFn, J) -> PiecewiseFn:
    """Affine reparametrization onto the interval J; distribution is preserved."""
    j1, j2 = (float(v) for v in J)
    if not j2 > j1:
        raise DomainError(f"target interval [{j1}, {j2}] is degenerate")
    s = (j2 - j1) / f.length
    i1 = f.a

    def remap(t: float) -> float:
        return j1 + (t - i1) * s

    out = []
    last = len(f.pieces) - 1
    for i, pc in enumerate(f.pieces):
        a = j1 if i == 0 else remap(pc.a)
        b = j2 if i == last else remap(pc.b)
        if isinstance(pc, ConstPiece):
            out.append(ConstPiece(a, b, pc.v))
        else:
            out.append(
                LogPiece(a, b, pc.c0 - pc.c1 * math.log(s), pc.c1, pc.sigma, remap(pc.tau))
            )
    return PiecewiseFn(out)


def homogenize(f: PiecewiseFn, lam: float, depth: int) -> PiecewiseFn:
    """Geometric rearrangement tiling shrunk copies outward from the center.

    Copies of f go on [±(1-lam^(k-1))/2, ±(1-lam^k)/2] for k = 1..depth;
    the two leftover edge gaps (total mass lam^depth) are filled with the
    constant mean of f, so the output distribution matches f's up to that
    residual mass.
    """
    if not (f.a == -0.5 and f.b == 0.5):
        raise DomainError(f"homogenization expects the domain [-0.5, 0.5], got [{f.a}, {f.b}]")
    if not 0.0 < lam < 1.0:
        raise DomainError(f"shrink factor must lie in (0, 1), got {lam}")
    if not (isinstance(depth, int) and depth >= 1):
        raise DomainError(f"depth must be a positive integer, got {depth}")
    residual = lam ** depth
    if residual > 1e-6:
        raise DomainError(
            f"depth {depth} leaves residual mass {residual:.3e} > 1e-6; increase depth"
        )
    edges = (1.0 - lam ** np.arange(depth + 1)) / 2.0
    fill = mean(f)
    pieces = [ConstPiece(-0.5, -edges[depth], fill)]
    for k in range(depth, 0, -1):
        pieces.extend(transfer(f, (-edges[k], -edges[k - 1])).pieces)
    for k in range(1, depth + 1):
        pieces.extend(transfer(f, (edges[k - 1], edges[k])).pieces)
    pieces.append(ConstPiece(edges[depth], 0.5, fill))
    return PiecewiseFn(pieces)


def optimizer_uplus(eps: float, u: float) -> PiecewiseFn:
    """Logarithmic extremal u - eps*ln t on (0, 1]; mean u + eps."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not u >= 0:
        raise DomainError(f"u must be nonnegative, got {u}")
    return PiecewiseFn([LogPiece(0.0, 1.0, float(u), -float(eps), 1.0, 0.0)])


def optimizer_uminus(eps: float, u: float) -> PiecewiseFn:
    """Two flat steps +-eps followed by a logarithmic ramp; mean u - eps."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not u >= eps:
        raise DomainError(f"u = {u} must be >= eps = {eps}")
    top = math.exp((u - eps) / eps)
    pieces = [ConstPiece(0.0, 0.5, -float(eps)), ConstPiece(0.5, 1.0, float(eps))]
    if top > 1.0:
        pieces.append(LogPiece(1.0, top, float(eps), float(eps), 1.0, 0.0))
    return PiecewiseFn(pieces)


def optimizer_phi0() -> PiecewiseFn:
    """Odd three-piece extremal on (-2, 2): log ramps around a flat center."""
    return PiecewiseFn(
        [
            LogPiece(-2.0, -1.0, 0.0, 1.0, 1.0, -2.0),
            ConstPiece(-1.0, 1.0, 0.0),
            LogPiece(1.0, 2.0, 0.0, -1.0, -1.0, 2.0),
        ]
    )


def build_psi(delta: float, lam: float, depth: int, ambient=(-4.0, 5.0)) -> PiecewiseFn:
    """Homogenized odd extremal squeezed into (0, 1), zero on the rest of ambient.

    delta only advertises the oscillation slack the construction is aiming
    for; the properties (support, moments, seminorm <= 1 + delta) are meant
    to be verified numerically on the result.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    j1, j2 = (float(v) for v in ambient)
    if not (j1 <= 0.0 and j2 >= 1.0):
        raise DomainError(f"ambient interval [{j1}, {j2}] must contain [0, 1]")
    base = transfer(optimizer_phi0(), (-0.5, 0.5))
    core = transfer(homogenize(base, lam, depth), (0.0, 1.0))
    pieces = []
    if j1 < 0.0:
        pieces.append(ConstPiece(j1, 0.0, 0.0))
    pieces.extend(core.pieces)
    if j2 > 1.0:
        pieces.append(ConstPiece(1.0, j2, 0.0))
    return PiecewiseFn(pieces)


def random_step_fn(seed: int, cells: int, eps: float) -> PiecewiseFn:
    """Random step function on [0, 1) rescaled to grid seminorm exactly eps."""
    if not (isinstance(cells, int) and cells >= 2):
        raise DomainError(f"cells must be an integer >= 2, got {cells}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    rng = np.random.Generator(np.random.Philox(seed))
    while True:
        vals = rng.normal(0.0, 1.0, cells)
        if np.ptp(vals) > 0:
            break
    edges = np.linspace(0.0, 1.0, cells + 1)
    raw = PiecewiseFn(
        [ConstPiece(edges[i], edges[i + 1], vals[i]) for i in range(cells)]
    )
    scale = eps / bmo_norm(raw, _GEN_LEVELS)
    return PiecewiseFn(
        [ConstPiece(edges[i], edges[i + 1], vals[i] * scale) for i in range(cells)]
    )


def to_csv(f: PiecewiseFn) -> str:
    """Serialize as kind,a,b,c0,c1,sigma,tau rows; constants carry v in c0."""
    lines = ["kind,a,b,c0,c1,sigma,tau"]
    for pc in f.pieces:
        if isinstance(pc, ConstPiece):
            row = ("const", pc.a, pc.b, pc.v, 0.0, 1.0, 0.0)
        else:
            row = ("log", pc.a, pc.b, pc.c0, pc.c1, pc.sigma, pc.tau)
        lines.append(row[0] + "," + ",".join(format(v, ".17g") for v in row[1:]))
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> PiecewiseFn:
    rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or rows[0] != "kind,a,b,c0,c1,sigma,tau":
        raise DomainError("missing piece header kind,a,b,c0,c1,sigma,tau")
    pieces = []
    for ln in rows[1:]:
        parts = ln.split(",")
        if len(parts) != 7:
            raise DomainError(f"malformed piece row: {ln!r}")
        kind, nums = parts[0], [float(v) for v in parts[1:]]
        if kind == "const":
            pieces.append(ConstPiece(nums[0], nums[1], nums[2]))
        elif kind == "log":
            pieces.append(LogPiece(*nums))
        else:
            raise DomainError(f"unknown piece kind {kind!r}")
    return PiecewiseFn(pieces)
