"""Perturbation kinds: the pixel-level function, its exact constraint
encoding for the two-copy program, seed relations between copies, case
splitting, and discrete-parameter enumeration.

Spec text syntax (see parse_spec):

    brightness([l,u])        additive level e in [l,u], -1 <= l <= u <= 1
    contrast([l,u])          multiplicative e in [l,u], 0 < l <= u
    occlusion(i,j,w)         zero the w x w square with 1-based top-left (i,j)
    patch([0,e],i,j,[wl,wu]) perturb the square's pixels by at most +-e
    translation(tx,ty)       move pixels by (tx,ty), vacated pixels become 0
    rotation(theta)          rotate by theta degrees, bilinear interpolation
    linf([0,e])              every pixel may move by at most +-e

Every argument may be a scalar v (meaning [v,v]) or an interval [a,b].
Pixel coordinates are 1-based.  Integer-valued ranges (square positions,
widths, translation offsets) are enumerated into sub-cases; brightness
and contrast ranges that straddle their sign/identity point are split in
two so each case has a definite direction.

Clipping: the attack and sampling paths clip perturbed entries into
[0,1] (apply(..., clip=True), the default).  The constraint encoding and
the exact-arithmetic paths used to validate it omit clipping, matching
the formal perturbation definitions; this is a documented caveat when a
spec pushes pixels out of range (see README).
"""

from dataclasses import dataclass, field
import itertools
import math
import re

import numpy as np

# Relation constants shared with the dependency machinery.
EQ, GE, GT, LE, LT, NONE = "EQ", "GE", "GT", "LE", "LT", "NONE"

KINDS = ("brightness", "contrast", "occlusion", "patch", "translation", "rotation", "linf")


class SpecError(ValueError):
    """Malformed or out-of-domain perturbation specification."""


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    ranges: tuple  # kind-specific ((lo, hi), ...) pairs

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown perturbation kind {self.kind!r}")
        for lo, hi in self.ranges:
            if lo > hi:
                raise SpecError(f"{self.kind}: empty interval [{lo},{hi}]")
        k, r = self.kind, self.ranges
        if k == "brightness":
            (lo, hi), = r
            if lo < -1 or hi > 1:
                raise SpecError("brightness level must stay within [-1,1]")
        elif k == "contrast":
            (lo, hi), = r
            if lo <= 0:
                raise SpecError("contrast factor must be positive")
        elif k == "linf":
            (lo, hi), = r
            if lo < 0 or hi <= 0 or hi > 1:
                raise SpecError("linf limit must satisfy 0 < e <= 1")
        elif k == "patch":
            if r[0][1] <= 0 or r[0][1] > 1:
                raise SpecError("patch limit must satisfy 0 < e <= 1")

    def __str__(self):
        args = ",".join(
            f"{lo:g}" if lo == hi else f"[{lo:g},{hi:g}]" for lo, hi in self.ranges
        )
        return f"{self.kind}({args})"


_ARG_COUNT = {
    "brightness": 1, "contrast": 1, "occlusion": 3, "patch": 4,
    "translation": 2, "rotation": 1, "linf": 1,
}
_NUM = r"[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_ARG_RE = re.compile(rf"\s*(?:({_NUM})|\[\s*({_NUM})\s*,\s*({_NUM})\s*\])\s*$")


def parse_spec(text: str) -> PerturbationSpec:
    """Parse the textual perturbation syntax shown in the module docstring."""
    m = re.match(r"\s*([a-zA-Z_]+)\s*\((.*)\)\s*$", text)
    if not m:
        raise SpecError(f"cannot parse perturbation spec {text!r}")
    kind = m.group(1).lower()
    if kind not in KINDS:
        raise SpecError(f"unknown perturbation kind {kind!r} in {text!r}")
    body = m.group(2)
    args = _split_args(body, text)
    if len(args) != _ARG_COUNT[kind]:
        raise SpecError(
            f"{kind} takes {_ARG_COUNT[kind]} argument(s), got {len(args)} in {text!r}"
        )
    ranges = []
    for a in args:
        am = _ARG_RE.match(a)
        if not am:
            raise SpecError(f"bad argument {a.strip()!r} in {text!r}")
        if am.group(1) is not None:
            v = float(am.group(1))
            ranges.append((v, v))
        else:
            ranges.append((float(am.group(2)), float(am.group(3))))
    return PerturbationSpec(kind=kind, ranges=tuple(ranges))


def _split_args(body, text):
    args, depth, cur = [], 0, ""
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            args.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        args.append(cur)
    if depth != 0:
        raise SpecError(f"unbalanced brackets in {text!r}")
    return args


# ---------------------------------------------------------------------------
# Cases: one fixed choice of the discrete parameters plus, for brightness
# and contrast, a sign-definite sub-range of the continuous parameter.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationCase:
    kind: str
    shape: tuple                   # (l, d1, d2)
    square: tuple | None = None    # (i, j, w), 1-based top-left
    shift: tuple | None = None     # (tx, ty)
    theta: float | None = None     # degrees
    eps_limit: float | None = None     # patch / linf
    eps_range: tuple | None = None     # brightness / contrast case range

    @property
    def n_inputs(self):
        return int(np.prod(self.shape))

    def label(self):
        k = self.kind
        if k == "brightness" or k == "contrast":
            lo, hi = self.eps_range
            return f"{k}[{lo:g},{hi:g}]"
        if k == "occlusion":
            return "occlusion(i=%d,j=%d,w=%d)" % self.square
        if k == "patch":
            i, j, w = self.square
            return f"patch(e={self.eps_limit:g},i={i},j={j},w={w})"
        if k == "translation":
            return "translation(tx=%d,ty=%d)" % self.shift
        if k == "rotation":
            return f"rotation({self.theta:g})"
        return f"linf(e={self.eps_limit:g})"


def _as_int(v, what):
    if float(v) != int(v):
        raise SpecError(f"{what} must be an integer, got {v}")
    return int(v)


def enumerate_cases(spec: PerturbationSpec, shape: tuple) -> list:
    """Expand integer ranges and sign splits into concrete cases.

    The overall verdict for the spec is the componentwise max over the
    cases' results; the pipeline handles that aggregation.
    """
    l, d1, d2 = shape
    k, r = spec.kind, spec.ranges
    cases = []
    if k == "brightness":
        lo, hi = r[0]
        for clo, chi in _sign_split(lo, hi, 0.0):
            cases.append(PerturbationCase(k, shape, eps_range=(clo, chi)))
    elif k == "contrast":
        lo, hi = r[0]
        for clo, chi in _sign_split(lo, hi, 1.0):
            cases.append(PerturbationCase(k, shape, eps_range=(clo, chi)))
    elif k in ("occlusion", "patch"):
        if k == "patch":
            eps = r[0][1]
            (il, iu), (jl, ju), (wl, wu) = r[1], r[2], r[3]
            widths = [_as_int(wu, "patch width")]  # wider patches subsume narrower
        else:
            eps = None
            (il, iu), (jl, ju), (wl, wu) = r
            widths = range(_as_int(wl, "width"), _as_int(wu, "width") + 1)
        for i, j, w in itertools.product(
            range(_as_int(il, "row"), _as_int(iu, "row") + 1),
            range(_as_int(jl, "col"), _as_int(ju, "col") + 1),
            widths,
        ):
            if not (1 <= i and 1 <= j and w >= 1 and i + w - 1 <= d1 and j + w - 1 <= d2):
                raise SpecError(f"{k} square (i={i},j={j},w={w}) does not fit a {d1}x{d2} image")
            cases.append(PerturbationCase(k, shape, square=(i, j, w), eps_limit=eps))
    elif k == "translation":
        (xl, xu), (yl, yu) = r
        for tx, ty in itertools.product(
            range(_as_int(xl, "tx"), _as_int(xu, "tx") + 1),
            range(_as_int(yl, "ty"), _as_int(yu, "ty") + 1),
        ):
            if abs(tx) > d1 or abs(ty) > d2:
                raise SpecError(f"translation ({tx},{ty}) exceeds image dimensions")
            cases.append(PerturbationCase(k, shape, shift=(tx, ty)))
    elif k == "rotation":
        lo, hi = r[0]
        if lo != hi:
            raise SpecError("rotation supports a single angle only (theta_l == theta_u)")
        cases.append(PerturbationCase(k, shape, theta=float(lo)))
    else:  # linf
        cases.append(PerturbationCase(k, shape, eps_limit=r[0][1]))
    if not cases:
        raise SpecError(f"{spec}: empty enumeration")
    return cases


def _sign_split(lo, hi, pivot):
    if lo < pivot < hi:
        return [(lo, pivot), (pivot, hi)]
    return [(lo, hi)]


# ---------------------------------------------------------------------------
# Index helpers (1-based pixel coordinates, C-order flat indices).
# ---------------------------------------------------------------------------

def flat_index(shape, v, i, j):
    """0-based flat index of channel v (0-based), pixel (i, j) (1-based)."""
    l, d1, d2 = shape
    return v * d1 * d2 + (i - 1) * d2 + (j - 1)


def square_indices(shape, square):
    """Flat indices of all channels of the w x w square at 1-based (i, j)."""
    l, d1, d2 = shape
    i0, j0, w = square
    out = []
    for v in range(l):
        for i in range(i0, i0 + w):
            for j in range(j0, j0 + w):
                out.append(flat_index(shape, v, i, j))
    return np.array(out, dtype=np.int64)


def rotation_stencil(shape, theta):
    """Per-pixel source/coefficient lists of the bilinear rotation.

    Returns a list indexed by the flat pixel index of one channel: entry
    None means the rotated source falls outside the image (the pixel
    becomes 0); otherwise a 4-tuple of (src_flat, coef) in the fixed term
    order floor/floor, ceil/floor, floor/ceil, ceil/ceil.
    """
    _, d1, d2 = shape
    c1 = d1 / 2 + 1
    c2 = d2 / 2 + 1
    sin_t = math.sin(theta * math.pi / 180.0)
    cos_t = math.cos(theta * math.pi / 180.0)
    out = []
    for i in range(1, d1 + 1):
        for j in range(1, d2 + 1):
            ic = i - c1
            jc = j - c2
            ir = ic * sin_t + jc * cos_t + c1
            jr = ic * cos_t - jc * sin_t + c2
            fi, ci = math.floor(ir), math.ceil(ir)
            fj, cj = math.floor(jr), math.ceil(jr)
            if fi >= 1 and ci <= d1 and fj >= 1 and cj <= d2:
                di = ir - fi
                dj = jr - fj
                base = lambda a, b: (a - 1) * d2 + (b - 1)
                out.append((
                    (base(fi, fj), (1 - di) * (1 - dj)),
                    (base(ci, fj), di * (1 - dj)),
                    (base(fi, cj), (1 - di) * dj),
                    (base(ci, cj), di * dj),
                ))
            else:
                out.append(None)
    return out


# ---------------------------------------------------------------------------
# The perturbation function itself.
# ---------------------------------------------------------------------------

def case_apply(case: PerturbationCase, x: np.ndarray, eps=None, clip=True) -> np.ndarray:
    """Apply a fixed case to flattened input(s).

    `x` has shape (n,) or (batch, n).  `eps` carries the continuous
    parameters: a scalar (brightness/contrast), per-square deltas
    (patch), per-pixel deltas (linf), or None for the parameter-free
    kinds.  Batched `eps` may add a leading batch axis.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    n = case.n_inputs
    if X.shape[1] != n:
        raise SpecError(f"input length {X.shape[1]} != expected {n}")
    k = case.kind
    if k == "brightness":
        e = _scalar_eps(case, eps, X.shape[0])
        P = X + e[:, None]
    elif k == "contrast":
        e = _scalar_eps(case, eps, X.shape[0])
        P = e[:, None] * X
    elif k == "occlusion":
        P = X.copy()
        P[:, square_indices(case.shape, case.square)] = 0.0
    elif k == "patch":
        idx = square_indices(case.shape, case.square)
        D = _delta_eps(case, eps, X.shape[0], idx.size)
        P = X.copy()
        P[:, idx] += D
    elif k == "translation":
        P = _translate(case, X)
    elif k == "rotation":
        P = _rotate(case, X)
    else:  # linf
        D = _delta_eps(case, eps, X.shape[0], n)
        P = X + D
    if clip:
        P = np.minimum(np.maximum(P, 0.0), 1.0)
    return P[0] if single else P


def _scalar_eps(case, eps, batch):
    if eps is None:
        raise SpecError(f"{case.kind} needs a perturbation amount")
    e = np.atleast_1d(np.asarray(eps, dtype=np.float64)).reshape(-1)
    if e.size == 1:
        e = np.full(batch, e[0])
    if e.size != batch:
        raise SpecError("perturbation amount batch size mismatch")
    lo, hi = case.eps_range
    if np.any(e < lo - 1e-12) or np.any(e > hi + 1e-12):
        raise SpecError(f"{case.kind} amount outside [{lo},{hi}]")
    return e

def _delta_eps(case, eps, batch, width):
    if eps is None:
        raise SpecError(f"{case.kind} needs per-pixel deltas")
    D = np.asarray(eps, dtype=np.float64)
    if D.ndim == 1:
        D = np.broadcast_to(D, (batch, D.size))
    if D.shape != (batch, width):
        raise SpecError(f"delta shape {D.shape} != ({batch},{width})")
    lim = case.eps_limit
    if np.any(np.abs(D) > lim + 1e-12):
        raise SpecError(f"{case.kind} deltas exceed the limit {lim}")
    return D


def _translation_map(case):
    """(src_index, valid) arrays over the flat pixel order, all channels."""
    l, d1, d2 = case.shape
    tx, ty = case.shift
    src = np.zeros(l * d1 * d2, dtype=np.int64)
    valid = np.zeros(l * d1 * d2, dtype=bool)
    for v in range(l):
        for i in range(1, d1 + 1):
            for j in range(1, d2 + 1):
                k = flat_index(case.shape, v, i, j)
                si, sj = i - tx, j - ty
                if 1 <= si <= d1 and 1 <= sj <= d2:
                    src[k] = flat_index(case.shape, v, si, sj)
                    valid[k] = True
    return src, valid


def _translate(case, X):
    src, valid = _translation_map(case)
    P = np.zeros_like(X)
    P[:, valid] = X[:, src[valid]]
    return P


def _rotate(case, X):
    """Bilinear rotation, per channel, in the stencil's exact term order."""
    l, d1, d2 = case.shape
    stencil = rotation_stencil(case.shape, case.theta)
    P = np.zeros_like(X)
    plane = d1 * d2
    for v in range(l):
        off = v * plane
        for k, entry in enumerate(stencil):
            if entry is None:
                continue
            (s0, c0), (s1, c1), (s2, c2), (s3, c3) = entry
            P[:, off + k] = (
                c0 * X[:, off + s0] + c1 * X[:, off + s1]
                + c2 * X[:, off + s2] + c3 * X[:, off + s3]
            )
    return P


def apply(spec: PerturbationSpec, x: np.ndarray, eps, clip=True, shape=None) -> np.ndarray:
    """Apply the perturbation with a full parameter vector.

    Parameter layout by kind: brightness/contrast [e]; occlusion
    [i, j, w]; patch [i, j, w, d_1..d_{l*w*w}]; translation [tx, ty];
    rotation [theta]; linf [d_1..d_n].  Discrete entries must be
    integral and inside their declared ranges.  `x` is an
    (l, d1, d2) tensor, or a flat vector with `shape` given (a flat
    vector of square length defaults to one channel).
    """
    x = np.asarray(x, dtype=np.float64)
    shape = tuple(shape) if shape is not None else _infer_shape(spec, x)
    flat = x.reshape(-1)
    eps = np.atleast_1d(np.asarray(eps, dtype=np.float64))
    k, r = spec.kind, spec.ranges
    if k in ("brightness", "contrast"):
        _check_range(eps[0], r[0], "amount")
        case = PerturbationCase(k, shape, eps_range=r[0])
        out = case_apply(case, flat, eps[0], clip=clip)
    elif k == "occlusion":
        i, j, w = (_check_int(eps[t], r[t], nm) for t, nm in ((0, "i"), (1, "j"), (2, "w")))
        case = PerturbationCase(k, shape, square=(i, j, w))
        out = case_apply(case, flat, clip=clip)
    elif k == "patch":
        i = _check_int(eps[0], r[1], "i")
        j = _check_int(eps[1], r[2], "j")
        w = _check_int(eps[2], r[3], "w")
        case = PerturbationCase(k, shape, square=(i, j, w), eps_limit=r[0][1])
        out = case_apply(case, flat, eps[3:], clip=clip)
    elif k == "translation":
        tx = _check_int(eps[0], r[0], "tx")
        ty = _check_int(eps[1], r[1], "ty")
        case = PerturbationCase(k, shape, shift=(tx, ty))
        out = case_apply(case, flat, clip=clip)
    elif k == "rotation":
        _check_range(eps[0], r[0], "theta")
        case = PerturbationCase(k, shape, theta=float(eps[0]))
        out = case_apply(case, flat, clip=clip)
    else:
        case = PerturbationCase(k, shape, eps_limit=r[0][1])
        out = case_apply(case, flat, eps, clip=clip)
    return out.reshape(x.shape)


def _infer_shape(spec, x):
    if x.ndim == 3:
        return x.shape
    # Flat vector: assume a single-channel square image when possible.
    n = x.shape[-1]
    side = int(round(math.sqrt(n)))
    if side * side == n:
        return (1, side, side)
    return (1, 1, n)


def _check_range(v, rng, name):
    lo, hi = rng
    if not (lo - 1e-12 <= v <= hi + 1e-12):
        raise SpecError(f"{name}={v} outside [{lo},{hi}]")
    return float(v)


def _check_int(v, rng, name):
    _check_range(v, rng, name)
    return _as_int(v, name)


# ---------------------------------------------------------------------------
# Constraint encoding of one case: rows linking the two copies at layer 0.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiIn:
    """Layer-0 coupling of the two network copies for one case.

    eq_rows:    (k, ((src, coef), ...), eps_coef, const) meaning
                z^p_k = const + eps_coef*eps + sum coef*z_src
    band_rows:  (k, src, lo, hi) meaning z_src + lo <= z^p_k <= z_src + hi
    bilinear:   (k, src) meaning z^p_k = eps * z_src (relaxed downstream)
    eps_interval: bounds of the shared eps variable, or None
    pert_lo/hi: concrete bounds of the perturbed copy's inputs (no
                clipping: the interval image of the constraint itself)
    """
    eq_rows: tuple
    band_rows: tuple
    bilinear: tuple
    eps_interval: tuple | None
    pert_lo: np.ndarray
    pert_hi: np.ndarray


def emit_phi_in(case: PerturbationCase) -> PhiIn:
    n = case.n_inputs
    lo = np.zeros(n)
    hi = np.ones(n)
    eq, band, bil = [], [], []
    eps_iv = None
    k = case.kind
    if k == "brightness":
        elo, ehi = case.eps_range
        eps_iv = (elo, ehi)
        for t in range(n):
            eq.append((t, ((t, 1.0),), 1.0, 0.0))
        lo += elo
        hi += ehi
    elif k == "contrast":
        elo, ehi = case.eps_range
        eps_iv = (elo, ehi)
        for t in range(n):
            bil.append((t, t))
        lo[:] = 0.0
        hi[:] = ehi
    elif k == "occlusion":
        inside = set(square_indices(case.shape, case.square).tolist())
        for t in range(n):
            if t in inside:
                eq.append((t, (), 0.0, 0.0))
                lo[t] = hi[t] = 0.0
            else:
                eq.append((t, ((t, 1.0),), 0.0, 0.0))
    elif k == "patch":
        inside = set(square_indices(case.shape, case.square).tolist())
        e = case.eps_limit
        for t in range(n):
            if t in inside:
                band.append((t, t, -e, e))
                lo[t] = -e
                hi[t] = 1.0 + e
            else:
                eq.append((t, ((t, 1.0),), 0.0, 0.0))
    elif k == "translation":
        src, valid = _translation_map(case)
        for t in range(n):
            if valid[t]:
                eq.append((t, ((int(src[t]), 1.0),), 0.0, 0.0))
            else:
                eq.append((t, (), 0.0, 0.0))
                lo[t] = hi[t] = 0.0
    elif k == "rotation":
        l, d1, d2 = case.shape
        stencil = rotation_stencil(case.shape, case.theta)
        plane = d1 * d2
        for v in range(l):
            off = v * plane
            for p, entry in enumerate(stencil):
                t = off + p
                if entry is None:
                    eq.append((t, (), 0.0, 0.0))
                    lo[t] = hi[t] = 0.0
                else:
                    terms = tuple((off + s, c) for s, c in entry if c != 0.0)
                    eq.append((t, terms, 0.0, 0.0))
    else:  # linf
        e = case.eps_limit
        for t in range(n):
            band.append((t, t, -e, e))
        lo -= e
        hi += e
    return PhiIn(tuple(eq), tuple(band), tuple(bil), eps_iv, lo, hi)


# ---------------------------------------------------------------------------
# Seed relations between corresponding variables of the two copies.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeedDependencies:
    """Relations seeded directly by the perturbation.

    layer0: (k_in, rel, k_pert) meaning z_{0,k_in} rel z^p_{0,k_pert};
    layer1: (k, rel) first-layer relations derived from the shared sign
    of a brightness shift (empty for the other kinds).
    """
    layer0: tuple
    layer1: tuple = ()


def seed_dependencies(case: PerturbationCase, net=None) -> SeedDependencies:
    n = case.n_inputs
    k = case.kind
    l0, l1 = [], []
    if k == "brightness":
        elo, ehi = case.eps_range
        if elo == 0.0 and ehi == 0.0:
            sign = 0
        elif elo >= 0.0:
            sign = 1
        elif ehi <= 0.0:
            sign = -1
        else:
            sign = None  # straddling range: split it first
        if sign is not None:
            rel0 = EQ if sign == 0 else (LE if sign > 0 else GE)
            for t in range(n):
                l0.append((t, rel0, t))
            if net is not None:
                W1, _, _ = net.dense_layers()[0]
                for t in range(W1.shape[0]):
                    rowsum = float(np.sum(W1[t]))
                    s = sign * (0 if rowsum == 0.0 else (1 if rowsum > 0 else -1))
                    l1.append((t, EQ if s == 0 else (LE if s > 0 else GE)))
    elif k == "contrast":
        elo, ehi = case.eps_range
        if elo == 1.0 and ehi == 1.0:
            rel0 = EQ
        elif elo >= 1.0:
            rel0 = LE
        elif ehi <= 1.0:
            rel0 = GE
        else:
            rel0 = NONE
        if rel0 != NONE:
            for t in range(n):
                l0.append((t, rel0, t))
    elif k == "occlusion":
        inside = set(square_indices(case.shape, case.square).tolist())
        for t in range(n):
            l0.append((t, GE if t in inside else EQ, t))
    elif k == "patch":
        inside = set(square_indices(case.shape, case.square).tolist())
        for t in range(n):
            if t not in inside:
                l0.append((t, EQ, t))
    elif k == "translation":
        src, valid = _translation_map(case)
        chosen = {}
        for t in range(n):
            if not valid[t]:
                chosen.setdefault(t, (GE, t))
        for t in range(n):
            if valid[t]:
                chosen[int(src[t])] = (EQ, t)  # equality beats the vs-zero bound
        for kin in sorted(chosen):
            rel, kp = chosen[kin]
            l0.append((kin, rel, kp))
    elif k == "rotation":
        l, d1, d2 = case.shape
        stencil = rotation_stencil(case.shape, case.theta)
        plane = d1 * d2
        chosen = {}
        for v in range(l):
            off = v * plane
            for p, entry in enumerate(stencil):
                t = off + p
                if entry is None:
                    chosen.setdefault(t, (GE, t))
                else:
                    live = [(s, c) for s, c in entry if c != 0.0]
                    if len(live) == 1 and live[0][1] == 1.0:
                        chosen[off + live[0][0]] = (EQ, t)
        for kin in sorted(chosen):
            rel, kp = chosen[kin]
            l0.append((kin, rel, kp))
    # linf: the entries are unordered; no seeds.
    return SeedDependencies(layer0=tuple(l0), layer1=tuple(l1))
